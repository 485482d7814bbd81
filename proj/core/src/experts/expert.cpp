#include "ifolab/experts/expert.hpp"

#include <cstdlib>
#include <sstream>

#include "ifolab/common/errors.hpp"
#include "ifolab/common/rng.hpp"
#include "ifolab/common/text_io.hpp"
#include "ifolab/envs/classic_control.hpp"
#include "ifolab/envs/maze.hpp"

namespace ifolab::experts {

namespace {

int maze_expert_action(const envs::MazeEnv& env) {
  const envs::MazeLayout& layout = env.layout();
  const std::vector<int> dist =
      envs::maze_distances(layout, layout.goal_row, layout.goal_col);
  const int n = layout.size;
  const int here = dist[env.agent_row() * n + env.agent_col()];
  for (int d = 0; d < 4; ++d) {
    if (layout.wall(env.agent_row(), env.agent_col(), d)) continue;
    const int nr = env.agent_row() + envs::kRowDelta[d];
    const int nc = env.agent_col() + envs::kColDelta[d];
    if (dist[nr * n + nc] == here - 1) return d;
  }
  return 0;  // unreachable on a valid layout away from the goal
}

}  // namespace

int expert_action(const envs::Env& env) {
  switch (env.spec().kind) {
    case envs::EnvKind::cartpole: {
      // Gains picked so every seeded episode reaches the 500-step cap.
      const auto& cp = static_cast<const envs::CartPoleEnv&>(env);
      return 3.0 * cp.theta() + cp.theta_dot() > 0.0 ? 1 : 0;
    }
    case envs::EnvKind::mountaincar: {
      const auto& mc = static_cast<const envs::MountainCarEnv&>(env);
      return mc.velocity() >= 0.0 ? 2 : 0;
    }
    case envs::EnvKind::acrobot: {
      // Elbow torque against the shoulder swing pumps energy into link 1
      // (with-the-swing torque never crosses the height line here).
      const auto& ab = static_cast<const envs::AcrobotEnv&>(env);
      return ab.omega1() >= 0.0 ? 0 : 2;
    }
    case envs::EnvKind::maze:
      return maze_expert_action(static_cast<const envs::MazeEnv&>(env));
  }
  throw ConfigError("unknown environment kind");
}

std::vector<Trajectory> record_demonstrations(const envs::EnvSpec& spec, int n_episodes,
                                              std::uint64_t seed) {
  if (n_episodes < 1) throw ConfigError("demo episode count must be at least 1");
  auto env = envs::make_env(spec);
  std::vector<Trajectory> demos;
  demos.reserve(n_episodes);
  std::uint64_t attempt = 0;
  int consecutive_failures = 0;
  while (static_cast<int>(demos.size()) < n_episodes) {
    env->reset(mix_seed(seed, streams::demo_record, attempt++));
    Trajectory traj;
    traj.states.push_back(env->state());
    while (!env->done()) {
      env->step(expert_action(*env));
      traj.states.push_back(env->state());
    }
    if (env->goal()) {
      traj.reward = env->episode_reward();
      demos.push_back(std::move(traj));
      consecutive_failures = 0;
    } else if (++consecutive_failures >= 100) {
      throw DataError(spec.name + ": expert failed 100 consecutive episodes");
    }
  }
  return demos;
}

StatePairSet make_pairs(const std::vector<Trajectory>& demos) {
  if (demos.empty()) throw DataError("make_pairs: no demonstrations");
  StatePairSet pairs;
  for (const Trajectory& traj : demos) {
    for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
      pairs.first.push_back(traj.states[t]);
      pairs.second.push_back(traj.states[t + 1]);
    }
  }
  return pairs;
}

namespace {

std::string shape_string(const envs::EnvSpec& spec) {
  if (spec.kind == envs::EnvKind::maze) {
    const std::string n = std::to_string(spec.maze_size);
    return "3x" + n + "x" + n;
  }
  return std::to_string(spec.state_dim);
}

int shape_product(const std::string& shape, const std::string& path, int lineno) {
  int product = 1, cur = 0;
  bool has_digit = false;
  for (const char ch : shape + "x") {
    if (ch >= '0' && ch <= '9') {
      cur = cur * 10 + (ch - '0');
      has_digit = true;
    } else if (ch == 'x' && has_digit && cur > 0) {
      product *= cur;
      cur = 0;
      has_digit = false;
    } else {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad shape '" + shape + "'");
    }
  }
  return product;
}

}  // namespace

void write_demos(const std::string& path, const envs::EnvSpec& spec,
                 const std::vector<Trajectory>& demos) {
  std::ostringstream out;
  out << "ifolab-demos v1\n";
  const std::string shape = shape_string(spec);
  for (const Trajectory& traj : demos) {
    out << spec.name << ' ' << shape << ' ' << traj.states.size();
    for (const std::vector<double>& s : traj.states)
      for (double v : s) out << ' ' << format_double(v);
    out << '\n';
  }
  atomic_write_file(path, out.str());
}

DemoFile read_demos(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  int lineno = 1;
  auto fail = [&path](int line_no, const std::string& msg) -> void {
    throw DataError(path + ":" + std::to_string(line_no) + ": " + msg);
  };
  if (!std::getline(in, line) || line != "ifolab-demos v1")
    fail(lineno, "missing or unsupported header (expected 'ifolab-demos v1')");

  DemoFile file;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name, shape;
    std::size_t count = 0;
    if (!(ls >> name >> shape >> count))
      fail(lineno, "expected 'name shape count values...'");
    if (file.env_name.empty()) file.env_name = name;
    else if (file.env_name != name)
      fail(lineno, "mixed environments: '" + name + "' after '" + file.env_name + "'");
    if (count < 2) fail(lineno, "trajectory needs at least 2 states");
    const int dim = shape_product(shape, path, lineno);

    Trajectory traj;
    traj.states.reserve(count);
    std::string tok;
    for (std::size_t s = 0; s < count; ++s) {
      std::vector<double> state(dim);
      for (int i = 0; i < dim; ++i) {
        if (!(ls >> tok))
          fail(lineno, "trajectory " + std::to_string(lineno - 1) + " truncated at state " +
                           std::to_string(s));
        char* end = nullptr;
        state[i] = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size())
          fail(lineno, "bad number '" + tok + "'");
      }
      traj.states.push_back(std::move(state));
    }
    if (ls >> tok) fail(lineno, "trailing data after the last state");
    file.trajectories.push_back(std::move(traj));
  }
  return file;
}

}  // namespace ifolab::experts
