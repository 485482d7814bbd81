#include "ifolab/envs/env.hpp"

#include <cmath>

#include "ifolab/common/errors.hpp"
#include "ifolab/envs/classic_control.hpp"
#include "ifolab/envs/maze.hpp"

namespace ifolab::envs {

StepResult Env::step(int action) {
  if (done_) throw UsageError(spec_.name + ": step called on a finished episode");
  if (action < 0 || action >= spec_.action_count)
    throw UsageError(spec_.name + ": action " + std::to_string(action) +
                     " out of range [0, " + std::to_string(spec_.action_count) + ")");
  StepResult result = advance(action);
  ++steps_;
  reward_sum_ += result.reward;
  if (steps_ >= spec_.step_cap) result.done = true;
  done_ = result.done;
  return result;
}

EnvSpec spec_from_name(const std::string& name) {
  if (name == "cartpole")
    return {EnvKind::cartpole, name, 2, 4, 500, 0};
  if (name == "acrobot")
    return {EnvKind::acrobot, name, 3, 6, 500, 0};
  if (name == "mountaincar")
    return {EnvKind::mountaincar, name, 3, 2, 200, 0};
  if (name.rfind("maze", 0) == 0 && name.size() > 4) {
    int n = 0;
    for (std::size_t i = 4; i < name.size(); ++i) {
      if (name[i] < '0' || name[i] > '9') { n = 0; break; }
      n = n * 10 + (name[i] - '0');
    }
    if (n >= 2)
      return {EnvKind::maze, name, 4, 3 * n * n, 10 * n * n, n};
  }
  throw ConfigError("unknown environment '" + name +
                    "' (expected cartpole, acrobot, mountaincar, or mazeN)");
}

std::unique_ptr<Env> make_env(const EnvSpec& spec) {
  switch (spec.kind) {
    case EnvKind::cartpole: return std::make_unique<CartPoleEnv>(spec);
    case EnvKind::acrobot: return std::make_unique<AcrobotEnv>(spec);
    case EnvKind::mountaincar: return std::make_unique<MountainCarEnv>(spec);
    case EnvKind::maze: return std::make_unique<MazeEnv>(spec);
  }
  throw ConfigError("unknown environment kind");
}

bool goal_reached(const EnvSpec& spec, std::span<const std::vector<double>> states) {
  if (states.empty()) return false;
  const std::vector<double>& last = states.back();
  switch (spec.kind) {
    case EnvKind::cartpole:
      return static_cast<int>(states.size()) - 1 >= CartPoleEnv::kGoalSteps;
    case EnvKind::mountaincar:
      return last[0] >= MountainCarEnv::kGoalPosition;
    case EnvKind::acrobot: {
      // obs = [cos t1, sin t1, cos t2, sin t2, w1, w2];
      // cos(t1 + t2) = cos t1 cos t2 - sin t1 sin t2
      const double cos_sum = last[0] * last[2] - last[1] * last[3];
      return -last[0] - cos_sum > 1.0;
    }
    case EnvKind::maze: {
      const int cells = spec.maze_size * spec.maze_size;
      for (int i = 0; i < cells; ++i)
        if (last[cells + i] != 0.0) return last[2 * cells + i] != 0.0;
      return false;
    }
  }
  return false;
}

}  // namespace ifolab::envs
