#include <cmath>
#include <doctest.h>
#include <set>

#include "ifolab/common/errors.hpp"
#include "ifolab/common/rng.hpp"
#include "ifolab/envs/classic_control.hpp"
#include "ifolab/envs/env.hpp"
#include "ifolab/envs/maze.hpp"
#include "test_util.hpp"

using namespace ifolab;
using namespace ifolab::envs;

TEST_CASE("spec_from_name covers the whole environment family") {
  const EnvSpec cp = spec_from_name("cartpole");
  CHECK(cp.action_count == 2);
  CHECK(cp.state_dim == 4);
  CHECK(cp.step_cap == 500);

  const EnvSpec ab = spec_from_name("acrobot");
  CHECK(ab.action_count == 3);
  CHECK(ab.state_dim == 6);
  CHECK(ab.step_cap == 500);

  const EnvSpec mc = spec_from_name("mountaincar");
  CHECK(mc.action_count == 3);
  CHECK(mc.state_dim == 2);
  CHECK(mc.step_cap == 200);

  for (int n : {3, 5, 7, 10}) {
    const EnvSpec mz = spec_from_name("maze" + std::to_string(n));
    CHECK(mz.kind == EnvKind::maze);
    CHECK(mz.action_count == 4);
    CHECK(mz.state_dim == 3 * n * n);
    CHECK(mz.step_cap == 10 * n * n);
    CHECK(mz.maze_size == n);
  }
  CHECK_THROWS_AS((void)spec_from_name("maze1"), ConfigError);
  CHECK_THROWS_AS((void)spec_from_name("lunarlander"), ConfigError);
  CHECK_THROWS_AS((void)spec_from_name(""), ConfigError);
}

TEST_CASE("reset distributions stay inside the documented bounds") {
  CartPoleEnv cp(spec_from_name("cartpole"));
  MountainCarEnv mc(spec_from_name("mountaincar"));
  AcrobotEnv ab(spec_from_name("acrobot"));
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    cp.reset(seed);
    for (double v : cp.state()) {
      CHECK(v >= -0.05);
      CHECK(v <= 0.05);
    }
    mc.reset(seed);
    CHECK(mc.position() >= -0.6);
    CHECK(mc.position() <= -0.4);
    CHECK(mc.velocity() == 0.0);
    ab.reset(seed);
    CHECK(std::abs(ab.theta1()) <= 0.1);
    CHECK(std::abs(ab.theta2()) <= 0.1);
    CHECK(std::abs(ab.omega1()) <= 0.1);
    CHECK(std::abs(ab.omega2()) <= 0.1);
  }
}

// Golden values from an independent reimplementation of the published
// dynamics (same initial states, same action sequences).
TEST_CASE("cartpole dynamics match the independent integrator") {
  CartPoleEnv env(spec_from_name("cartpole"));
  env.reset(42);
  CHECK(env.x() == doctest::Approx(0.025515553295453894).epsilon(1e-15));
  for (int i = 0; i < 10; ++i) env.step(i % 2 == 0 ? 1 : 0);
  CHECK(env.x() == doctest::Approx(0.047583825423002643).epsilon(1e-9));
  CHECK(env.x_dot() == doctest::Approx(0.012219348786831674).epsilon(1e-9));
  CHECK(env.theta() == doctest::Approx(-0.0063773379356256666).epsilon(1e-9));
  CHECK(env.theta_dot() == doctest::Approx(0.00078271597095019851).epsilon(1e-9));
}

TEST_CASE("mountaincar dynamics match the independent integrator") {
  MountainCarEnv env(spec_from_name("mountaincar"));
  env.reset(7);
  CHECK(env.position() == doctest::Approx(-0.44912293916942841).epsilon(1e-15));
  for (int i = 0; i < 25; ++i) env.step(2);
  CHECK(env.position() == doctest::Approx(-0.3522752377068834).epsilon(1e-9));
  CHECK(env.velocity() == doctest::Approx(0.0045647130777333803).epsilon(1e-9));
}

TEST_CASE("mountaincar energy pumping reaches the flag at the oracle step") {
  MountainCarEnv env(spec_from_name("mountaincar"));
  env.reset(7);
  while (!env.done()) env.step(env.velocity() >= 0.0 ? 2 : 0);
  CHECK(env.steps() == 121);
  CHECK(env.goal());
  CHECK(env.episode_reward() == -121.0);
  CHECK(env.position() == doctest::Approx(0.51930223019342914).epsilon(1e-9));
  CHECK(env.velocity() == doctest::Approx(0.040232526699284489).epsilon(1e-9));
}

TEST_CASE("acrobot dynamics match the independent integrator") {
  AcrobotEnv env(spec_from_name("acrobot"));
  env.reset(9);
  CHECK(env.theta1() == doctest::Approx(0.0037038203775290046).epsilon(1e-15));
  const int acts[3] = {0, 1, 2};
  for (int i = 0; i < 15; ++i) env.step(acts[i % 3]);
  CHECK(env.theta1() == doctest::Approx(0.033809634597903988).epsilon(1e-9));
  CHECK(env.theta2() == doctest::Approx(-0.09528494536789521).epsilon(1e-9));
  CHECK(env.omega1() == doctest::Approx(-0.15649961976185647).epsilon(1e-9));
  CHECK(env.omega2() == doctest::Approx(0.46202120451618617).epsilon(1e-9));
  // encoded observation is [cos t1, sin t1, cos t2, sin t2, w1, w2]
  CHECK(env.state()[0] == doctest::Approx(std::cos(env.theta1())).epsilon(1e-15));
  CHECK(env.state()[3] == doctest::Approx(std::sin(env.theta2())).epsilon(1e-15));
}

TEST_CASE("identical seeds give bit-identical trajectories") {
  for (const char* name : {"cartpole", "acrobot", "mountaincar", "maze3"}) {
    const EnvSpec spec = spec_from_name(name);
    auto a = make_env(spec), b = make_env(spec);
    a->reset(1234);
    b->reset(1234);
    Rng act_a = make_rng(99), act_b = make_rng(99);
    while (!a->done()) {
      CHECK(a->state() == b->state());
      const StepResult ra = a->step(uniform_below(act_a, spec.action_count));
      const StepResult rb = b->step(uniform_below(act_b, spec.action_count));
      CHECK(ra.reward == rb.reward);
      CHECK(ra.done == rb.done);
    }
    CHECK(b->done());
    CHECK(a->episode_reward() == b->episode_reward());
  }
}

TEST_CASE("reward identities hold on random episodes") {
  Rng rng = make_rng(7);
  for (const char* name : {"cartpole", "acrobot", "mountaincar", "maze3", "maze5"}) {
    const EnvSpec spec = spec_from_name(name);
    auto env = make_env(spec);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      env->reset(seed);
      while (!env->done()) env->step(uniform_below(rng, spec.action_count));
      CHECK(env->steps() <= spec.step_cap);
      switch (spec.kind) {
        case EnvKind::cartpole:
          CHECK(env->episode_reward() == static_cast<double>(env->steps()));
          break;
        case EnvKind::acrobot:
        case EnvKind::mountaincar:
          CHECK(env->episode_reward() == -static_cast<double>(env->steps()));
          break;
        case EnvKind::maze: {
          const int n = spec.maze_size;
          const double expect =
              -0.1 / (n * n) * env->steps() + (env->goal() ? 1.0 : 0.0);
          CHECK(env->episode_reward() == doctest::Approx(expect).epsilon(1e-12));
          break;
        }
      }
    }
  }
}

TEST_CASE("step caps and usage errors") {
  auto mc = make_env(spec_from_name("mountaincar"));
  mc->reset(3);
  while (!mc->done()) mc->step(1);  // coasting never reaches the flag
  CHECK(mc->steps() == 200);
  CHECK_FALSE(mc->goal());
  CHECK(mc->episode_reward() == -200.0);
  CHECK_THROWS_AS((void)mc->step(1), UsageError);

  auto ab = make_env(spec_from_name("acrobot"));
  ab->reset(3);
  while (!ab->done()) ab->step(1);  // zero torque never lifts the tip
  CHECK(ab->steps() == 500);
  CHECK_FALSE(ab->goal());

  auto cp = make_env(spec_from_name("cartpole"));
  cp->reset(3);
  CHECK_THROWS_AS((void)cp->step(2), UsageError);
  CHECK_THROWS_AS((void)cp->step(-1), UsageError);
  while (!cp->done()) cp->step(1);  // constant push topples the pole quickly
  CHECK(cp->steps() < 195);
  CHECK_FALSE(cp->goal());
}

TEST_CASE("goal predicates and goal_reached agree on whole episodes") {
  Rng rng = make_rng(17);
  for (const char* name : {"cartpole", "acrobot", "mountaincar", "maze3"}) {
    const EnvSpec spec = spec_from_name(name);
    auto env = make_env(spec);
    for (std::uint64_t seed = 50; seed < 80; ++seed) {
      env->reset(seed);
      std::vector<std::vector<double>> states = {env->state()};
      while (!env->done()) {
        env->step(uniform_below(rng, spec.action_count));
        states.push_back(env->state());
      }
      CHECK(goal_reached(spec, states) == env->goal());
    }
  }
}

TEST_CASE("cartpole goal needs 195 survived steps") {
  CartPoleEnv env(spec_from_name("cartpole"));
  env.reset(42);
  int steps = 0;
  // PD balance rule keeps the pole up past the threshold
  while (!env.done() && steps < 194) {
    env.step(3.0 * env.theta() + env.theta_dot() > 0.0 ? 1 : 0);
    ++steps;
  }
  REQUIRE(steps == 194);
  CHECK_FALSE(env.goal());
  env.step(3.0 * env.theta() + env.theta_dot() > 0.0 ? 1 : 0);
  CHECK(env.goal());
}

TEST_CASE("random-policy AER bands match the reference table") {
  Rng rng = make_rng(2024);

  double cartpole_sum = 0;
  auto cp = make_env(spec_from_name("cartpole"));
  for (std::uint64_t e = 0; e < 200; ++e) {
    cp->reset(mix_seed(5, streams::eval_episode, e));
    while (!cp->done()) cp->step(uniform_below(rng, 2));
    cartpole_sum += cp->episode_reward();
  }
  const double cartpole_aer = cartpole_sum / 200;
  CHECK(cartpole_aer >= 10.0);
  CHECK(cartpole_aer <= 35.0);

  auto mc = make_env(spec_from_name("mountaincar"));
  double mc_sum = 0;
  for (std::uint64_t e = 0; e < 100; ++e) {
    mc->reset(mix_seed(5, streams::eval_episode, e));
    while (!mc->done()) mc->step(uniform_below(rng, 3));
    CHECK(mc->episode_reward() == -200.0);  // random never climbs out
    mc_sum += mc->episode_reward();
  }
  CHECK(mc_sum / 100 == -200.0);

  auto mz = make_env(spec_from_name("maze3"));
  double mz_sum = 0;
  for (std::uint64_t e = 0; e < 1000; ++e) {
    mz->reset(mix_seed(5, streams::eval_episode, e));
    while (!mz->done()) mz->step(uniform_below(rng, 4));
    mz_sum += mz->episode_reward();
  }
  // A random walk on 3x3 reaches the goal most episodes but the occasional
  // timeout costs a full -1, dragging the mean well below the typical win.
  const double maze_aer = mz_sum / 1000;
  CHECK(maze_aer >= 0.05);
  CHECK(maze_aer <= 0.8);
}

TEST_CASE("generated mazes are valid perfect mazes") {
  for (int n : {2, 3, 5, 10}) {
    std::set<std::vector<std::uint8_t>> seen;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const MazeLayout layout = maze_generate(n, seed);
      validate_layout(layout);
      CHECK(layout.start_row == 0);
      CHECK(layout.start_col == 0);
      CHECK(layout.goal_row == n - 1);
      CHECK(layout.goal_col == n - 1);
      // a perfect maze is a spanning tree: exactly cells-1 open edges
      int open_half_edges = 0;
      for (std::uint8_t w : layout.walls)
        for (int d = 0; d < 4; ++d) open_half_edges += !((w >> d) & 1);
      CHECK(open_half_edges == 2 * (n * n - 1));
      seen.insert(layout.walls);
    }
    if (n >= 5) CHECK(seen.size() == 50);  // large grids: all layouts distinct
  }
  CHECK(maze_generate(4, 77).walls == maze_generate(4, 77).walls);
  CHECK_THROWS_AS((void)maze_generate(1, 0), ConfigError);
}

TEST_CASE("maze distances against a hand-built layout") {
  // 2x2 maze, open edges: (0,0)-(0,1) and (0,1)-(1,1) and (1,1)-(1,0).
  // Cell nibble bits: N=1, S=2, E=4, W=8.
  MazeLayout layout;
  layout.size = 2;
  layout.goal_row = layout.goal_col = 1;
  layout.walls = {
      0x0B,  // (0,0): open east only
      0x05,  // (0,1): open west+south
      0x0B,  // (1,0): open east only
      0x06,  // (1,1): open north+west
  };
  validate_layout(layout);
  const std::vector<int> dist = maze_distances(layout, 0, 0);
  CHECK(dist == std::vector<int>{0, 1, 3, 2});
  const std::vector<int> from_goal = maze_distances(layout, 1, 1);
  CHECK(from_goal == std::vector<int>{2, 1, 1, 0});
}

TEST_CASE("maze layout files round-trip and reject corruption") {
  testutil::TempDir dir("maze-io");
  const MazeLayout layout = maze_generate(5, 99);
  const std::string path = dir.path("m.maze");
  save_layout(layout, path);
  const MazeLayout loaded = load_layout(path);
  CHECK(loaded.size == layout.size);
  CHECK(loaded.walls == layout.walls);
  CHECK(loaded.start_row == layout.start_row);
  CHECK(loaded.goal_col == layout.goal_col);

  const std::string bad1 = dir.path("bad1.maze");
  testutil::write_text(bad1, "x\n");
  CHECK_THROWS_WITH_AS((void)load_layout(bad1), doctest::Contains("bad1.maze"), DataError);

  const std::string bad2 = dir.path("bad2.maze");
  testutil::write_text(bad2, "2\nbz\nbd\nstart 0 0\ngoal 1 1\n");
  CHECK_THROWS_AS((void)load_layout(bad2), DataError);

  // asymmetric interior wall: (0,0) open east, (0,1) closed west
  const std::string bad3 = dir.path("bad3.maze");
  testutil::write_text(bad3, "2\nbf\nbe\nstart 0 0\ngoal 1 1\n");
  CHECK_THROWS_AS((void)load_layout(bad3), DataError);

  const std::string bad4 = dir.path("bad4.maze");
  testutil::write_text(bad4, "2\nbd\nbe\n");
  CHECK_THROWS_AS((void)load_layout(bad4), DataError);
}

TEST_CASE("maze episodes: blocked moves, encoding, goal reward") {
  MazeEnv env(spec_from_name("maze3"));
  env.reset(4242);
  const MazeLayout& layout = env.layout();
  CHECK(env.agent_row() == 0);
  CHECK(env.agent_col() == 0);

  // border is always a wall, so moving north from (0,0) must stay put
  const StepResult blocked = env.step(kNorth);
  CHECK(env.agent_row() == 0);
  CHECK(env.agent_col() == 0);
  CHECK(blocked.reward == doctest::Approx(-0.1 / 9).epsilon(1e-12));
  CHECK_FALSE(blocked.done);

  // encoding: walls channel is the nibble/15, agent and goal one-hot
  const std::vector<double>& s = env.state();
  for (int i = 0; i < 9; ++i)
    CHECK(s[i] == doctest::Approx(layout.walls[i] / 15.0).epsilon(1e-15));
  double agent_sum = 0, goal_sum = 0;
  for (int i = 0; i < 9; ++i) {
    agent_sum += s[9 + i];
    goal_sum += s[18 + i];
  }
  CHECK(agent_sum == 1.0);
  CHECK(goal_sum == 1.0);
  CHECK(s[9 + 0] == 1.0);   // agent at (0,0)
  CHECK(s[18 + 8] == 1.0);  // goal at (2,2)

  // walk the BFS shortest path; final reward includes the +1 bonus
  const std::vector<int> dist = maze_distances(layout, layout.goal_row, layout.goal_col);
  int r = 0, c = 0, steps_taken = 1;  // one blocked step already spent
  while (!(r == 2 && c == 2)) {
    for (int d = 0; d < 4; ++d) {
      if (layout.wall(r, c, d)) continue;
      const int nr = r + kRowDelta[d], nc = c + kColDelta[d];
      if (dist[nr * 3 + nc] == dist[r * 3 + c] - 1) {
        env.step(d);
        r = nr;
        c = nc;
        ++steps_taken;
        break;
      }
    }
  }
  CHECK(env.done());
  CHECK(env.goal());
  CHECK(env.episode_reward() ==
        doctest::Approx(1.0 - 0.1 / 9 * steps_taken).epsilon(1e-12));
}

TEST_CASE("distinct maze seeds give distinct layouts") {
  // The depth-first carve favors corridor-heavy trees, so a few hundred
  // draws can repeat a layout; what matters is that the bulk are distinct.
  std::set<std::vector<std::uint8_t>> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed)
    seen.insert(maze_generate(5, seed).walls);
  CHECK(seen.size() >= 190);
}
