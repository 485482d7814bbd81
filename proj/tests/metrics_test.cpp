#include <cmath>
#include <doctest.h>
#include <filesystem>

#include "ifolab/common/errors.hpp"
#include "ifolab/metrics/metrics.hpp"
#include "ifolab/models/models.hpp"
#include "test_util.hpp"

using namespace ifolab;
using namespace ifolab::metrics;

namespace {

BaselinePair constant_baselines(double random, double expert, int episodes = 1) {
  BaselinePair b;
  b.episodes = episodes;
  b.random_aer = random;
  b.expert_aer = expert;
  b.random_rewards.assign(episodes, random);
  b.expert_rewards.assign(episodes, expert);
  return b;
}

}  // namespace

TEST_CASE("aer is the mean episode reward") {
  const std::vector<double> rewards = {1.0, 2.0, 6.0};
  CHECK(aer(rewards) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS((void)aer(std::vector<double>{}), DataError);
}

TEST_CASE("performance reproduces the reference scaling table") {
  // (model AER, random AER, expert AER) -> published P, tolerance 0.001
  struct Row {
    double model, random, expert, p;
  };
  const Row rows[] = {
      // cartpole: every listed method saturates the cap
      {500.000, 18.700, 442.628, 1.135},
      {442.628, 18.700, 442.628, 1.000},  // expert scores 1 by construction
      {18.700, 18.700, 442.628, 0.000},   // random scores 0 by construction
      // acrobot
      {-83.590, -482.600, -110.109, 1.071},
      {-117.600, -482.600, -110.109, 0.980},
      {-85.300, -482.600, -110.109, 1.067},
      {-78.100, -482.600, -110.109, 1.086},
      {-110.109, -482.600, -110.109, 1.000},
      {-482.600, -482.600, -110.109, 0.000},
      // mountaincar
      {-117.720, -200.000, -147.265, 1.560},
      {-150.000, -200.000, -147.265, 0.948},
      {-167.000, -200.000, -147.265, 0.626},
      {-130.700, -200.000, -147.265, 1.314},
      {-147.265, -200.000, -147.265, 1.000},
      {-200.000, -200.000, -147.265, 0.000},
  };
  for (const Row& row : rows) {
    const BaselinePair b = constant_baselines(row.random, row.expert);
    CHECK(std::abs(performance(row.model, b) - row.p) <= 0.001);
  }
}

TEST_CASE("aggregate and per-episode scaling agree for constant baselines") {
  const BaselinePair b = constant_baselines(-200.0, -147.265, 4);
  const std::vector<double> rewards = {-150.0, -140.0, -180.0, -130.0};
  const double agg = performance(aer(rewards), b);
  const double per = performance_per_episode(rewards, b);
  CHECK(per == doctest::Approx(agg).epsilon(1e-12));
}

TEST_CASE("per-episode scaling skips degenerate layouts") {
  BaselinePair b;
  b.episodes = 3;
  b.random_rewards = {0.0, 0.5, 0.2};
  b.expert_rewards = {1.0, 0.5, 0.8};  // episode 1 denominator is zero
  b.random_aer = (0.0 + 0.5 + 0.2) / 3;
  b.expert_aer = (1.0 + 0.5 + 0.8) / 3;
  const std::vector<double> rewards = {0.5, 123.0, 0.8};
  const double expect = ((0.5 - 0.0) / 1.0 + (0.8 - 0.2) / 0.6) / 2.0;
  CHECK(performance_per_episode(rewards, b) == doctest::Approx(expect).epsilon(1e-12));

  BaselinePair degenerate;
  degenerate.episodes = 1;
  degenerate.random_rewards = {0.5};
  degenerate.expert_rewards = {0.5};
  CHECK_THROWS_AS((void)performance_per_episode(std::vector<double>{0.5}, degenerate),
                  ConfigError);
  CHECK_THROWS_AS((void)performance(1.0, degenerate), ConfigError);

  const std::vector<double> wrong_len = {1.0, 2.0};
  CHECK_THROWS_AS((void)performance_per_episode(wrong_len, b), ConfigError);
}

TEST_CASE("performance_for dispatches on environment kind") {
  BaselinePair b;
  b.episodes = 2;
  b.random_rewards = {0.0, 0.0};
  b.expert_rewards = {1.0, 0.5};
  b.random_aer = 0.0;
  b.expert_aer = 0.75;
  const std::vector<double> rewards = {0.5, 0.5};

  const double maze = performance_for(envs::spec_from_name("maze3"), rewards, b);
  CHECK(maze == doctest::Approx((0.5 / 1.0 + 0.5 / 0.5) / 2.0).epsilon(1e-12));
  const double classic = performance_for(envs::spec_from_name("cartpole"), rewards, b);
  CHECK(classic == doctest::Approx(0.5 / 0.75).epsilon(1e-12));
}

TEST_CASE("evaluation episode seeds are deterministic and distinct") {
  CHECK(eval_episode_seed(7, 0) == eval_episode_seed(7, 0));
  CHECK(eval_episode_seed(7, 0) != eval_episode_seed(7, 1));
  CHECK(eval_episode_seed(7, 0) != eval_episode_seed(8, 0));
}

TEST_CASE("computed baselines have the documented shape and ordering") {
  const auto spec = envs::spec_from_name("mountaincar");
  const BaselinePair b = compute_baselines(spec, 20, 99);
  CHECK(b.env_name == "mountaincar");
  CHECK(b.episodes == 20);
  CHECK(b.seed == 99);
  REQUIRE(b.random_rewards.size() == 20);
  REQUIRE(b.expert_rewards.size() == 20);
  for (double r : b.random_rewards) CHECK(r == -200.0);
  CHECK(b.random_aer == -200.0);
  CHECK(b.expert_aer > b.random_aer);

  const auto maze = envs::spec_from_name("maze3");
  const BaselinePair mb = compute_baselines(maze, 30, 99);
  REQUIRE(mb.random_rewards.size() == 30);
  REQUIRE(mb.expert_rewards.size() == 30);
  CHECK(mb.expert_aer > 0.9);  // BFS expert solves every layout
  for (std::size_t i = 0; i < 30; ++i) CHECK(mb.expert_rewards[i] > mb.random_rewards[i]);

  // deterministic in the seed
  const BaselinePair again = compute_baselines(maze, 30, 99);
  CHECK(again.random_rewards == mb.random_rewards);
  CHECK(again.expert_rewards == mb.expert_rewards);
}

TEST_CASE("baseline files round-trip and the cache is reused") {
  testutil::TempDir dir("baselines");
  const auto spec = envs::spec_from_name("maze3");
  const BaselinePair b = compute_baselines(spec, 10, 5);

  const std::string path = dir.path("b.txt");
  save_baselines(b, path);
  const BaselinePair loaded = load_baselines(path);
  CHECK(loaded.env_name == b.env_name);
  CHECK(loaded.episodes == b.episodes);
  CHECK(loaded.seed == b.seed);
  CHECK(loaded.random_rewards == b.random_rewards);
  CHECK(loaded.expert_rewards == b.expert_rewards);
  CHECK(loaded.random_aer == b.random_aer);
  CHECK(loaded.expert_aer == b.expert_aer);

  const std::string bad = dir.path("bad.txt");
  testutil::write_text(bad, "wrong header\n");
  CHECK_THROWS_AS((void)load_baselines(bad), DataError);

  // baselines_for writes a cache file, then reuses it
  const BaselinePair first = baselines_for(spec, 10, 5, dir.root().string());
  bool cache_seen = false;
  for (const auto& entry : std::filesystem::directory_iterator(dir.root()))
    if (entry.path().filename().string().find("baselines-maze3") == 0) cache_seen = true;
  CHECK(cache_seen);
  const BaselinePair second = baselines_for(spec, 10, 5, dir.root().string());
  CHECK(second.random_rewards == first.random_rewards);
  CHECK(second.expert_rewards == first.expert_rewards);

  // different episode count: recomputed, not served from the stale entry
  const BaselinePair other = baselines_for(spec, 11, 5, dir.root().string());
  CHECK(other.episodes == 11);
}

TEST_CASE("evaluate_policy scores a network deterministically") {
  const auto spec = envs::spec_from_name("cartpole");
  Rng rng = make_rng(1);
  nn::NetConfig cfg;
  cfg.hidden = {8};
  cfg.attention = false;
  const nn::Network pm = nn::make_network(spec.state_dim, spec.action_count, cfg, rng);
  const BaselinePair b = compute_baselines(spec, 15, 3);

  const EvalResult a = evaluate_policy(pm, spec, b);
  const EvalResult c = evaluate_policy(pm, spec, b);
  CHECK(a.rewards == c.rewards);
  CHECK(a.solved == c.solved);
  CHECK(a.aer == doctest::Approx(aer(a.rewards)).epsilon(1e-12));
  CHECK(a.p == doctest::Approx(performance_for(spec, a.rewards, b)).epsilon(1e-12));
  REQUIRE(a.rewards.size() == 15);

  int goals = 0;
  for (double r : a.rewards)
    if (r >= 195.0) ++goals;  // cartpole goal is surviving 195 steps
  CHECK(a.solved == goals);
}
