#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ifolab/envs/env.hpp"
#include "ifolab/nn/network.hpp"

namespace ifolab::metrics {

// Mean episode reward. Throws DataError on an empty list.
double aer(std::span<const double> episode_rewards);

// Random-policy and expert reference rewards for one environment. The
// per-episode vectors are aligned with the evaluation episode seeds
// (episode i of any evaluation run with the same seed uses the same reset
// seed), which for mazes means per-layout baselines.
struct BaselinePair {
  std::string env_name;
  int episodes = 0;
  std::uint64_t seed = 0;
  double random_aer = 0.0;
  double expert_aer = 0.0;
  std::vector<double> random_rewards;
  std::vector<double> expert_rewards;
};

// Aggregate scaling: (policy_aer - random) / (expert - random). Throws
// ConfigError when the denominator is degenerate.
double performance(double policy_aer, const BaselinePair& baselines);

// Per-episode scaling, averaged: mean_i (r_i - random_i) / (expert_i -
// random_i). Episodes with a degenerate denominator are skipped. Used for
// mazes, where each episode is its own layout.
double performance_per_episode(std::span<const double> policy_rewards,
                               const BaselinePair& baselines);

// Metric for this environment kind: per-episode scaling for mazes,
// aggregate for classic control.
double performance_for(const envs::EnvSpec& spec, std::span<const double> policy_rewards,
                       const BaselinePair& baselines);

// Seed of evaluation episode i under evaluation master seed `seed`. Shared
// by baseline rollouts and policy evaluation so they pair up.
std::uint64_t eval_episode_seed(std::uint64_t seed, int episode);

// Runs the scripted expert and a uniform-random policy over n seeded
// episodes (the same reset seeds for both; mazes average several random
// episodes per layout to steady the per-layout reference).
BaselinePair compute_baselines(const envs::EnvSpec& spec, int n, std::uint64_t seed);

// Versioned cache of one BaselinePair.
void save_baselines(const BaselinePair& baselines, const std::string& path);
BaselinePair load_baselines(const std::string& path);

// Loads a cached BaselinePair if it matches (env, n, seed), else computes
// and caches it. Empty cache_dir disables caching.
BaselinePair baselines_for(const envs::EnvSpec& spec, int n, std::uint64_t seed,
                           const std::string& cache_dir);

struct EvalResult {
  std::vector<double> rewards;
  int solved = 0;  // episodes with goal() true
  double aer = 0.0;
  double p = 0.0;
};

// 100%-greedy evaluation: n MAP-mode episodes on the baseline episode seeds.
EvalResult evaluate_policy(const nn::Network& pm, const envs::EnvSpec& spec,
                           const BaselinePair& baselines);

}  // namespace ifolab::metrics
