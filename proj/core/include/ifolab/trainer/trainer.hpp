#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ifolab/experts/expert.hpp"
#include "ifolab/metrics/metrics.hpp"
#include "ifolab/models/models.hpp"
#include "ifolab/nn/network.hpp"
#include "ifolab/sampler/sampler.hpp"

namespace ifolab::trainer {

// The three switchable ingredients on top of the plain iterative
// behavioral-cloning-from-observation baseline.
struct FeatureFlags {
  bool attention = true;
  bool sampling = true;
  bool exploration = true;
};

// Fixed ablation row label: "BCO" (none), single features, "+"-joined
// combinations, "IUPE" (all three).
std::string method_label(const FeatureFlags& flags);

// All 8 combinations in the fixed table order: BCO, Attention, Sampling,
// Exploration, Attention+Sampling, Attention+Exploration,
// Sampling+Exploration, IUPE.
std::vector<FeatureFlags> ablation_grid();

struct RunConfig {
  envs::EnvSpec spec;
  int alpha = 20;         // improvement cycles
  int rollouts = 0;       // episodes per cycle; 0 -> env default (32/64)
  int pre_demos = 0;      // random transitions; 0 -> env default (5000/10000)
  std::size_t budget = 0; // resampled set size; 0 -> pre-demo count
  nn::TrainHyper idm_hyper;
  nn::TrainHyper pm_hyper;
  std::vector<int> hidden = {64, 64};
  int attention_tokens = 4;
  FeatureFlags features;
  std::uint64_t seed = 0;
  bool cold_start = false;        // reinitialize networks every cycle
  bool accumulate_post = false;   // resample from all cycles' rollouts
  bool sampling_take_all = false; // keep every successful transition
  int eval_episodes = 100;
};

// Resolves the zero-valued env-dependent fields in place.
void apply_env_defaults(RunConfig& config);

struct IterationReport {
  int cycle = 0;
  nn::TrainStats idm;
  nn::TrainStats pm;
  double success_rate = 0.0;      // goal-reaching fraction of the rollouts
  double non_map_fraction = 0.0;  // rollout steps where sampling beat argmax
  double eval_aer = 0.0;
  double eval_p = 0.0;
  int eval_solved = 0;
  sampler::SamplingReport sampling;
};

struct RunResult {
  std::vector<IterationReport> cycles;
  nn::Network idm;
  nn::Network pm;
  metrics::BaselinePair baselines;
};

// Random-policy transitions, episodes truncated at the env cap, exactly
// `size` of them.
std::vector<models::Transition> generate_pre_demos(const envs::EnvSpec& spec, int size,
                                                   std::uint64_t seed);

// The improvement loop: train the inverse model on the current set, label
// the expert pairs, clone the policy, roll it out, rebuild the training set
// from the outcomes, repeat `alpha` times with an evaluation each cycle.
// With sampling off the next training set is the latest rollout transitions
// verbatim; exploration off makes every action choice greedy; attention off
// removes the gated blocks from both networks.
RunResult run(const RunConfig& config, const experts::StatePairSet& expert_pairs,
              const std::string& baseline_cache_dir = "",
              const std::function<void(const IterationReport&)>& on_cycle = {});

struct AblationCell {
  std::string label;
  std::uint64_t seed;
  double p = 0.0;
  double aer = 0.0;
};

// Runs every flag combination for every seed (final-cycle metrics), in grid
// order with seeds innermost.
std::vector<AblationCell> ablate(
    const RunConfig& base, std::span<const std::uint64_t> seeds,
    const experts::StatePairSet& expert_pairs, const std::string& baseline_cache_dir = "",
    const std::function<void(const AblationCell&)>& on_run = {});

}  // namespace ifolab::trainer
