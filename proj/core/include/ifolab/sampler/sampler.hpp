#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ifolab/common/rng.hpp"
#include "ifolab/models/models.hpp"

namespace ifolab::sampler {

// Bookkeeping of one training-set assembly.
struct SamplingReport {
  int successes = 0;  // number of goal-reaching episodes
  int episodes = 0;
  double win_rate = 0.0;  // successes / episodes
  // Mean per-episode action frequency over successful episodes: `printed`
  // carries the raw mass win_rate (sums to win_rate when losses exist),
  // `normalized` is the proper distribution used for drawing.
  std::vector<double> printed;
  std::vector<double> normalized;
  std::vector<long long> post_counts;  // per-action draws from rollouts
  std::vector<long long> pre_counts;   // per-action draws from pre-demos
  std::size_t total = 0;
  bool fallback = false;  // zero successes: output was the pre set verbatim
  // Actions whose target weight had to be spread over the others because the
  // pool held no transition with that action.
  std::vector<int> redistributed_post;
  std::vector<int> redistributed_pre;
};

// Mean of the per-episode action frequency vectors over episodes with
// v_e = 1, normalized to sum to 1. Throws DataError when no episode
// succeeded.
std::vector<double> success_action_distribution(std::span<const models::EpisodeRecord> records,
                                                int action_count);

// Assembles the next IDM training set. With w the success rate, draws
// floor(w * budget) transitions from successful episodes with per-action
// weights proportional to the success distribution, and fills the rest from
// `pre` with weights proportional to its complement. Draws are with
// replacement. Zero successes: returns `pre` unchanged and flags fallback.
// take_all: keep every successful-episode transition instead of drawing the
// post portion.
std::pair<std::vector<models::Transition>, SamplingReport> build_training_set(
    const std::vector<models::Transition>& pre,
    std::span<const models::EpisodeRecord> records, int action_count,
    std::size_t budget, Rng& rng, bool take_all = false);

}  // namespace ifolab::sampler
