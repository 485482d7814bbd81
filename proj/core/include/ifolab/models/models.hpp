#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ifolab/common/rng.hpp"
#include "ifolab/envs/env.hpp"
#include "ifolab/experts/expert.hpp"
#include "ifolab/nn/network.hpp"

namespace ifolab::models {

enum class Source { pre, post };

// One labeled environment step. Deliberately carries no reward: nothing a
// gradient ever touches sees the reward signal.
struct Transition {
  std::vector<double> state;
  int action = 0;
  std::vector<double> next_state;
  Source source = Source::pre;
};

enum class ActionMode { map, explore };

// One policy rollout: the executed transitions, the goal flag v_e, the reward
// sum (metrics only), and per-step flags marking actions that differed from
// the MAP choice.
struct EpisodeRecord {
  std::vector<Transition> transitions;
  int goal = 0;
  double total_reward = 0.0;
  std::vector<bool> non_map;
};

// Encoded state sequence s0..sT of a rollout, for goal recomputation.
std::vector<std::vector<double>> episode_states(const EpisodeRecord& record);

// Trains the inverse dynamics model on (s_t ++ s_{t+1}) -> action by
// minibatch Adam on cross-entropy. The network is updated in place, so
// passing the previous cycle's parameters warm-starts.
nn::TrainStats train_idm(nn::Network& idm, std::span<const Transition> dataset,
                         const nn::TrainHyper& hyper, Rng& rng);

// Predicts one action per expert pair. map: argmax of the softmax (lowest
// index on ties, rng untouched); explore: a sample from the softmax.
std::vector<int> label_pairs(const nn::Network& idm, const experts::StatePairSet& pairs,
                             ActionMode mode, Rng& rng);

// Behavioral cloning of the policy on (s_t -> label). The policy sees only
// the first state of each pair.
nn::TrainStats train_policy(nn::Network& pm, const experts::StatePairSet& pairs,
                            std::span<const int> labels, const nn::TrainHyper& hyper,
                            Rng& rng);

// Runs the policy for one episode. Action choice follows `mode` with
// randomness from action_seed only; the environment draws from env_seed.
// max_steps = 0 means the environment's own cap.
EpisodeRecord rollout(const nn::Network& pm, const envs::EnvSpec& spec, ActionMode mode,
                      std::uint64_t env_seed, std::uint64_t action_seed,
                      int max_steps = 0);

}  // namespace ifolab::models
