#include "ifolab/models/models.hpp"

#include <algorithm>

#include "ifolab/common/errors.hpp"

namespace ifolab::models {

namespace {

nn::Matrix stack_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DataError("cannot stack an empty state list");
  nn::Matrix out(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw DataError("state " + std::to_string(i) + " has mismatched length");
    std::copy(rows[i].begin(), rows[i].end(), out.row(static_cast<int>(i)));
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> episode_states(const EpisodeRecord& record) {
  std::vector<std::vector<double>> states;
  states.reserve(record.transitions.size() + 1);
  if (!record.transitions.empty()) states.push_back(record.transitions.front().state);
  for (const Transition& t : record.transitions) states.push_back(t.next_state);
  return states;
}

nn::TrainStats train_idm(nn::Network& idm, std::span<const Transition> dataset,
                         const nn::TrainHyper& hyper, Rng& rng) {
  if (dataset.empty()) throw DataError("train_idm: empty dataset");
  const int dim = static_cast<int>(dataset[0].state.size());
  nn::Matrix inputs(static_cast<int>(dataset.size()), 2 * dim);
  std::vector<int> targets(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Transition& t = dataset[i];
    if (static_cast<int>(t.state.size()) != dim ||
        static_cast<int>(t.next_state.size()) != dim)
      throw DataError("train_idm: transition " + std::to_string(i) +
                      " has mismatched state shapes");
    double* row = inputs.row(static_cast<int>(i));
    std::copy(t.state.begin(), t.state.end(), row);
    std::copy(t.next_state.begin(), t.next_state.end(), row + dim);
    targets[i] = t.action;
  }
  return nn::train_classifier(idm, inputs, targets, hyper, rng);
}

std::vector<int> label_pairs(const nn::Network& idm, const experts::StatePairSet& pairs,
                             ActionMode mode, Rng& rng) {
  if (pairs.size() == 0) throw DataError("label_pairs: no pairs");
  const int dim = static_cast<int>(pairs.first[0].size());
  const int classes = idm.output_dim();
  std::vector<int> labels(pairs.size());
  std::vector<double> probs(classes);
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < pairs.size(); start += kChunk) {
    const std::size_t end = std::min(start + kChunk, pairs.size());
    nn::Matrix inputs(static_cast<int>(end - start), 2 * dim);
    for (std::size_t i = start; i < end; ++i) {
      double* row = inputs.row(static_cast<int>(i - start));
      std::copy(pairs.first[i].begin(), pairs.first[i].end(), row);
      std::copy(pairs.second[i].begin(), pairs.second[i].end(), row + dim);
    }
    nn::Matrix logits = nn::forward(idm, inputs);
    for (int r = 0; r < logits.rows(); ++r) {
      std::copy(logits.row(r), logits.row(r) + classes, probs.begin());
      nn::softmax_inplace(probs);
      labels[start + r] = mode == ActionMode::map ? nn::argmax(probs)
                                                  : nn::sample_categorical(probs, rng);
    }
  }
  return labels;
}

nn::TrainStats train_policy(nn::Network& pm, const experts::StatePairSet& pairs,
                            std::span<const int> labels, const nn::TrainHyper& hyper,
                            Rng& rng) {
  if (labels.size() != pairs.size())
    throw DataError("train_policy: " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(pairs.size()) + " pairs");
  const nn::Matrix inputs = stack_rows(pairs.first);
  return nn::train_classifier(pm, inputs, labels, hyper, rng);
}

EpisodeRecord rollout(const nn::Network& pm, const envs::EnvSpec& spec, ActionMode mode,
                      std::uint64_t env_seed, std::uint64_t action_seed, int max_steps) {
  auto env = envs::make_env(spec);
  env->reset(env_seed);
  Rng rng = make_rng(action_seed);
  if (max_steps <= 0) max_steps = spec.step_cap;

  EpisodeRecord record;
  nn::Matrix input(1, spec.state_dim);
  std::vector<double> probs(spec.action_count);
  while (!env->done() && env->steps() < max_steps) {
    const std::vector<double> state = env->state();
    std::copy(state.begin(), state.end(), input.row(0));
    nn::Matrix logits = nn::forward(pm, input);
    std::copy(logits.row(0), logits.row(0) + spec.action_count, probs.begin());
    nn::softmax_inplace(probs);
    const int map_action = nn::argmax(probs);
    const int action =
        mode == ActionMode::map ? map_action : nn::sample_categorical(probs, rng);
    env->step(action);
    record.transitions.push_back({state, action, env->state(), Source::post});
    record.non_map.push_back(action != map_action);
  }
  record.goal = env->goal() ? 1 : 0;
  record.total_reward = env->episode_reward();
  return record;
}

}  // namespace ifolab::models
