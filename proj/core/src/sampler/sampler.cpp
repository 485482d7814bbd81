#include "ifolab/sampler/sampler.hpp"

#include <algorithm>

#include "ifolab/common/errors.hpp"
#include "ifolab/nn/network.hpp"

namespace ifolab::sampler {

namespace {

// Zeroes weights of actions whose bucket is empty and renormalizes,
// recording which actions lost their mass. Returns false if nothing remains.
bool mask_empty_buckets(std::vector<double>& weights,
                        const std::vector<std::vector<const models::Transition*>>& buckets,
                        std::vector<int>& redistributed) {
  double sum = 0.0;
  for (std::size_t a = 0; a < weights.size(); ++a) {
    if (weights[a] > 0.0 && buckets[a].empty()) {
      redistributed.push_back(static_cast<int>(a));
      weights[a] = 0.0;
    }
    sum += weights[a];
  }
  if (sum <= 0.0) return false;
  for (double& w : weights) w /= sum;
  return true;
}

void draw(const std::vector<double>& weights,
          const std::vector<std::vector<const models::Transition*>>& buckets,
          std::size_t count, models::Source tag, Rng& rng,
          std::vector<models::Transition>& out, std::vector<long long>& counts) {
  for (std::size_t i = 0; i < count; ++i) {
    const int a = nn::sample_categorical(weights, rng);
    const auto& bucket = buckets[a];
    out.push_back(*bucket[uniform_below(rng, bucket.size())]);
    out.back().source = tag;
    ++counts[a];
  }
}

}  // namespace

std::vector<double> success_action_distribution(
    std::span<const models::EpisodeRecord> records, int action_count) {
  if (action_count < 1) throw ConfigError("action count must be positive");
  std::vector<double> mean(action_count, 0.0);
  int successes = 0;
  std::vector<double> freq(action_count);
  for (const models::EpisodeRecord& rec : records) {
    if (rec.goal != 1 || rec.transitions.empty()) continue;
    std::fill(freq.begin(), freq.end(), 0.0);
    for (const models::Transition& t : rec.transitions) freq[t.action] += 1.0;
    for (double& f : freq) f /= static_cast<double>(rec.transitions.size());
    for (int a = 0; a < action_count; ++a) mean[a] += freq[a];
    ++successes;
  }
  if (successes == 0) throw DataError("no successful episodes to sample from");
  for (double& m : mean) m /= successes;
  return mean;
}

std::pair<std::vector<models::Transition>, SamplingReport> build_training_set(
    const std::vector<models::Transition>& pre,
    std::span<const models::EpisodeRecord> records, int action_count,
    std::size_t budget, Rng& rng, bool take_all) {
  if (pre.empty()) throw DataError("build_training_set: empty pre-demo set");
  if (budget < 1) throw ConfigError("build_training_set: budget must be at least 1");

  SamplingReport report;
  report.episodes = static_cast<int>(records.size());
  for (const models::EpisodeRecord& rec : records) report.successes += rec.goal == 1;
  report.win_rate = records.empty()
                        ? 0.0
                        : static_cast<double>(report.successes) / report.episodes;
  report.post_counts.assign(action_count, 0);
  report.pre_counts.assign(action_count, 0);

  if (report.successes == 0) {
    report.fallback = true;
    report.total = pre.size();
    for (const models::Transition& t : pre) ++report.pre_counts[t.action];
    return {pre, report};
  }

  report.normalized = success_action_distribution(records, action_count);
  report.printed = report.normalized;
  for (double& p : report.printed) p *= report.win_rate;

  std::vector<std::vector<const models::Transition*>> post_buckets(action_count);
  for (const models::EpisodeRecord& rec : records) {
    if (rec.goal != 1) continue;
    for (const models::Transition& t : rec.transitions)
      post_buckets[t.action].push_back(&t);
  }
  std::vector<std::vector<const models::Transition*>> pre_buckets(action_count);
  for (const models::Transition& t : pre) pre_buckets[t.action].push_back(&t);

  std::vector<models::Transition> out;
  std::size_t n_post;
  if (take_all) {
    n_post = 0;
    for (const auto& bucket : post_buckets) n_post += bucket.size();
    out.reserve(n_post + budget);
    for (const auto& bucket : post_buckets)
      for (const models::Transition* t : bucket) {
        out.push_back(*t);
        ++report.post_counts[t->action];
      }
  } else {
    n_post = static_cast<std::size_t>(report.win_rate * budget);
    out.reserve(budget);
    std::vector<double> post_weights = report.normalized;
    if (mask_empty_buckets(post_weights, post_buckets, report.redistributed_post))
      draw(post_weights, post_buckets, n_post, models::Source::post, rng, out,
           report.post_counts);
  }

  const std::size_t n_pre = budget > n_post ? budget - n_post : 0;
  std::vector<double> pre_weights(action_count);
  for (int a = 0; a < action_count; ++a)
    pre_weights[a] = 1.0 - report.normalized[a];
  if (!mask_empty_buckets(pre_weights, pre_buckets, report.redistributed_pre)) {
    // Complement weights vanished on every stocked action; fall back to a
    // uniform draw over the stocked ones.
    for (int a = 0; a < action_count; ++a)
      pre_weights[a] = pre_buckets[a].empty() ? 0.0 : 1.0;
  }
  draw(pre_weights, pre_buckets, n_pre, models::Source::pre, rng, out,
       report.pre_counts);

  report.total = out.size();
  return {std::move(out), report};
}

}  // namespace ifolab::sampler
