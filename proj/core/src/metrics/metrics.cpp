#include "ifolab/metrics/metrics.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "ifolab/common/errors.hpp"
#include "ifolab/common/rng.hpp"
#include "ifolab/common/text_io.hpp"
#include "ifolab/experts/expert.hpp"
#include "ifolab/models/models.hpp"

namespace ifolab::metrics {

namespace {
// Per-layout random references average this many episodes per layout.
constexpr int kRandomEpisodesPerLayout = 10;
constexpr double kMinDenominator = 1e-9;
}  // namespace

double aer(std::span<const double> episode_rewards) {
  if (episode_rewards.empty()) throw DataError("aer: no episode rewards");
  double sum = 0.0;
  for (double r : episode_rewards) sum += r;
  return sum / static_cast<double>(episode_rewards.size());
}

double performance(double policy_aer, const BaselinePair& baselines) {
  const double denom = baselines.expert_aer - baselines.random_aer;
  if (std::abs(denom) < kMinDenominator)
    throw ConfigError(baselines.env_name +
                      ": expert and random baselines coincide; performance undefined");
  return (policy_aer - baselines.random_aer) / denom;
}

double performance_per_episode(std::span<const double> policy_rewards,
                               const BaselinePair& baselines) {
  if (policy_rewards.size() != baselines.expert_rewards.size() ||
      policy_rewards.size() != baselines.random_rewards.size())
    throw ConfigError(baselines.env_name + ": evaluation episode count " +
                      std::to_string(policy_rewards.size()) +
                      " does not match the baseline episode count " +
                      std::to_string(baselines.expert_rewards.size()));
  double sum = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < policy_rewards.size(); ++i) {
    const double denom = baselines.expert_rewards[i] - baselines.random_rewards[i];
    if (std::abs(denom) < kMinDenominator) continue;
    sum += (policy_rewards[i] - baselines.random_rewards[i]) / denom;
    ++used;
  }
  if (used == 0)
    throw ConfigError(baselines.env_name + ": every per-episode baseline is degenerate");
  return sum / used;
}

double performance_for(const envs::EnvSpec& spec, std::span<const double> policy_rewards,
                       const BaselinePair& baselines) {
  if (spec.kind == envs::EnvKind::maze)
    return performance_per_episode(policy_rewards, baselines);
  return performance(aer(policy_rewards), baselines);
}

std::uint64_t eval_episode_seed(std::uint64_t seed, int episode) {
  return mix_seed(seed, streams::eval_episode, static_cast<std::uint64_t>(episode));
}

BaselinePair compute_baselines(const envs::EnvSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("baseline episode count must be at least 1");
  BaselinePair out;
  out.env_name = spec.name;
  out.episodes = n;
  out.seed = seed;
  out.random_rewards.reserve(n);
  out.expert_rewards.reserve(n);

  auto env = envs::make_env(spec);
  const int random_runs =
      spec.kind == envs::EnvKind::maze ? kRandomEpisodesPerLayout : 1;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t episode_seed = eval_episode_seed(seed, i);

    env->reset(episode_seed);
    while (!env->done()) env->step(experts::expert_action(*env));
    out.expert_rewards.push_back(env->episode_reward());

    double random_sum = 0.0;
    for (int k = 0; k < random_runs; ++k) {
      Rng rng = make_rng(mix_seed(seed, streams::baseline_random,
                                  static_cast<std::uint64_t>(i) * random_runs + k));
      env->reset(episode_seed);
      while (!env->done()) env->step(static_cast<int>(uniform_below(rng, spec.action_count)));
      random_sum += env->episode_reward();
    }
    out.random_rewards.push_back(random_sum / random_runs);
  }
  out.random_aer = aer(out.random_rewards);
  out.expert_aer = aer(out.expert_rewards);
  return out;
}

void save_baselines(const BaselinePair& baselines, const std::string& path) {
  std::ostringstream out;
  out << "ifolab-baselines v1\n";
  out << baselines.env_name << ' ' << baselines.episodes << ' ' << baselines.seed << '\n';
  out << "random";
  for (double r : baselines.random_rewards) out << ' ' << format_double(r);
  out << "\nexpert";
  for (double r : baselines.expert_rewards) out << ' ' << format_double(r);
  out << '\n';
  atomic_write_file(path, out.str());
}

BaselinePair load_baselines(const std::string& path) {
  std::istringstream in(read_file(path));
  auto fail = [&path](const std::string& msg) -> void {
    throw DataError(path + ": " + msg);
  };
  std::string line;
  if (!std::getline(in, line) || line != "ifolab-baselines v1")
    fail("missing or unsupported header");
  BaselinePair out;
  if (!(in >> out.env_name >> out.episodes >> out.seed)) fail("bad key line");
  if (out.episodes < 1) fail("bad episode count");
  std::string tag;
  out.random_rewards.resize(out.episodes);
  out.expert_rewards.resize(out.episodes);
  if (!(in >> tag) || tag != "random") fail("expected 'random' block");
  for (double& r : out.random_rewards)
    if (!(in >> r)) fail("truncated random rewards");
  if (!(in >> tag) || tag != "expert") fail("expected 'expert' block");
  for (double& r : out.expert_rewards)
    if (!(in >> r)) fail("truncated expert rewards");
  out.random_aer = aer(out.random_rewards);
  out.expert_aer = aer(out.expert_rewards);
  return out;
}

BaselinePair baselines_for(const envs::EnvSpec& spec, int n, std::uint64_t seed,
                           const std::string& cache_dir) {
  if (cache_dir.empty()) return compute_baselines(spec, n, seed);
  const std::string path = cache_dir + "/baselines-" + spec.name + "-" +
                           std::to_string(n) + "-" + std::to_string(seed) + ".txt";
  if (std::filesystem::exists(path)) {
    BaselinePair cached = load_baselines(path);
    if (cached.env_name == spec.name && cached.episodes == n && cached.seed == seed)
      return cached;
  }
  BaselinePair fresh = compute_baselines(spec, n, seed);
  save_baselines(fresh, path);
  return fresh;
}

EvalResult evaluate_policy(const nn::Network& pm, const envs::EnvSpec& spec,
                           const BaselinePair& baselines) {
  EvalResult result;
  result.rewards.reserve(baselines.episodes);
  for (int i = 0; i < baselines.episodes; ++i) {
    const models::EpisodeRecord record =
        models::rollout(pm, spec, models::ActionMode::map,
                        eval_episode_seed(baselines.seed, i), 0);
    result.rewards.push_back(record.total_reward);
    result.solved += record.goal;
  }
  result.aer = aer(result.rewards);
  result.p = performance_for(spec, result.rewards, baselines);
  return result;
}

}  // namespace ifolab::metrics
