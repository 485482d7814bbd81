#include "ifolab/trainer/trainer.hpp"

#include <algorithm>

#include "ifolab/common/errors.hpp"

namespace ifolab::trainer {

std::string method_label(const FeatureFlags& flags) {
  if (!flags.attention && !flags.sampling && !flags.exploration) return "BCO";
  if (flags.attention && flags.sampling && flags.exploration) return "IUPE";
  std::string label;
  auto add = [&label](const char* part) {
    if (!label.empty()) label += '+';
    label += part;
  };
  if (flags.attention) add("Attention");
  if (flags.sampling) add("Sampling");
  if (flags.exploration) add("Exploration");
  return label;
}

std::vector<FeatureFlags> ablation_grid() {
  return {
      {false, false, false}, {true, false, false}, {false, true, false},
      {false, false, true},  {true, true, false},  {true, false, true},
      {false, true, true},   {true, true, true},
  };
}

void apply_env_defaults(RunConfig& config) {
  const bool maze = config.spec.kind == envs::EnvKind::maze;
  if (config.rollouts == 0) config.rollouts = maze ? 64 : 32;
  if (config.pre_demos == 0) config.pre_demos = maze ? 10000 : 5000;
}

std::vector<models::Transition> generate_pre_demos(const envs::EnvSpec& spec, int size,
                                                   std::uint64_t seed) {
  if (size < 1) throw ConfigError("pre-demo size must be at least 1");
  auto env = envs::make_env(spec);
  std::vector<models::Transition> out;
  out.reserve(size);
  std::uint64_t episode = 0;
  while (static_cast<int>(out.size()) < size) {
    env->reset(mix_seed(seed, streams::rollout_env, episode));
    Rng rng = make_rng(mix_seed(seed, streams::rollout_actions, episode));
    while (!env->done() && static_cast<int>(out.size()) < size) {
      std::vector<double> state = env->state();
      const int action = static_cast<int>(uniform_below(rng, spec.action_count));
      env->step(action);
      out.push_back({std::move(state), action, env->state(), models::Source::pre});
    }
    ++episode;
  }
  return out;
}

namespace {

void check_pairs(const envs::EnvSpec& spec, const experts::StatePairSet& pairs) {
  if (pairs.size() == 0) throw DataError("no expert state pairs");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (static_cast<int>(pairs.first[i].size()) != spec.state_dim ||
        static_cast<int>(pairs.second[i].size()) != spec.state_dim)
      throw DataError("expert pair " + std::to_string(i) + " has state length " +
                      std::to_string(pairs.first[i].size()) + ", but " + spec.name +
                      " encodes " + std::to_string(spec.state_dim) + " values");
  }
}

std::uint64_t cycle_index(int cycle, int episode) {
  return (static_cast<std::uint64_t>(cycle) << 32) |
         static_cast<std::uint64_t>(episode);
}

}  // namespace

RunResult run(const RunConfig& config_in, const experts::StatePairSet& expert_pairs,
              const std::string& baseline_cache_dir,
              const std::function<void(const IterationReport&)>& on_cycle) {
  RunConfig config = config_in;
  apply_env_defaults(config);
  if (config.alpha < 1) throw ConfigError("cycle count must be at least 1");
  if (config.rollouts < 1) throw ConfigError("rollout count must be at least 1");
  if (config.eval_episodes < 1) throw ConfigError("evaluation episode count must be at least 1");
  check_pairs(config.spec, expert_pairs);

  const envs::EnvSpec& spec = config.spec;
  const std::uint64_t seed = config.seed;
  const models::ActionMode mode =
      config.features.exploration ? models::ActionMode::explore : models::ActionMode::map;

  nn::NetConfig net;
  net.hidden = config.hidden;
  net.attention = config.features.attention;
  net.attention_tokens = config.attention_tokens;

  auto init_networks = [&](std::uint64_t round, nn::Network& idm, nn::Network& pm) {
    Rng idm_rng = make_rng(mix_seed(seed, streams::idm_init, round));
    idm = nn::make_network(2 * spec.state_dim, spec.action_count, net, idm_rng);
    Rng pm_rng = make_rng(mix_seed(seed, streams::pm_init, round));
    pm = nn::make_network(spec.state_dim, spec.action_count, net, pm_rng);
  };

  RunResult result;
  init_networks(0, result.idm, result.pm);
  result.baselines = metrics::baselines_for(
      spec, config.eval_episodes, mix_seed(seed, streams::eval_master), baseline_cache_dir);

  std::vector<models::Transition> pre =
      generate_pre_demos(spec, config.pre_demos, mix_seed(seed, streams::pre_demos));
  const std::size_t budget = config.budget ? config.budget : pre.size();

  std::vector<models::Transition> training_set = pre;
  std::vector<models::EpisodeRecord> accumulated;

  for (int cycle = 1; cycle <= config.alpha; ++cycle) {
    try {
      IterationReport it;
      it.cycle = cycle;
      if (config.cold_start && cycle > 1)
        init_networks(static_cast<std::uint64_t>(cycle), result.idm, result.pm);

      Rng idm_rng = make_rng(mix_seed(seed, streams::idm_train, cycle));
      it.idm = models::train_idm(result.idm, training_set, config.idm_hyper, idm_rng);

      Rng label_rng = make_rng(mix_seed(seed, streams::labeling, cycle));
      const std::vector<int> labels =
          models::label_pairs(result.idm, expert_pairs, mode, label_rng);

      Rng pm_rng = make_rng(mix_seed(seed, streams::pm_train, cycle));
      it.pm = models::train_policy(result.pm, expert_pairs, labels, config.pm_hyper, pm_rng);

      std::vector<models::EpisodeRecord> records;
      records.reserve(config.rollouts);
      std::size_t non_map_steps = 0, total_steps = 0;
      for (int e = 0; e < config.rollouts; ++e) {
        records.push_back(models::rollout(
            result.pm, spec, mode,
            mix_seed(seed, streams::rollout_env, cycle_index(cycle, e)),
            mix_seed(seed, streams::rollout_actions, cycle_index(cycle, e))));
        const models::EpisodeRecord& rec = records.back();
        it.success_rate += rec.goal;
        total_steps += rec.non_map.size();
        non_map_steps += std::count(rec.non_map.begin(), rec.non_map.end(), true);
      }
      it.success_rate /= config.rollouts;
      it.non_map_fraction =
          total_steps == 0 ? 0.0 : static_cast<double>(non_map_steps) / total_steps;

      std::span<const models::EpisodeRecord> for_sampling(records);
      if (config.accumulate_post) {
        accumulated.insert(accumulated.end(), records.begin(), records.end());
        for_sampling = accumulated;
      }
      if (config.features.sampling) {
        Rng sample_rng = make_rng(mix_seed(seed, streams::sampler, cycle));
        auto [sampled, report] =
            sampler::build_training_set(pre, for_sampling, spec.action_count, budget,
                                        sample_rng, config.sampling_take_all);
        training_set = std::move(sampled);
        it.sampling = std::move(report);
      } else {
        // Plain iterative rule: retrain on the rollout transitions verbatim.
        training_set.clear();
        it.sampling.episodes = static_cast<int>(for_sampling.size());
        it.sampling.post_counts.assign(spec.action_count, 0);
        it.sampling.pre_counts.assign(spec.action_count, 0);
        for (const models::EpisodeRecord& rec : for_sampling) {
          it.sampling.successes += rec.goal == 1;
          for (const models::Transition& t : rec.transitions) {
            training_set.push_back(t);
            ++it.sampling.post_counts[t.action];
          }
        }
        it.sampling.win_rate =
            static_cast<double>(it.sampling.successes) / it.sampling.episodes;
        it.sampling.total = training_set.size();
      }

      metrics::EvalResult eval = metrics::evaluate_policy(result.pm, spec, result.baselines);
      it.eval_aer = eval.aer;
      it.eval_p = eval.p;
      it.eval_solved = eval.solved;

      if (on_cycle) on_cycle(it);
      result.cycles.push_back(std::move(it));
    } catch (const UsageError&) {
      throw;
    } catch (const NumericError& e) {
      throw NumericError("cycle " + std::to_string(cycle) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("cycle " + std::to_string(cycle) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("cycle " + std::to_string(cycle) + ": " + e.what());
    }
  }
  return result;
}

std::vector<AblationCell> ablate(
    const RunConfig& base, std::span<const std::uint64_t> seeds,
    const experts::StatePairSet& expert_pairs, const std::string& baseline_cache_dir,
    const std::function<void(const AblationCell&)>& on_run) {
  if (seeds.empty()) throw ConfigError("ablation needs at least one seed");
  std::vector<AblationCell> cells;
  cells.reserve(8 * seeds.size());
  for (const FeatureFlags& flags : ablation_grid()) {
    for (const std::uint64_t seed : seeds) {
      RunConfig config = base;
      config.features = flags;
      config.seed = seed;
      const RunResult result = run(config, expert_pairs, baseline_cache_dir);
      AblationCell cell{method_label(flags), seed, result.cycles.back().eval_p,
                        result.cycles.back().eval_aer};
      if (on_run) on_run(cell);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace ifolab::trainer
