// Experiment front-end: demo generation, training, evaluation, ablation,
// and report aggregation over the run-report files.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ifolab/common/errors.hpp"
#include "ifolab/common/text_io.hpp"
#include "ifolab/experts/expert.hpp"
#include "ifolab/metrics/metrics.hpp"
#include "ifolab/trainer/trainer.hpp"

using nlohmann::json;
using namespace ifolab;

namespace {

struct Opts {
  std::uint64_t seed = 0;
  std::string config;
  std::string out = "out";
  bool quiet = false;

  std::string env;
  std::string demos;
  std::string checkpoint;
  int n = -1;  // -1: not given, use the command's default

  int alpha = 20;
  int rollouts = 0;
  int pre_demos = 0;
  long long budget = 0;
  int idm_epochs = 20, pm_epochs = 20, batch = 64;
  double lr = 1e-3;
  std::vector<int> hidden = {64, 64};
  int tokens = 4;
  bool attention = true, sampling = true, exploration = true;
  bool cold_start = false, accumulate_post = false, take_all = false;
  int eval_episodes = 100;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> inputs;
};

// Resolves the environment name, treating a bad name on the command line as
// a usage mistake rather than a data problem.
envs::EnvSpec parse_env(const std::string& name) {
  if (name.empty()) throw UsageError("no environment given (use --env)");
  try {
    return envs::spec_from_name(name);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

void apply_config_file(Opts& opts) {
  if (opts.config.empty()) return;
  json cfg;
  try {
    cfg = json::parse(read_file(opts.config));
  } catch (const json::exception& e) {
    throw ConfigError(opts.config + ": " + e.what());
  }
  if (!cfg.is_object()) throw ConfigError(opts.config + ": expected a JSON object");
  try {
    for (const auto& [key, value] : cfg.items()) {
      if (key == "seed") opts.seed = value.get<std::uint64_t>();
      else if (key == "out") opts.out = value.get<std::string>();
      else if (key == "quiet") opts.quiet = value.get<bool>();
      else if (key == "env") opts.env = value.get<std::string>();
      else if (key == "demos") opts.demos = value.get<std::string>();
      else if (key == "checkpoint") opts.checkpoint = value.get<std::string>();
      else if (key == "n") opts.n = value.get<int>();
      else if (key == "alpha") opts.alpha = value.get<int>();
      else if (key == "rollouts") opts.rollouts = value.get<int>();
      else if (key == "pre_demos") opts.pre_demos = value.get<int>();
      else if (key == "budget") opts.budget = value.get<long long>();
      else if (key == "idm_epochs") opts.idm_epochs = value.get<int>();
      else if (key == "pm_epochs") opts.pm_epochs = value.get<int>();
      else if (key == "batch") opts.batch = value.get<int>();
      else if (key == "lr") opts.lr = value.get<double>();
      else if (key == "hidden") opts.hidden = value.get<std::vector<int>>();
      else if (key == "tokens") opts.tokens = value.get<int>();
      else if (key == "attention") opts.attention = value.get<bool>();
      else if (key == "sampling") opts.sampling = value.get<bool>();
      else if (key == "exploration") opts.exploration = value.get<bool>();
      else if (key == "cold_start") opts.cold_start = value.get<bool>();
      else if (key == "accumulate_post") opts.accumulate_post = value.get<bool>();
      else if (key == "take_all") opts.take_all = value.get<bool>();
      else if (key == "eval_episodes") opts.eval_episodes = value.get<int>();
      else if (key == "seeds") opts.seeds = value.get<std::vector<std::uint64_t>>();
      else throw ConfigError(opts.config + ": unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(opts.config + ": " + e.what());
  }
}

trainer::RunConfig make_run_config(const Opts& opts, const envs::EnvSpec& spec) {
  trainer::RunConfig config;
  config.spec = spec;
  config.alpha = opts.alpha;
  config.rollouts = opts.rollouts;
  config.pre_demos = opts.pre_demos;
  if (opts.budget < 0) throw UsageError("budget must be non-negative");
  config.budget = static_cast<std::size_t>(opts.budget);
  config.idm_hyper = {opts.idm_epochs, opts.batch, opts.lr};
  config.pm_hyper = {opts.pm_epochs, opts.batch, opts.lr};
  config.hidden = opts.hidden;
  config.attention_tokens = opts.tokens;
  config.features = {opts.attention, opts.sampling, opts.exploration};
  config.seed = opts.seed;
  config.cold_start = opts.cold_start;
  config.accumulate_post = opts.accumulate_post;
  config.sampling_take_all = opts.take_all;
  config.eval_episodes = opts.eval_episodes;
  return config;
}

int default_demo_episodes(const envs::EnvSpec& spec) {
  return spec.kind == envs::EnvKind::maze ? 100 : 10;
}

// Loads pairs from --demos, or records the default budget in memory.
experts::StatePairSet demo_pairs(const Opts& opts, const envs::EnvSpec& spec,
                                 std::string& origin) {
  if (!opts.demos.empty()) {
    const experts::DemoFile file = experts::read_demos(opts.demos);
    if (file.env_name != spec.name)
      throw DataError(opts.demos + ": holds " + file.env_name +
                      " demonstrations, but the run is for " + spec.name);
    origin = opts.demos;
    return experts::make_pairs(file.trajectories);
  }
  const int episodes = default_demo_episodes(spec);
  origin = "recorded in-process (" + std::to_string(episodes) + " episodes, seed " +
           std::to_string(opts.seed) + ")";
  return experts::make_pairs(experts::record_demonstrations(spec, episodes, opts.seed));
}

json config_echo(const trainer::RunConfig& config, const std::string& demo_origin,
                 std::size_t pair_count) {
  return json{{"type", "config"},
              {"format", "ifolab-run v1"},
              {"env", config.spec.name},
              {"method", trainer::method_label(config.features)},
              {"seed", config.seed},
              {"alpha", config.alpha},
              {"rollouts", config.rollouts},
              {"pre_demos", config.pre_demos},
              {"budget", config.budget},
              {"idm_epochs", config.idm_hyper.epochs},
              {"pm_epochs", config.pm_hyper.epochs},
              {"batch", config.idm_hyper.batch},
              {"lr", config.idm_hyper.lr},
              {"hidden", config.hidden},
              {"tokens", config.attention_tokens},
              {"attention", config.features.attention},
              {"sampling", config.features.sampling},
              {"exploration", config.features.exploration},
              {"cold_start", config.cold_start},
              {"accumulate_post", config.accumulate_post},
              {"take_all", config.sampling_take_all},
              {"eval_episodes", config.eval_episodes},
              {"demos", demo_origin},
              {"demo_pairs", pair_count}};
}

json cycle_record(const trainer::IterationReport& it) {
  return json{{"type", "cycle"},
              {"cycle", it.cycle},
              {"idm_loss", it.idm.loss},
              {"idm_accuracy", it.idm.accuracy},
              {"pm_loss", it.pm.loss},
              {"pm_accuracy", it.pm.accuracy},
              {"success_rate", it.success_rate},
              {"non_map_fraction", it.non_map_fraction},
              {"eval_aer", it.eval_aer},
              {"eval_p", it.eval_p},
              {"eval_solved", it.eval_solved},
              {"sampling",
               {{"successes", it.sampling.successes},
                {"episodes", it.sampling.episodes},
                {"win_rate", it.sampling.win_rate},
                {"printed", it.sampling.printed},
                {"normalized", it.sampling.normalized},
                {"post_counts", it.sampling.post_counts},
                {"pre_counts", it.sampling.pre_counts},
                {"total", it.sampling.total},
                {"fallback", it.sampling.fallback},
                {"redistributed_post", it.sampling.redistributed_post},
                {"redistributed_pre", it.sampling.redistributed_pre}}}};
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

int cmd_gen_demos(const Opts& opts) {
  const envs::EnvSpec spec = parse_env(opts.env);
  if (opts.n != -1 && opts.n < 1) throw UsageError("episode count must be positive");
  const int episodes = opts.n == -1 ? default_demo_episodes(spec) : opts.n;
  const auto demos = experts::record_demonstrations(spec, episodes, opts.seed);
  const std::string path = opts.out + "/demos-" + spec.name + "-n" +
                           std::to_string(episodes) + "-s" + std::to_string(opts.seed) +
                           ".txt";
  experts::write_demos(path, spec, demos);
  double aer = 0;
  for (const auto& t : demos) aer += t.reward;
  aer /= demos.size();
  if (!opts.quiet)
    std::cout << "recorded " << demos.size() << " demonstrations (expert AER "
              << csv_num(aer) << ")\n";
  std::cout << path << "\n";
  return 0;
}

int cmd_train(const Opts& opts) {
  const envs::EnvSpec spec = parse_env(opts.env);
  std::string demo_origin;
  const experts::StatePairSet pairs = demo_pairs(opts, spec, demo_origin);
  std::vector<std::uint64_t> seeds = opts.seeds;
  if (seeds.empty()) seeds.push_back(opts.seed);

  for (const std::uint64_t seed : seeds) {
    Opts seeded = opts;
    seeded.seed = seed;
    trainer::RunConfig config = make_run_config(seeded, spec);
    trainer::apply_env_defaults(config);
    const std::string label = trainer::method_label(config.features);
    const std::string stem =
        spec.name + "-" + label + "-s" + std::to_string(seed);

    std::ostringstream report;
    report << config_echo(config, demo_origin, pairs.size()).dump() << '\n';
    const auto t0 = std::chrono::steady_clock::now();
    const trainer::RunResult result =
        trainer::run(config, pairs, opts.out, [&](const trainer::IterationReport& it) {
          report << cycle_record(it).dump() << '\n';
          if (!opts.quiet)
            std::cout << stem << " cycle " << it.cycle << "/" << config.alpha
                      << ": idm acc " << csv_num(it.idm.accuracy) << ", success "
                      << csv_num(it.success_rate) << ", eval AER " << csv_num(it.eval_aer)
                      << ", P " << csv_num(it.eval_p) << "\n";
        });
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const trainer::IterationReport& last = result.cycles.back();
    report << json{{"type", "summary"},
                   {"final_aer", last.eval_aer},
                   {"final_p", last.eval_p},
                   {"final_solved", last.eval_solved},
                   {"cycles", config.alpha},
                   {"wall_clock_s", wall},
                   {"baselines",
                    {{"random_aer", result.baselines.random_aer},
                     {"expert_aer", result.baselines.expert_aer},
                     {"episodes", result.baselines.episodes},
                     {"seed", result.baselines.seed}}}}
                  .dump()
           << '\n';
    atomic_write_file(opts.out + "/run-" + stem + ".jsonl", report.str());
    nn::save_network(result.pm, opts.out + "/pm-" + stem + ".ckpt");
    nn::save_network(result.idm, opts.out + "/idm-" + stem + ".ckpt");
    std::cout << stem << ": final AER " << csv_num(last.eval_aer) << ", P "
              << csv_num(last.eval_p) << " (" << opts.out << "/run-" << stem
              << ".jsonl)\n";
  }
  return 0;
}

int cmd_evaluate(const Opts& opts) {
  const envs::EnvSpec spec = parse_env(opts.env);
  if (opts.checkpoint.empty()) throw UsageError("no checkpoint given (use --checkpoint)");
  if (opts.n != -1 && opts.n < 1) throw UsageError("episode count must be positive");
  const int n = opts.n == -1 ? 100 : opts.n;
  const nn::Network pm = nn::load_network(opts.checkpoint);
  if (pm.input_dim() != spec.state_dim || pm.output_dim() != spec.action_count)
    throw DataError(opts.checkpoint + ": network is " + std::to_string(pm.input_dim()) +
                    "->" + std::to_string(pm.output_dim()) + ", but " + spec.name +
                    " needs " + std::to_string(spec.state_dim) + "->" +
                    std::to_string(spec.action_count));
  const metrics::BaselinePair baselines = metrics::baselines_for(
      spec, n, mix_seed(opts.seed, streams::eval_master), opts.out);
  const metrics::EvalResult eval = metrics::evaluate_policy(pm, spec, baselines);
  std::cout << "AER " << csv_num(eval.aer) << " P " << csv_num(eval.p) << "\n";
  const json record{{"type", "evaluation"},
                    {"env", spec.name},
                    {"checkpoint", opts.checkpoint},
                    {"episodes", n},
                    {"seed", opts.seed},
                    {"aer", eval.aer},
                    {"p", eval.p},
                    {"solved", eval.solved},
                    {"rewards", eval.rewards}};
  atomic_write_file(opts.out + "/eval-" + spec.name + "-s" + std::to_string(opts.seed) +
                        ".json",
                    record.dump(2) + "\n");
  return 0;
}

int cmd_ablate(const Opts& opts) {
  const envs::EnvSpec spec = parse_env(opts.env);
  std::string demo_origin;
  const experts::StatePairSet pairs = demo_pairs(opts, spec, demo_origin);
  std::vector<std::uint64_t> seeds = opts.seeds;
  if (seeds.empty()) seeds.push_back(opts.seed);

  trainer::RunConfig base = make_run_config(opts, spec);
  const auto cells = trainer::ablate(
      base, seeds, pairs, opts.out, [&](const trainer::AblationCell& cell) {
        if (!opts.quiet)
          std::cout << cell.label << " s" << cell.seed << ": P " << csv_num(cell.p)
                    << ", AER " << csv_num(cell.aer) << "\n";
      });

  std::ostringstream csv;
  csv << "combination,seed,P,AER\n";
  for (const auto& cell : cells)
    csv << cell.label << ',' << cell.seed << ',' << csv_num(cell.p) << ','
        << csv_num(cell.aer) << '\n';
  for (const trainer::FeatureFlags& flags : trainer::ablation_grid()) {
    const std::string label = trainer::method_label(flags);
    double p = 0, aer = 0;
    int count = 0;
    for (const auto& cell : cells)
      if (cell.label == label) {
        p += cell.p;
        aer += cell.aer;
        ++count;
      }
    csv << label << ",mean," << csv_num(p / count) << ',' << csv_num(aer / count) << '\n';
  }
  const std::string path = opts.out + "/ablation-" + spec.name + ".csv";
  atomic_write_file(path, csv.str());
  std::cout << path << "\n";
  return 0;
}

int cmd_report(const Opts& opts) {
  if (opts.inputs.empty()) throw UsageError("no run-report files given");
  struct Row {
    std::string method;
    std::uint64_t seed;
    double p, aer;
    std::vector<json> cycles;
  };
  std::vector<Row> rows;
  for (const std::string& path : opts.inputs) {
    std::istringstream in(read_file(path));
    std::string line;
    Row row{};
    bool have_config = false, have_summary = false;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      json record;
      try {
        record = json::parse(line);
      } catch (const json::exception& e) {
        throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
      }
      const std::string type = record.value("type", "");
      if (type == "config") {
        row.method = record.value("method", "?");
        row.seed = record.value("seed", std::uint64_t{0});
        have_config = true;
      } else if (type == "cycle") {
        row.cycles.push_back(record);
      } else if (type == "summary") {
        row.p = record.value("final_p", 0.0);
        row.aer = record.value("final_aer", 0.0);
        have_summary = true;
      }
    }
    if (!have_config || !have_summary)
      throw DataError(path + ": not a complete run report");
    rows.push_back(std::move(row));
  }

  // method means, in the fixed grid order first
  std::vector<std::string> order;
  for (const trainer::FeatureFlags& flags : trainer::ablation_grid())
    order.push_back(trainer::method_label(flags));
  for (const Row& row : rows)
    if (std::find(order.begin(), order.end(), row.method) == order.end())
      order.push_back(row.method);

  std::ostringstream table, summary_csv, series_csv;
  table << "method                     runs          P        AER\n";
  summary_csv << "method,seed,P,AER\n";
  series_csv << "method,seed,cycle,success_rate,non_map_fraction,eval_aer,eval_p\n";
  for (const Row& row : rows) {
    summary_csv << row.method << ',' << row.seed << ',' << csv_num(row.p) << ','
                << csv_num(row.aer) << '\n';
    for (const json& c : row.cycles)
      series_csv << row.method << ',' << row.seed << ',' << c.value("cycle", 0) << ','
                 << csv_num(c.value("success_rate", 0.0)) << ','
                 << csv_num(c.value("non_map_fraction", 0.0)) << ','
                 << csv_num(c.value("eval_aer", 0.0)) << ','
                 << csv_num(c.value("eval_p", 0.0)) << '\n';
  }
  for (const std::string& method : order) {
    double p = 0, aer = 0;
    int count = 0;
    for (const Row& row : rows)
      if (row.method == method) {
        p += row.p;
        aer += row.aer;
        ++count;
      }
    if (count == 0) continue;
    summary_csv << method << ",mean," << csv_num(p / count) << ',' << csv_num(aer / count)
                << '\n';
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-26s %4d %10.3f %10.3f\n", method.c_str(), count,
                  p / count, aer / count);
    table << buf;
  }
  std::cout << table.str();
  atomic_write_file(opts.out + "/report-summary.csv", summary_csv.str());
  atomic_write_file(opts.out + "/report-series.csv", series_csv.str());
  if (!opts.quiet)
    std::cout << opts.out << "/report-summary.csv\n" << opts.out << "/report-series.csv\n";
  return 0;
}

int run_cli(int argc, char** argv) {
  Opts opts;

  // First pass: pull out --config so file values become defaults that
  // command-line flags then override.
  {
    CLI::App pre;
    pre.allow_extras();
    pre.set_help_flag();
    pre.add_option("--config", opts.config);
    try {
      pre.parse(argc, argv);
    } catch (const CLI::ParseError&) {
      // real errors resurface in the main parse
    }
    apply_config_file(opts);
  }

  CLI::App app{"imitation-from-observation laboratory"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", opts.seed, "master seed");
  app.add_option("--config", opts.config, "JSON config file (flags override it)");
  app.add_option("--out", opts.out, "output directory");
  app.add_flag("--quiet", opts.quiet, "suppress progress output");

  auto add_run_options = [&opts](CLI::App* cmd) {
    cmd->add_option("--env", opts.env, "environment name");
    cmd->add_option("--demos", opts.demos, "demonstration file (default: record in-process)");
    cmd->add_option("--seeds", opts.seeds, "run seeds")->delimiter(',');
    cmd->add_option("--alpha", opts.alpha, "improvement cycles");
    cmd->add_option("--rollouts", opts.rollouts, "rollout episodes per cycle");
    cmd->add_option("--pre-demos", opts.pre_demos, "random pre-demonstration transitions");
    cmd->add_option("--budget", opts.budget, "resampled training-set size");
    cmd->add_option("--idm-epochs", opts.idm_epochs, "IDM epochs per cycle");
    cmd->add_option("--pm-epochs", opts.pm_epochs, "policy epochs per cycle");
    cmd->add_option("--batch", opts.batch, "minibatch size");
    cmd->add_option("--lr", opts.lr, "Adam learning rate");
    cmd->add_option("--hidden", opts.hidden, "hidden layer widths")->delimiter(',');
    cmd->add_option("--tokens", opts.tokens, "attention tokens per hidden layer");
    cmd->add_option("--eval-episodes", opts.eval_episodes, "evaluation episodes per cycle");
    cmd->add_flag("--attention,!--no-attention", opts.attention, "gated attention blocks");
    cmd->add_flag("--sampling,!--no-sampling", opts.sampling, "goal-aware resampling");
    cmd->add_flag("--exploration,!--no-exploration", opts.exploration, "softmax action sampling");
    cmd->add_flag_callback(
        "--all-features",
        [&opts] { opts.attention = opts.sampling = opts.exploration = true; },
        "enable attention, sampling, and exploration");
    cmd->add_flag("--cold-start", opts.cold_start, "reinitialize networks every cycle");
    cmd->add_flag("--accumulate-post", opts.accumulate_post,
                  "resample from all cycles' rollouts");
    cmd->add_flag("--take-all-samples", opts.take_all,
                  "keep every successful transition instead of drawing");
  };

  CLI::App* gen = app.add_subcommand("gen-demos", "record expert demonstrations");
  gen->add_option("--env", opts.env, "environment name");
  gen->add_option("--n", opts.n, "episodes to record");

  CLI::App* train = app.add_subcommand("train", "run the improvement loop");
  add_run_options(train);

  CLI::App* evaluate = app.add_subcommand("evaluate", "score a policy checkpoint");
  evaluate->add_option("--env", opts.env, "environment name");
  evaluate->add_option("--checkpoint", opts.checkpoint, "policy checkpoint file");
  evaluate->add_option("--n", opts.n, "evaluation episodes (default 100)");

  CLI::App* ablate = app.add_subcommand("ablate", "run all 8 feature combinations");
  add_run_options(ablate);

  CLI::App* report = app.add_subcommand("report", "aggregate run-report files");
  report->add_option("files", opts.inputs, "run-report .jsonl files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  std::filesystem::create_directories(opts.out);
  if (gen->parsed()) return cmd_gen_demos(opts);
  if (train->parsed()) return cmd_train(opts);
  if (evaluate->parsed()) return cmd_evaluate(opts);
  if (ablate->parsed()) return cmd_ablate(opts);
  if (report->parsed()) return cmd_report(opts);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
