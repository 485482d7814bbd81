// Integration tests driving the installed command-line binary end to end.
#include <cstdio>
#include <doctest.h>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "test_util.hpp"

using json = nlohmann::json;
using ifolab::testutil::TempDir;
using ifolab::testutil::read_text;
using ifolab::testutil::write_text;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(IFOLAB_BIN) + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult result;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) result.output.append(buf, n);
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

// Small enough to finish in about a second.
std::string tiny_train_flags(const std::string& out, int seed) {
  return "--env cartpole --seed " + std::to_string(seed) +
         " --alpha 2 --pre-demos 150 --rollouts 3 --idm-epochs 2 --pm-epochs 2"
         " --eval-episodes 4 --hidden 8 --tokens 2 --quiet --out " + out;
}

std::vector<json> parse_jsonl(const std::string& path) {
  std::vector<json> records;
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) records.push_back(json::parse(line));
  return records;
}

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("no-such-command").exit_code == 1);

  const CliResult bad_env = run_cli("gen-demos --env marscolony");
  CHECK(bad_env.exit_code == 1);
  CHECK(bad_env.output.find("unknown environment") != std::string::npos);

  CHECK(run_cli("train").exit_code == 1);    // no environment
  CHECK(run_cli("evaluate --env cartpole").exit_code == 1);  // no checkpoint
  CHECK(run_cli("report").exit_code == 1);   // no input files

  const CliResult zero_demos = run_cli("gen-demos --env cartpole --n 0");
  CHECK(zero_demos.exit_code == 1);
  CHECK(zero_demos.output.find("episode count") != std::string::npos);
  CHECK(run_cli("evaluate --env cartpole --checkpoint x.ckpt --n 0").exit_code == 1);
}

TEST_CASE("shipped random-policy checkpoint scores near the random baseline") {
  TempDir dir("cli-anchor");
  const std::string ckpt = std::string(IFOLAB_ASSETS) + "/pm-cartpole-random.ckpt";
  REQUIRE(std::filesystem::exists(ckpt));
  const CliResult result = run_cli("evaluate --env cartpole --checkpoint " + ckpt +
                                   " --seed 0 --out " + dir.root().string());
  REQUIRE(result.exit_code == 0);

  const json report = json::parse(read_text(dir.path("eval-cartpole-s0.json")));
  const double p = report.at("p").get<double>();
  CHECK(std::abs(p) <= 0.1);
}

TEST_CASE("gen-demos writes byte-identical files on reruns") {
  TempDir dir("cli-gen");
  const std::string flags = "gen-demos --env cartpole --n 3 --seed 7 --quiet --out " +
                            dir.root().string();
  const CliResult first = run_cli(flags);
  REQUIRE(first.exit_code == 0);
  const std::string path = dir.path("demos-cartpole-n3-s7.txt");
  REQUIRE(std::filesystem::exists(path));
  const std::string bytes = read_text(path);
  CHECK(!bytes.empty());

  const CliResult second = run_cli(flags);
  REQUIRE(second.exit_code == 0);
  CHECK(read_text(path) == bytes);
  CHECK(first.output == second.output);
}

TEST_CASE("train produces a complete run report and checkpoints") {
  TempDir dir("cli-train");
  const std::string out = dir.root().string();
  const CliResult result = run_cli("train " + tiny_train_flags(out, 3));
  REQUIRE(result.exit_code == 0);

  REQUIRE(std::filesystem::exists(dir.path("run-cartpole-IUPE-s3.jsonl")));
  CHECK(std::filesystem::exists(dir.path("pm-cartpole-IUPE-s3.ckpt")));
  CHECK(std::filesystem::exists(dir.path("idm-cartpole-IUPE-s3.ckpt")));

  const auto records = parse_jsonl(dir.path("run-cartpole-IUPE-s3.jsonl"));
  REQUIRE(records.size() == 4);  // config + 2 cycles + summary
  CHECK(records.front().at("type") == "config");
  CHECK(records.front().at("method") == "IUPE");
  CHECK(records.front().at("env") == "cartpole");
  CHECK(records.front().at("alpha") == 2);
  CHECK(records.front().at("seed") == 3);
  for (int c = 1; c <= 2; ++c) {
    CHECK(records[c].at("type") == "cycle");
    CHECK(records[c].at("cycle") == c);
    CHECK(records[c].contains("non_map_fraction"));
    CHECK(records[c].at("sampling").contains("win_rate"));
  }
  CHECK(records.back().at("type") == "summary");
  CHECK(records.back().contains("final_aer"));
  CHECK(records.back().contains("wall_clock_s"));
  CHECK(records.back().at("baselines").contains("random_aer"));
}

TEST_CASE("identical train invocations reproduce everything but the wall clock") {
  TempDir a("cli-repro-a"), b("cli-repro-b");
  REQUIRE(run_cli("train " + tiny_train_flags(a.root().string(), 5)).exit_code == 0);
  REQUIRE(run_cli("train " + tiny_train_flags(b.root().string(), 5)).exit_code == 0);

  const auto ra = parse_jsonl(a.path("run-cartpole-IUPE-s5.jsonl"));
  const auto rb = parse_jsonl(b.path("run-cartpole-IUPE-s5.jsonl"));
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 0; i + 1 < ra.size(); ++i) CHECK(ra[i] == rb[i]);
  json sa = ra.back(), sb = rb.back();
  sa.erase("wall_clock_s");
  sb.erase("wall_clock_s");
  CHECK(sa == sb);

  CHECK(read_text(a.path("pm-cartpole-IUPE-s5.ckpt")) ==
        read_text(b.path("pm-cartpole-IUPE-s5.ckpt")));
}

TEST_CASE("feature flags flow into the method label and report") {
  TempDir dir("cli-flags");
  const std::string out = dir.root().string();
  const CliResult result =
      run_cli("train " + tiny_train_flags(out, 2) +
              " --no-attention --no-sampling --no-exploration");
  REQUIRE(result.exit_code == 0);
  const auto records = parse_jsonl(dir.path("run-cartpole-BCO-s2.jsonl"));
  CHECK(records.front().at("method") == "BCO");
  CHECK(records.front().at("attention") == false);
  CHECK(records.front().at("sampling") == false);
  CHECK(records.front().at("exploration") == false);
  for (std::size_t i = 1; i + 1 < records.size(); ++i)
    CHECK(records[i].at("non_map_fraction") == 0.0);
}

TEST_CASE("evaluate is deterministic and validates the checkpoint") {
  TempDir dir("cli-eval");
  const std::string out = dir.root().string();
  REQUIRE(run_cli("train " + tiny_train_flags(out, 4)).exit_code == 0);
  const std::string ckpt = dir.path("pm-cartpole-IUPE-s4.ckpt");

  const std::string eval_flags =
      "evaluate --env cartpole --checkpoint " + ckpt + " --n 10 --seed 9 --out " + out;
  const CliResult first = run_cli(eval_flags);
  REQUIRE(first.exit_code == 0);
  CHECK(first.output.find("AER ") != std::string::npos);
  CHECK(first.output.find(" P ") != std::string::npos);
  const CliResult second = run_cli(eval_flags);
  CHECK(second.output == first.output);
  CHECK(std::filesystem::exists(dir.path("eval-cartpole-s9.json")));

  // dimension mismatch is a data error: exit 2
  const CliResult wrong = run_cli("evaluate --env maze3 --checkpoint " + ckpt +
                                  " --out " + out);
  CHECK(wrong.exit_code == 2);
  CHECK(wrong.output.find("maze3") != std::string::npos);

  CHECK(run_cli("evaluate --env cartpole --checkpoint " + dir.path("absent.ckpt") +
                " --out " + out)
            .exit_code == 2);
}

TEST_CASE("train reads demonstrations from a file and rejects mismatches") {
  TempDir dir("cli-demo-file");
  const std::string out = dir.root().string();
  REQUIRE(run_cli("gen-demos --env cartpole --n 3 --seed 1 --quiet --out " + out)
              .exit_code == 0);
  const std::string demos = dir.path("demos-cartpole-n3-s1.txt");

  const CliResult ok = run_cli("train " + tiny_train_flags(out, 8) + " --demos " + demos);
  CHECK(ok.exit_code == 0);

  const CliResult mismatch =
      run_cli("train --env mountaincar --demos " + demos + " --alpha 1 --out " + out);
  CHECK(mismatch.exit_code == 2);
  CHECK(mismatch.output.find("cartpole") != std::string::npos);

  CHECK(run_cli("train " + tiny_train_flags(out, 8) + " --demos " + dir.path("no.txt"))
            .exit_code == 2);
}

TEST_CASE("config file values apply under command-line overrides") {
  TempDir dir("cli-config");
  const std::string out = dir.root().string();
  const std::string cfg = dir.path("cfg.json");
  write_text(cfg, R"({"alpha": 2, "seed": 12, "pre_demos": 150, "rollouts": 3,
                      "idm_epochs": 2, "pm_epochs": 2, "eval_episodes": 4,
                      "hidden": [8], "tokens": 2, "quiet": true})");
  const CliResult result =
      run_cli("train --env cartpole --config " + cfg + " --alpha 1 --out " + out);
  REQUIRE(result.exit_code == 0);
  const auto records = parse_jsonl(dir.path("run-cartpole-IUPE-s12.jsonl"));
  CHECK(records.front().at("alpha") == 1);       // flag beat the file
  CHECK(records.front().at("seed") == 12);       // file beat the default
  CHECK(records.front().at("pre_demos") == 150);

  write_text(cfg, R"({"alpha": )");
  CHECK(run_cli("train --env cartpole --config " + cfg + " --out " + out).exit_code == 2);
  write_text(cfg, R"({"alfalfa": 3})");
  const CliResult unknown =
      run_cli("train --env cartpole --config " + cfg + " --out " + out);
  CHECK(unknown.exit_code == 2);
  CHECK(unknown.output.find("alfalfa") != std::string::npos);
}

TEST_CASE("ablate emits the full combination grid as CSV") {
  TempDir dir("cli-ablate");
  const std::string out = dir.root().string();
  const CliResult result = run_cli(
      "ablate --env cartpole --seeds 1,2 --alpha 1 --pre-demos 120 --rollouts 2"
      " --idm-epochs 1 --pm-epochs 1 --eval-episodes 3 --hidden 8 --tokens 2"
      " --quiet --out " + out);
  REQUIRE(result.exit_code == 0);

  const std::string csv = read_text(dir.path("ablation-cartpole.csv"));
  std::istringstream in(csv);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 1 + 16 + 8);  // header, 8 combos x 2 seeds, 8 means
  CHECK(lines[0] == "combination,seed,P,AER");
  CHECK(lines[1].rfind("BCO,1,", 0) == 0);
  CHECK(lines[2].rfind("BCO,2,", 0) == 0);
  CHECK(lines[3].rfind("Attention,1,", 0) == 0);
  CHECK(lines[16].rfind("IUPE,2,", 0) == 0);
  CHECK(lines[17].rfind("BCO,mean,", 0) == 0);
  CHECK(lines[24].rfind("IUPE,mean,", 0) == 0);
}

TEST_CASE("report aggregates run files into summary and series tables") {
  TempDir dir("cli-report");
  const std::string out = dir.root().string();
  REQUIRE(run_cli("train " + tiny_train_flags(out, 1)).exit_code == 0);
  REQUIRE(run_cli("train " + tiny_train_flags(out, 2) + " --no-attention --no-sampling"
                  " --no-exploration").exit_code == 0);

  const CliResult result =
      run_cli("report --out " + out + " " + dir.path("run-cartpole-IUPE-s1.jsonl") +
              " " + dir.path("run-cartpole-BCO-s2.jsonl"));
  REQUIRE(result.exit_code == 0);
  CHECK(result.output.find("BCO") != std::string::npos);
  CHECK(result.output.find("IUPE") != std::string::npos);

  const std::string summary = read_text(dir.path("report-summary.csv"));
  std::istringstream sin(summary);
  std::vector<std::string> slines;
  std::string line;
  while (std::getline(sin, line)) slines.push_back(line);
  REQUIRE(slines.size() == 1 + 2 + 2);  // header, 2 runs, 2 method means
  CHECK(slines[0] == "method,seed,P,AER");

  const std::string series = read_text(dir.path("report-series.csv"));
  std::istringstream tin(series);
  int series_rows = -1;  // don't count the header
  while (std::getline(tin, line)) ++series_rows;
  CHECK(series_rows == 4);  // two runs of alpha = 2 cycles

  CHECK(run_cli("report --out " + out + " " + dir.path("nothing.jsonl")).exit_code == 2);
}
