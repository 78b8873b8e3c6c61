#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cpr/config.hpp"

using namespace cpr;

namespace {

std::filesystem::path work_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "cpr_cli_test";
  return dir;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// the cpr binary path arrives via environment (set by ctest)
std::string cpr_bin() {
  const char* bin = std::getenv("CPR_BIN");
  return bin ? bin : "";
}

int run_cli(const std::string& args) {
  const std::string cmd = cpr_bin() + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

}  // namespace

TEST_CASE("config defaults round trip through json") {
  const RunConfig defaults;
  const std::string text = defaults.to_json();
  const RunConfig parsed = RunConfig::from_json_text(text);
  CHECK(parsed.to_json() == text);

  // empty document resolves to pure defaults
  const RunConfig empty = RunConfig::from_json_text("{}");
  CHECK(empty.to_json() == text);
}

TEST_CASE("unknown keys are rejected by name") {
  CHECK_THROWS_WITH_AS(RunConfig::from_json_text(R"({"train": {"warmup": 5}})"),
                       doctest::Contains("train.warmup"), ConfigError);
  CHECK_THROWS_WITH_AS(RunConfig::from_json_text(R"({"nonsense": 1})"),
                       doctest::Contains("nonsense"), ConfigError);
  CHECK_THROWS_WITH_AS(RunConfig::from_json_text(R"({"data": {"classes": 4}})"),
                       doctest::Contains("data.classes"), ConfigError);
}

TEST_CASE("bad values fail before any compute with the key named") {
  CHECK_THROWS_WITH_AS(RunConfig::from_json_text(R"({"train": {"lambda": "x"}})"),
                       doctest::Contains("lambda"), ConfigError);
  CHECK_THROWS_WITH_AS(RunConfig::from_json_text(R"({"data": {"dim": 1}})"),
                       doctest::Contains("data.dim"), ConfigError);
  CHECK_THROWS_WITH_AS(RunConfig::from_json_text(R"({"train": {"warmup_iters": 99, "total_iters": 5}})"),
                       doctest::Contains("warmup"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text("not json"), ParseError);
}

TEST_CASE("config fields land in the right structs") {
  const RunConfig cfg = RunConfig::from_json_text(R"({
    "data": {"n_common": 4, "n_tgt_private": 7, "noise_std": 0.4},
    "train": {"lambda": 0.3, "disable_split": true, "batch_size": 12},
    "optim": {"learning_rate": 0.05},
    "model": {"hidden_dims": [32, 16], "feature_dim": 24}
  })");
  CHECK(cfg.split.n_common == 4);
  CHECK(cfg.split.n_tgt_private == 7);
  CHECK(cfg.shift.noise_std == 0.4);
  CHECK(cfg.train.lambda == 0.3);
  CHECK(cfg.train.ablation.disable_split);
  CHECK(cfg.train.batch_size == 12);
  CHECK(cfg.train.optim.learning_rate == 0.05);
  CHECK(cfg.train.hidden_dims == std::vector<int>{32, 16});
  CHECK(cfg.train.feature_dim == 24);
}

TEST_CASE("cli end to end: gen-data, train, eval, resume") {
  if (cpr_bin().empty()) {
    MESSAGE("CPR_BIN not set; skipping CLI integration");
    return;
  }
  const auto dir = work_dir();
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto cfg_path = dir / "cfg.json";
  {
    std::ofstream out(cfg_path);
    out << R"({
      "data": {"n_common": 3, "n_src_private": 1, "n_tgt_private": 2,
               "dim": 8, "samples_per_class": 12},
      "model": {"hidden_dims": [16], "feature_dim": 8},
      "train": {"total_iters": 40, "warmup_iters": 10, "batch_size": 8,
                "eval_interval": 10}
    })";
  }
  const std::string cfg = " --config " + cfg_path.string();
  const std::string data = (dir / "data").string();

  REQUIRE(run_cli("gen-data" + cfg + " --out " + data) == 0);
  CHECK(std::filesystem::exists(data + "/source.csv"));
  CHECK(std::filesystem::exists(data + "/target_train.csv"));
  CHECK(std::filesystem::exists(data + "/target_eval.csv"));
  CHECK(std::filesystem::exists(data + "/metadata.json"));
  CHECK(std::filesystem::exists(data + "/resolved_config.json"));

  const std::string run1 = (dir / "run1").string();
  const std::string run2 = (dir / "run2").string();
  REQUIRE(run_cli("train" + cfg + " --data " + data + " --out " + run1) == 0);
  REQUIRE(run_cli("train" + cfg + " --data " + data + " --out " + run2) == 0);
  CHECK(std::filesystem::exists(run1 + "/checkpoint.bin"));
  CHECK(std::filesystem::exists(run1 + "/checkpoint.json"));
  CHECK(std::filesystem::exists(run1 + "/resolved_config.json"));

  // identical config + seed -> byte-identical metrics logs
  CHECK(read_file(run1 + "/metrics.jsonl") == read_file(run2 + "/metrics.jsonl"));

  // a different seed changes the log
  const std::string run3 = (dir / "run3").string();
  REQUIRE(run_cli("train" + cfg + " --data " + data + " --out " + run3 + " --seed 9") == 0);
  CHECK(read_file(run1 + "/metrics.jsonl") != read_file(run3 + "/metrics.jsonl"));

  // resolved config embeds the seed override
  const auto resolved = nlohmann::json::parse(read_file(run3 + "/resolved_config.json"));
  CHECK(resolved["train"]["seed"] == 9);

  // eval prints a report and writes artifacts
  const std::string evaldir = (dir / "evalout").string();
  REQUIRE(run_cli("eval --checkpoint " + run1 + " --data " + data + " --out " + evaldir) == 0);
  const auto report = nlohmann::json::parse(read_file(evaldir + "/report.json"));
  CHECK(report.contains("h_score"));
  CHECK(std::filesystem::exists(evaldir + "/anomaly_histogram.csv"));
  CHECK(std::filesystem::exists(evaldir + "/features.csv"));

  // resume continues from the checkpoint and extends the metrics log
  const auto before = read_file(run1 + "/metrics.jsonl");
  REQUIRE(run_cli("train --data " + data + " --out " + run1 + " --resume " + run1) == 0);
  const auto after = read_file(run1 + "/metrics.jsonl");
  CHECK(after.size() >= before.size());

  // invalid config fails fast with nonzero exit
  const auto bad_cfg = dir / "bad.json";
  {
    std::ofstream out(bad_cfg);
    out << R"({"train": {"mystery_knob": 1}})";
  }
  CHECK(run_cli("train --config " + bad_cfg.string() + " --data " + data + " --out " +
                (dir / "never").string()) != 0);
  CHECK_FALSE(std::filesystem::exists(dir / "never"));

  // ablation flags flow into the resolved config
  const std::string run4 = (dir / "run4").string();
  REQUIRE(run_cli("train" + cfg + " --data " + data + " --out " + run4 + " --no-split") == 0);
  const auto r4 = nlohmann::json::parse(read_file(run4 + "/resolved_config.json"));
  CHECK(r4["train"]["disable_split"] == true);
}
