#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cachenet/config.hpp"
#include "cachenet/experiment.hpp"

using namespace cachenet;
namespace fs = std::filesystem;

#ifndef TEST_DATA_DIR
#define TEST_DATA_DIR "tests/data"
#endif

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool mentions(const std::vector<std::string>& issues, const std::string& needle) {
  return std::any_of(issues.begin(), issues.end(), [&](const std::string& s) {
    return s.find(needle) != std::string::npos;
  });
}

// small fast experiment shape shared by the run tests
ExperimentConfig tiny_config(const std::string& out_dir) {
  ExperimentConfig c;
  c.nodes = 8;
  c.publishers = 2;
  c.items_per_publisher = 100;
  c.requests = 4000;
  c.cache_capacity = 20;
  c.cache_sizes = {10, 20};
  c.policies = {"lfru", "lru"};
  c.seeds = {1};
  c.output_dir = out_dir;
  return c;
}

}  // namespace

TEST_CASE("defaults pass validation") {
  ExperimentConfig c;
  CHECK(c.validate().empty());
}

TEST_CASE("validation names the offending fields") {
  ExperimentConfig c;
  c.lambda_min = 1000.0;
  c.lambda_max = 700.0;
  c.unprivileged_fraction = 1.5;
  c.policy_kind = "mru";
  c.window_conf = 100.0;
  c.warmup_fraction = 1.0;
  auto issues = c.validate();
  CHECK(mentions(issues, "lambda_min"));
  CHECK(mentions(issues, "unprivileged_fraction"));
  CHECK(mentions(issues, "policy.kind"));
  CHECK(mentions(issues, "window_conf"));
  CHECK(mentions(issues, "warmup_fraction"));
}

TEST_CASE("parser applies defaults and rejects unknown keys") {
  auto j = nlohmann::json::parse(R"({"workload": {"alpha": 1.2}})");
  auto c = parse_config(j);
  CHECK(c.alpha == doctest::Approx(1.2));
  CHECK(c.nodes == 30);
  CHECK(c.policy_kind == "lfru");

  auto bad = nlohmann::json::parse(R"({"workload": {"alhpa": 1.2}})");
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  auto bad2 = nlohmann::json::parse(R"({"wokload": {}})");
  CHECK_THROWS_AS(parse_config(bad2), ConfigError);
  auto bad3 = nlohmann::json::parse(R"({"workload": {"alpha": "high"}})");
  CHECK_THROWS_AS(parse_config(bad3), ConfigError);
  auto bad4 = nlohmann::json::parse(R"([1,2,3])");
  CHECK_THROWS_AS(parse_config(bad4), ConfigError);
}

TEST_CASE("paper-default profile file validates clean") {
  auto c = load_config(std::string(TEST_DATA_DIR) + "/paper_defaults.json");
  CHECK(c.validate().empty());
  CHECK(c.nodes == 100);
  CHECK(c.lambda_min == doctest::Approx(700.0));
  CHECK(c.lambda_max == doctest::Approx(1000.0));
  CHECK(c.cache_capacity == 3000);
  CHECK(c.publishers == 5);
  CHECK(c.items_per_publisher == 10000);
  CHECK(c.unprivileged_fraction == doctest::Approx(0.2));
}

TEST_CASE("bad profile file reports diagnostics") {
  auto c = load_config(std::string(TEST_DATA_DIR) + "/bad_config.json");
  auto issues = c.validate();
  CHECK(mentions(issues, "lambda_min"));
  CHECK(mentions(issues, "unprivileged_fraction"));
  CHECK_THROWS_AS(load_config(std::string(TEST_DATA_DIR) + "/nonexistent.json"),
                  ConfigError);
}

TEST_CASE("invalid config refuses to run") {
  auto c = tiny_config("out-test-invalid");
  c.seeds.clear();
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
  CHECK_FALSE(fs::exists("out-test-invalid"));
}

TEST_CASE("minimal run writes the figure files and summary") {
  fs::remove_all("out-test-min");
  auto c = tiny_config("out-test-min");
  auto summary = run_experiment(c);

  CHECK(fs::exists("out-test-min/summary.json"));
  CHECK(fs::exists("out-test-min/fig6-qq.csv"));
  CHECK(fs::exists("out-test-min/fig7-windows.csv"));
  CHECK(fs::exists("out-test-min/fig8-hit-vs-size.csv"));
  CHECK(fs::exists("out-test-min/fig9-hit-vs-alpha.csv"));

  // header + 2 sizes x 2 policies rows
  auto fig8 = slurp("out-test-min/fig8-hit-vs-size.csv");
  CHECK(std::count(fig8.begin(), fig8.end(), '\n') == 5);
  CHECK(fig8.rfind("alpha,cache_size,policy,hit_prob,mean_delay\n", 0) == 0);

  auto fig6 = slurp("out-test-min/fig6-qq.csv");
  CHECK(std::count(fig6.begin(), fig6.end(), '\n') == 9);  // header + 8 nodes

  // summary embeds the resolved config and one record per run
  CHECK(summary["config"]["topology"]["nodes"] == 8);
  CHECK(summary["runs"].size() == 4);
  for (const auto& r : summary["runs"]) {
    CHECK(r.contains("hit_prob"));
    CHECK_FALSE(r.contains("error"));
  }
}

TEST_CASE("rerun with the same config is byte identical") {
  fs::remove_all("out-test-a");
  fs::remove_all("out-test-b");
  auto a = tiny_config("out-test-a");
  auto b = tiny_config("out-test-b");
  run_experiment(a);
  run_experiment(b);
  for (const char* name : {"fig6-qq.csv", "fig7-windows.csv",
                           "fig8-hit-vs-size.csv", "fig9-hit-vs-alpha.csv"}) {
    CHECK(slurp(fs::path("out-test-a") / name) == slurp(fs::path("out-test-b") / name));
  }
  // summaries agree once the (legitimately different) output dir is removed
  auto sa = nlohmann::json::parse(slurp("out-test-a/summary.json"));
  auto sb = nlohmann::json::parse(slurp("out-test-b/summary.json"));
  sa["config"].erase("output_dir");
  sb["config"].erase("output_dir");
  CHECK(sa == sb);
}

TEST_CASE("five by five sweep yields 25 fig8 rows") {
  fs::remove_all("out-test-grid");
  auto c = tiny_config("out-test-grid");
  c.requests = 1500;
  c.cache_sizes = {5, 10, 15, 20, 25};
  c.policies = {"lfru", "lru", "lfu", "wlfu", "random"};
  c.run_steady_state = false;  // keep the grid quick
  run_experiment(c);
  auto fig8 = slurp("out-test-grid/fig8-hit-vs-size.csv");
  CHECK(std::count(fig8.begin(), fig8.end(), '\n') == 26);
  auto fig7 = slurp("out-test-grid/fig7-windows.csv");
  CHECK(std::count(fig7.begin(), fig7.end(), '\n') == 11);  // header + 2 per size
}

TEST_CASE("config round trips into the summary with full precision") {
  ExperimentConfig c;
  c.alpha = 1.2;
  c.lambda_min = 70.5;
  auto j = c.to_json();
  CHECK(j["workload"]["alpha"].get<double>() == 1.2);
  CHECK(j["workload"]["lambda_min"].get<double>() == 70.5);
  CHECK(j["policy"]["kind"] == "lfru");
  CHECK(format_number(1.0 / 3.0) == "0.33333333333333331");
}
