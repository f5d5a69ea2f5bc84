#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cachenet/window.hpp"

namespace cachenet {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};
struct RunError : std::runtime_error {
  explicit RunError(const std::string& what) : std::runtime_error(what) {}
};
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
  // topology
  int nodes{30};
  int attach{2};
  int publishers{5};
  std::int64_t items_per_publisher{1000};
  std::uint64_t topology_seed{1};
  double hop_delay{0.01};
  double publisher_delay{0.01};
  bool random_content_map{false};

  // workload
  double alpha{0.8};
  double lambda_min{70.0};
  double lambda_max{100.0};

  // policy
  std::string policy_kind{"lfru"};
  int k_partitions{2};
  double unprivileged_fraction{0.2};
  std::string priority{"neutral"};
  std::string window_method{"clt-newton"};
  double window_epsilon{0.1};
  double window_conf{95.0};
  double wlfu_epsilon{0.1};

  // run
  std::size_t cache_capacity{200};
  long requests{200000};
  double warmup_fraction{0.2};
  std::vector<std::uint64_t> seeds{1};
  int workers{1};

  // sweep
  std::vector<std::size_t> cache_sizes{50, 100, 200, 400};
  std::vector<double> alphas{0.8};
  std::vector<std::string> policies{"lfru", "lru", "lfu", "wlfu", "random"};

  // analytics toggles
  bool run_steady_state{true};
  bool run_che{true};
  bool run_windows{true};

  std::string output_dir{"out"};

  WindowMethod parsed_window_method() const {
    if (window_method == "chebyshev") return WindowMethod::Chebyshev;
    if (window_method == "clt") return WindowMethod::Clt;
    if (window_method == "clt-newton") return WindowMethod::CltNewton;
    throw ConfigError("policy.window_method: unknown method '" + window_method + "'");
  }

  std::vector<std::string> validate() const {
    std::vector<std::string> issues;
    auto bad = [&](const std::string& msg) { issues.push_back(msg); };
    if (nodes < 1) bad("topology.nodes: must be >= 1");
    if (nodes > 1 && (attach < 1 || attach >= nodes))
      bad("topology.attach: need nodes > attach >= 1");
    if (publishers < 1 || publishers > nodes)
      bad("topology.publishers: must be in [1, nodes]");
    if (items_per_publisher < 1) bad("topology.items_per_publisher: must be >= 1");
    if (hop_delay < 0.0) bad("topology.hop_delay: must be >= 0");
    if (publisher_delay < 0.0) bad("topology.publisher_delay: must be >= 0");
    if (alpha <= 0.0) bad("workload.alpha: must be > 0");
    if (lambda_min <= 0.0) bad("workload.lambda_min: must be > 0");
    if (lambda_min > lambda_max) bad("workload.lambda_min: must be <= lambda_max");
    static const char* kinds[] = {"lfru", "alfu", "lru", "lfu", "wlfu", "random"};
    auto known = [&](const std::string& p) {
      for (const char* k : kinds)
        if (p == k) return true;
      return false;
    };
    if (!known(policy_kind)) bad("policy.kind: unknown policy '" + policy_kind + "'");
    if (k_partitions < 0) bad("policy.k_partitions: must be >= 0");
    if (unprivileged_fraction < 0.0 || unprivileged_fraction > 1.0)
      bad("policy.unprivileged_fraction: must be in [0,1]");
    if (priority != "neutral" && priority != "size-rate" && priority != "rate-size")
      bad("policy.priority: unknown priority '" + priority + "'");
    if (window_method != "chebyshev" && window_method != "clt" &&
        window_method != "clt-newton")
      bad("policy.window_method: unknown method '" + window_method + "'");
    if (window_epsilon <= 0.0) bad("policy.window_epsilon: must be > 0");
    if (window_conf <= 0.0 || window_conf >= 100.0)
      bad("policy.window_conf: must be in (0,100)");
    if (wlfu_epsilon <= 0.0 || wlfu_epsilon >= 1.0)
      bad("policy.wlfu_epsilon: must be in (0,1)");
    if (requests < 1) bad("run.requests: must be >= 1");
    if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
      bad("run.warmup_fraction: must be in [0,1)");
    if (seeds.empty()) bad("run.seeds: must be non-empty");
    if (workers < 1) bad("run.workers: must be >= 1");
    if (cache_sizes.empty()) bad("sweep.cache_sizes: must be non-empty");
    if (alphas.empty()) bad("sweep.alphas: must be non-empty");
    if (policies.empty()) bad("sweep.policies: must be non-empty");
    for (const auto& p : policies)
      if (!known(p)) bad("sweep.policies: unknown policy '" + p + "'");
    for (double a : alphas)
      if (a <= 0.0) bad("sweep.alphas: must be > 0");
    if (output_dir.empty()) bad("output_dir: must be non-empty");
    return issues;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["topology"] = {{"nodes", nodes},
                     {"attach", attach},
                     {"publishers", publishers},
                     {"items_per_publisher", items_per_publisher},
                     {"seed", topology_seed},
                     {"hop_delay", hop_delay},
                     {"publisher_delay", publisher_delay},
                     {"random_content_map", random_content_map}};
    j["workload"] = {{"alpha", alpha},
                     {"lambda_min", lambda_min},
                     {"lambda_max", lambda_max}};
    j["policy"] = {{"kind", policy_kind},
                   {"k_partitions", k_partitions},
                   {"unprivileged_fraction", unprivileged_fraction},
                   {"priority", priority},
                   {"window_method", window_method},
                   {"window_epsilon", window_epsilon},
                   {"window_conf", window_conf},
                   {"wlfu_epsilon", wlfu_epsilon}};
    j["run"] = {{"cache_capacity", cache_capacity},
                {"requests", requests},
                {"warmup_fraction", warmup_fraction},
                {"seeds", seeds},
                {"workers", workers}};
    j["sweep"] = {{"cache_sizes", cache_sizes},
                  {"alphas", alphas},
                  {"policies", policies}};
    j["analytics"] = {{"steady_state", run_steady_state},
                      {"che", run_che},
                      {"windows", run_windows}};
    j["output_dir"] = output_dir;
    return j;
  }
};

namespace detail {

// Strict object reader: every consumed key is ticked off, leftovers reject.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& j, std::string path)
      : obj_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& target) {
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    consumed_.push_back(key);
    try {
      target = it->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type");
    }
  }

  const nlohmann::json* child(const char* key) {
    auto it = obj_.find(key);
    if (it == obj_.end()) return nullptr;
    consumed_.push_back(key);
    return &*it;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      bool seen = false;
      for (const auto& k : consumed_)
        if (k == it.key()) seen = true;
      if (!seen) throw ConfigError(path_ + "." + it.key() + ": unknown key");
    }
  }

 private:
  const nlohmann::json& obj_;
  std::string path_;
  std::vector<std::string> consumed_;
};

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig c;
  detail::ObjectReader root(j, "config");
  if (const auto* t = root.child("topology")) {
    detail::ObjectReader r(*t, "topology");
    r.get("nodes", c.nodes);
    r.get("attach", c.attach);
    r.get("publishers", c.publishers);
    r.get("items_per_publisher", c.items_per_publisher);
    r.get("seed", c.topology_seed);
    r.get("hop_delay", c.hop_delay);
    r.get("publisher_delay", c.publisher_delay);
    r.get("random_content_map", c.random_content_map);
    r.finish();
  }
  if (const auto* t = root.child("workload")) {
    detail::ObjectReader r(*t, "workload");
    r.get("alpha", c.alpha);
    r.get("lambda_min", c.lambda_min);
    r.get("lambda_max", c.lambda_max);
    r.finish();
  }
  if (const auto* t = root.child("policy")) {
    detail::ObjectReader r(*t, "policy");
    r.get("kind", c.policy_kind);
    r.get("k_partitions", c.k_partitions);
    r.get("unprivileged_fraction", c.unprivileged_fraction);
    r.get("priority", c.priority);
    r.get("window_method", c.window_method);
    r.get("window_epsilon", c.window_epsilon);
    r.get("window_conf", c.window_conf);
    r.get("wlfu_epsilon", c.wlfu_epsilon);
    r.finish();
  }
  if (const auto* t = root.child("run")) {
    detail::ObjectReader r(*t, "run");
    r.get("cache_capacity", c.cache_capacity);
    r.get("requests", c.requests);
    r.get("warmup_fraction", c.warmup_fraction);
    r.get("seeds", c.seeds);
    r.get("workers", c.workers);
    r.finish();
  }
  if (const auto* t = root.child("sweep")) {
    detail::ObjectReader r(*t, "sweep");
    r.get("cache_sizes", c.cache_sizes);
    r.get("alphas", c.alphas);
    r.get("policies", c.policies);
    r.finish();
  }
  if (const auto* t = root.child("analytics")) {
    detail::ObjectReader r(*t, "analytics");
    r.get("steady_state", c.run_steady_state);
    r.get("che", c.run_che);
    r.get("windows", c.run_windows);
    r.finish();
  }
  root.get("output_dir", c.output_dir);
  root.finish();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace cachenet
