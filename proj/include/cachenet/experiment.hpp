#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "cachenet/analytics.hpp"
#include "cachenet/config.hpp"
#include "cachenet/simulator.hpp"
#include "cachenet/topology.hpp"
#include "cachenet/window.hpp"

namespace cachenet {

inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline TopologyParams topology_params(const ExperimentConfig& c) {
  TopologyParams p;
  p.nodes = c.nodes;
  p.attach = c.attach;
  p.publishers = c.publishers;
  p.items_per_publisher = c.items_per_publisher;
  p.seed = c.topology_seed;
  p.hop_delay = c.hop_delay;
  p.publisher_delay = c.publisher_delay;
  p.random_content_map = c.random_content_map;
  return p;
}

inline SimConfig sim_config(const ExperimentConfig& c, std::uint64_t seed) {
  SimConfig s;
  s.alpha = c.alpha;
  s.lambda_min = c.lambda_min;
  s.lambda_max = c.lambda_max;
  s.policy = c.policy_kind;
  s.k_partitions = c.k_partitions;
  s.unprivileged_fraction = c.unprivileged_fraction;
  s.window_method = c.parsed_window_method();
  s.window_epsilon = c.window_epsilon;
  s.window_conf = c.window_conf;
  s.wlfu_epsilon = c.wlfu_epsilon;
  s.cache_capacity = c.cache_capacity;
  s.total_requests = c.requests;
  s.warmup_fraction = c.warmup_fraction;
  s.seed = seed;
  return s;
}

// Batch experiment driver: executes the configured sweep plus the requested
// analytic passes and writes one CSV per figure tag and a JSON summary.
// Outputs are byte-stable for a fixed config and seed list.
class ExperimentRunner {
 public:
  explicit ExperimentRunner(ExperimentConfig config) : config_(std::move(config)) {
    auto issues = config_.validate();
    if (!issues.empty()) {
      std::string msg = "invalid config:";
      for (const auto& i : issues) msg += "\n  " + i;
      throw ConfigError(msg);
    }
  }

  nlohmann::ordered_json run() {
    namespace fs = std::filesystem;
    fs::create_directories(config_.output_dir);
    topo_ = build_topology(topology_params(config_));

    nlohmann::ordered_json summary;
    summary["config"] = config_.to_json();
    run_sweeps(summary);
    if (config_.run_windows) write_windows_csv();
    if (config_.run_steady_state) write_qq_csv(summary);

    std::ofstream out(path("summary.json"));
    out << summary.dump(2) << '\n';
    if (failed_runs_ > 0)
      throw RunError(std::to_string(failed_runs_) + " run(s) failed; see summary.json");
    return summary;
  }

 private:
  using RunKey = std::tuple<double, std::size_t, std::string, std::uint64_t>;

  std::string path(const std::string& name) const {
    return (std::filesystem::path(config_.output_dir) / name).string();
  }

  const MetricsReport& run_once(double alpha, std::size_t size,
                                const std::string& policy, std::uint64_t seed) {
    RunKey key{alpha, size, policy, seed};
    auto it = runs_.find(key);
    if (it != runs_.end()) return it->second;
    if (!models_.count(alpha))
      models_.emplace(alpha,
                      std::make_shared<PopularityModel>(alpha, topo_.catalog_size()));
    SimConfig sc = sim_config(config_, seed);
    sc.alpha = alpha;
    sc.cache_capacity = size;
    sc.policy = policy;
    Simulator sim(topo_, *models_.at(alpha), sc);
    return runs_.emplace(key, sim.run()).first->second;
  }

  void run_sweeps(nlohmann::ordered_json& summary) {
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    std::vector<double> fig9_alphas = config_.alphas;
    double fig8_alpha = config_.alphas.front();

    struct Agg {
      double hit_sum{0.0};
      double delay_sum{0.0};
      int n{0};
    };
    std::map<std::tuple<double, std::size_t, std::string>, Agg> agg;

    for (double alpha : fig9_alphas)
      for (std::size_t size : config_.cache_sizes)
        for (const auto& policy : config_.policies)
          for (std::uint64_t seed : config_.seeds) {
            try {
              const MetricsReport& r = run_once(alpha, size, policy, seed);
              auto& a = agg[{alpha, size, policy}];
              a.hit_sum += r.aggregate_hit_prob;
              a.delay_sum += r.mean_delay;
              ++a.n;
              records.push_back({{"alpha", alpha},
                                 {"cache_size", size},
                                 {"policy", policy},
                                 {"seed", seed},
                                 {"hit_prob", r.aggregate_hit_prob},
                                 {"mean_delay", r.mean_delay},
                                 {"stream_checksum", r.stream_checksum}});
            } catch (const std::exception& e) {
              ++failed_runs_;
              records.push_back({{"alpha", alpha},
                                 {"cache_size", size},
                                 {"policy", policy},
                                 {"seed", seed},
                                 {"error", e.what()}});
            }
          }
    summary["runs"] = std::move(records);

    {
      std::ofstream out(path("fig8-hit-vs-size.csv"));
      out << "alpha,cache_size,policy,hit_prob,mean_delay\n";
      for (std::size_t size : config_.cache_sizes)
        for (const auto& policy : config_.policies) {
          auto it = agg.find({fig8_alpha, size, policy});
          if (it == agg.end() || it->second.n == 0) continue;
          out << format_number(fig8_alpha) << ',' << size << ',' << policy << ','
              << format_number(it->second.hit_sum / it->second.n) << ','
              << format_number(it->second.delay_sum / it->second.n) << '\n';
        }
    }
    {
      std::ofstream out(path("fig9-hit-vs-alpha.csv"));
      out << "alpha,cache_size,policy,hit_prob\n";
      for (double alpha : fig9_alphas)
        for (std::size_t size : config_.cache_sizes)
          for (const auto& policy : config_.policies) {
            auto it = agg.find({alpha, size, policy});
            if (it == agg.end() || it->second.n == 0) continue;
            out << format_number(alpha) << ',' << size << ',' << policy << ','
                << format_number(it->second.hit_sum / it->second.n) << '\n';
          }
    }
  }

  void write_windows_csv() {
    std::ofstream out(path("fig7-windows.csv"));
    out << "cache_size,policy,window\n";
    double catalog = static_cast<double>(topo_.catalog_size());
    for (std::size_t size : config_.cache_sizes) {
      std::int64_t w_lfru;
      switch (config_.parsed_window_method()) {
        case WindowMethod::Chebyshev:
          w_lfru = chebyshev_window(config_.window_epsilon, config_.window_conf);
          break;
        default:
          w_lfru = clt_window(config_.window_epsilon, config_.window_conf);
          break;
      }
      out << size << ",lfru," << w_lfru << '\n';
      out << size << ",wlfu,"
          << wlfu_window(static_cast<std::int64_t>(size), catalog, config_.wlfu_epsilon)
          << '\n';
    }
  }

  void write_qq_csv(nlohmann::ordered_json& summary) {
    double alpha = config_.alphas.front();
    if (!models_.count(alpha))
      models_.emplace(alpha,
                      std::make_shared<PopularityModel>(alpha, topo_.catalog_size()));
    SimConfig base = sim_config(config_, config_.seeds.front());
    base.alpha = alpha;
    auto direct = draw_direct_rates(topo_, base);
    SteadyStateResult theory;
    try {
      theory = steady_state_solve(topo_, direct,
                                  static_cast<int>(config_.cache_capacity),
                                  *models_.at(alpha));
    } catch (const std::runtime_error& e) {
      throw NumericError(e.what());
    }

    std::vector<double> sim_rates(static_cast<std::size_t>(topo_.graph.node_count), 0.0);
    int n_ok = 0;
    for (std::uint64_t seed : config_.seeds) {
      const MetricsReport& r =
          run_once(alpha, config_.cache_capacity, config_.policy_kind, seed);
      auto rates = r.forwarded_rates();
      for (std::size_t j = 0; j < rates.size(); ++j) sim_rates[j] += rates[j];
      ++n_ok;
    }
    for (auto& x : sim_rates) x /= static_cast<double>(n_ok);

    auto pairs = qq_pairs(theory.forwarded_rates, sim_rates);
    std::ofstream out(path("fig6-qq.csv"));
    out << "quantile,theory,sim\n";
    for (const auto& [q, th, sm] : pairs)
      out << format_number(q) << ',' << format_number(th) << ',' << format_number(sm)
          << '\n';
    summary["steady_state"] = {{"iterations", theory.iterations}};
  }

  ExperimentConfig config_;
  Topology topo_;
  std::map<double, std::shared_ptr<PopularityModel>> models_;
  std::map<RunKey, MetricsReport> runs_;
  int failed_runs_{0};
};

inline nlohmann::ordered_json run_experiment(const ExperimentConfig& config) {
  ExperimentRunner runner(config);
  return runner.run();
}

}  // namespace cachenet
