#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstring>
#include <future>
#include <memory>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "cachenet/analytics.hpp"
#include "cachenet/cache.hpp"
#include "cachenet/topology.hpp"
#include "cachenet/window.hpp"
#include "cachenet/workload.hpp"

namespace cachenet {

struct SimConfig {
  double alpha{0.8};
  double lambda_min{70.0};
  double lambda_max{100.0};
  std::string policy{"lfru"};  // lfru | alfu | lru | lfu | wlfu | random
  int k_partitions{2};
  double unprivileged_fraction{0.2};
  WindowMethod window_method{WindowMethod::CltNewton};
  double window_epsilon{0.1};
  double window_conf{95.0};
  double wlfu_epsilon{0.1};
  std::size_t cache_capacity{200};
  long total_requests{200000};
  double warmup_fraction{0.2};
  std::uint64_t seed{1};
};

struct NodeStats {
  long arrivals{0};
  long hits{0};
  long misses{0};
  long forwards{0};   // requests transmitted upstream (incl. to the publisher)
  long coalesced{0};  // requests joined onto an in-flight fetch
  long insertions{0}; // cache stores on the reverse path
};

struct MetricsReport {
  std::string policy;
  double alpha{0.0};
  std::size_t cache_capacity{0};
  std::uint64_t seed{0};
  double duration{0.0};
  double measure_time{0.0};
  std::vector<NodeStats> nodes;
  double aggregate_hit_prob{0.0};
  double mean_delay{0.0};
  long delivered{0};
  long generated_requests{0};
  std::uint64_t stream_checksum{0};
  std::vector<std::int64_t> window_lengths;  // per node, 0 for windowless policies

  std::vector<double> forwarded_rates() const {
    std::vector<double> rates;
    rates.reserve(nodes.size());
    for (const auto& s : nodes)
      rates.push_back(measure_time > 0.0 ? static_cast<double>(s.forwards) / measure_time
                                         : 0.0);
    return rates;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["policy"] = policy;
    j["alpha"] = alpha;
    j["cache_capacity"] = cache_capacity;
    j["seed"] = seed;
    j["duration"] = duration;
    j["measure_time"] = measure_time;
    j["generated_requests"] = generated_requests;
    j["aggregate_hit_prob"] = aggregate_hit_prob;
    j["mean_delay"] = mean_delay;
    j["delivered"] = delivered;
    j["stream_checksum"] = stream_checksum;
    nlohmann::ordered_json ns = nlohmann::ordered_json::array();
    for (const auto& s : nodes)
      ns.push_back({{"arrivals", s.arrivals},
                    {"hits", s.hits},
                    {"misses", s.misses},
                    {"forwards", s.forwards},
                    {"coalesced", s.coalesced},
                    {"insertions", s.insertions}});
    j["nodes"] = std::move(ns);
    j["window_lengths"] = window_lengths;
    return j;
  }
};

inline std::vector<double> measure_forwarded_rates(const MetricsReport& report) {
  return report.forwarded_rates();
}

// Per-node direct consumer arrival rates, uniform in [lambda_min, lambda_max].
// Independent of the policy so paired sweeps see identical workloads.
inline std::vector<double> draw_direct_rates(const Topology& topo,
                                             const SimConfig& config) {
  std::mt19937_64 gen(config.seed ^ 0xd1b54a32d192ed03ULL);
  std::vector<double> rates;
  for (int j = 0; j < topo.graph.node_count; ++j)
    rates.push_back(config.lambda_min +
                    uniform01(gen) * (config.lambda_max - config.lambda_min));
  return rates;
}

// Discrete-event cache-network simulator. The request walk toward the
// publisher is instantaneous; the content return path pays per-hop delays,
// during which pending-request (PIT) counters accumulate. Every traversed
// cache without the content evaluates admission when the content passes.
class Simulator {
 public:
  Simulator(const Topology& topo, const PopularityModel& model, SimConfig config)
      : topo_(topo), model_(model), config_(std::move(config)) {
    if (model_.catalog_size() != topo_.catalog_size())
      throw std::invalid_argument("catalog size disagrees with topology");
    if (config_.warmup_fraction < 0.0 || config_.warmup_fraction >= 1.0)
      throw std::invalid_argument("warmup fraction must be in [0,1)");
    if (config_.lambda_min > config_.lambda_max)
      throw std::invalid_argument("lambda_min must be <= lambda_max");
  }

  // Optional event trace: "time,node,content,action" CSV lines.
  void set_trace(std::ostream* out) { trace_ = out; }

  MetricsReport run() {
    auto rates = draw_direct_rates(topo_, config_);
    double total_rate = 0.0;
    for (double r : rates) total_rate += r;
    double duration = static_cast<double>(config_.total_requests) / total_rate;
    std::vector<RequestEvent> requests;
    std::uint64_t checksum = 1469598103934665603ULL;  // FNV-1a offset basis
    for (int j = 0; j < topo_.graph.node_count; ++j) {
      RequestProcess process{rates[static_cast<std::size_t>(j)], 1.0,
                             mix_seed(config_.seed, static_cast<std::uint64_t>(j))};
      auto stream = generate_stream(model_, process, duration, j);
      for (const auto& e : stream) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(e.time));
        std::memcpy(&bits, &e.time, sizeof(bits));
        checksum = fnv(checksum, bits);
        checksum = fnv(checksum, static_cast<std::uint64_t>(e.origin_node));
        checksum = fnv(checksum, static_cast<std::uint64_t>(e.content));
      }
      requests.insert(requests.end(), stream.begin(), stream.end());
    }
    std::stable_sort(requests.begin(), requests.end(),
                     [](const RequestEvent& a, const RequestEvent& b) {
                       return a.time < b.time ||
                              (a.time == b.time && a.origin_node < b.origin_node);
                     });
    MetricsReport report = run_trace(requests, rates, duration);
    report.stream_checksum = checksum;
    return report;
  }

  // Drives an explicit, time-ordered request trace (used by tests and by
  // run() above).
  MetricsReport run_trace(const std::vector<RequestEvent>& requests,
                          const std::vector<double>& rates, double duration) {
    std::size_t n = static_cast<std::size_t>(topo_.graph.node_count);
    build_policies(rates);
    pit_.assign(n, {});
    stats_.assign(n, {});
    warmup_end_ = config_.warmup_fraction * duration;
    delay_sum_ = 0.0;
    delivered_ = 0;

    std::priority_queue<Event, std::vector<Event>, EventAfter> queue;
    std::uint64_t seq = 0;
    for (const auto& r : requests)
      queue.push({r.time, r.origin_node, seq++, EventKind::ConsumerRequest, r.content});
    while (!queue.empty()) {
      Event ev = queue.top();
      queue.pop();
      if (ev.kind == EventKind::ConsumerRequest)
        handle_request(ev, queue, seq);
      else
        handle_delivery(ev, queue, seq);
    }

    MetricsReport report;
    report.policy = config_.policy;
    report.alpha = config_.alpha;
    report.cache_capacity = config_.cache_capacity;
    report.seed = config_.seed;
    report.duration = duration;
    report.measure_time = duration - warmup_end_;
    report.nodes = stats_;
    report.generated_requests = static_cast<long>(requests.size());
    long arrivals = 0, hits = 0;
    for (const auto& s : stats_) {
      arrivals += s.arrivals;
      hits += s.hits;
    }
    report.aggregate_hit_prob =
        arrivals > 0 ? static_cast<double>(hits) / static_cast<double>(arrivals) : 0.0;
    report.delivered = delivered_;
    report.mean_delay = delivered_ > 0 ? delay_sum_ / static_cast<double>(delivered_) : 0.0;
    report.window_lengths = window_lengths_;
    return report;
  }

  // Delay of the full miss path from node j to a publisher, averaged over
  // publishers; feeds the W_T rule.
  double avg_miss_delay(int node) const {
    double sum = 0.0;
    for (std::size_t pi = 0; pi < topo_.publishers.size(); ++pi)
      sum += path_delay(node, static_cast<int>(pi)) + topo_.publisher_delay;
    return sum / static_cast<double>(topo_.publishers.size());
  }

  double path_delay(int node, int pub_index) const {
    double d = 0.0;
    int u = node;
    while (u != topo_.publishers[static_cast<std::size_t>(pub_index)].attachment) {
      int v = topo_.next_hop[static_cast<std::size_t>(pub_index)][static_cast<std::size_t>(u)];
      d += topo_.graph.edge_delay(u, v);
      u = v;
    }
    return d;
  }

 private:
  enum class EventKind { ConsumerRequest, ContentDelivery };
  struct Event {
    double time;
    int node;
    std::uint64_t seq;
    EventKind kind;
    ContentId content;
  };
  struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      if (a.node != b.node) return a.node > b.node;
      return a.seq > b.seq;
    }
  };
  struct PitEntry {
    std::vector<int> downstream;       // neighbor nodes awaiting the content
    std::vector<double> local_times;   // local consumer request timestamps
  };

  void trace(double time, int node, ContentId content, const char* action) const {
    if (trace_) *trace_ << time << ',' << node << ',' << content << ',' << action << '\n';
  }

  static std::uint64_t fnv(std::uint64_t h, std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xffULL;
      h *= 1099511628211ULL;
    }
    return h;
  }
  static std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  void build_policies(const std::vector<double>& rates) {
    std::size_t n = static_cast<std::size_t>(topo_.graph.node_count);
    policies_.clear();
    window_lengths_.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
      const std::string& kind = config_.policy;
      if (kind == "lfru" || kind == "alfu") {
        std::int64_t w = lfru_window_length(rates[j]);
        double w_t = window_time(w, rates[j], avg_miss_delay(static_cast<int>(j)));
        window_lengths_[j] = w;
        int k = (kind == "alfu") ? 0 : config_.k_partitions;
        double uf = (kind == "alfu") ? 1.0 : config_.unprivileged_fraction;
        policies_.push_back(std::make_unique<LfruCache>(config_.cache_capacity, uf, k, w_t));
      } else if (kind == "lru") {
        policies_.push_back(std::make_unique<LruCache>(config_.cache_capacity));
      } else if (kind == "lfu") {
        policies_.push_back(std::make_unique<LfuCache>(config_.cache_capacity));
      } else if (kind == "wlfu") {
        std::int64_t w = wlfu_window(static_cast<std::int64_t>(config_.cache_capacity),
                                     static_cast<double>(model_.catalog_size()),
                                     config_.wlfu_epsilon);
        window_lengths_[j] = w;
        policies_.push_back(std::make_unique<WlfuCache>(config_.cache_capacity, w));
      } else if (kind == "random") {
        policies_.push_back(std::make_unique<RandomCache>(
            config_.cache_capacity, mix_seed(config_.seed ^ 0xabcdef12345ULL,
                                             static_cast<std::uint64_t>(j))));
      } else {
        throw std::invalid_argument("unknown policy: " + kind);
      }
    }
  }

  std::int64_t lfru_window_length(double lambda_j) const {
    switch (config_.window_method) {
      case WindowMethod::Chebyshev:
        return chebyshev_window(config_.window_epsilon, config_.window_conf);
      case WindowMethod::Clt:
        return clt_window(config_.window_epsilon, config_.window_conf);
      case WindowMethod::CltNewton: {
        std::int64_t w0 = clt_window(config_.window_epsilon, config_.window_conf);
        RequestProcess process{lambda_j, 1.0 / lambda_j, 0};
        double a_w = expected_window_requests(model_, process, 1, w0) -
                     config_.window_epsilon;
        return newton_refine_window(w0, model_, process, 1, config_.window_epsilon, a_w);
      }
    }
    return 1;
  }

  void handle_request(const Event& ev, std::priority_queue<Event, std::vector<Event>, EventAfter>& queue,
                      std::uint64_t& seq) {
    int pi = topo_.publisher_of(ev.content);
    int node = ev.node;
    int prev = -1;  // -1 = local consumer
    bool post_warmup = ev.time >= warmup_end_;
    for (;;) {
      auto& s = stats_[static_cast<std::size_t>(node)];
      if (post_warmup) ++s.arrivals;
      bool hit = policies_[static_cast<std::size_t>(node)]->on_request(ev.content, ev.time);
      trace(ev.time, node, ev.content, hit ? "hit" : "miss");
      if (hit) {
        if (post_warmup) ++s.hits;
        if (prev < 0) {
          if (post_warmup) {
            delay_sum_ += 0.0;
            ++delivered_;
          }
        } else {
          queue.push({ev.time + topo_.graph.edge_delay(node, prev), prev, seq++,
                      EventKind::ContentDelivery, ev.content});
        }
        return;
      }
      if (post_warmup) ++s.misses;
      auto& pit = pit_[static_cast<std::size_t>(node)];
      auto it = pit.find(ev.content);
      bool pending = it != pit.end();
      if (!pending) it = pit.emplace(ev.content, PitEntry{}).first;
      if (prev < 0)
        it->second.local_times.push_back(ev.time);
      else
        it->second.downstream.push_back(prev);
      if (pending) {
        if (post_warmup) ++s.coalesced;
        trace(ev.time, node, ev.content, "coalesce");
        return;
      }
      if (post_warmup) ++s.forwards;
      trace(ev.time, node, ev.content, "forward");
      int attachment = topo_.publishers[static_cast<std::size_t>(pi)].attachment;
      if (node == attachment) {
        queue.push({ev.time + topo_.publisher_delay, node, seq++,
                    EventKind::ContentDelivery, ev.content});
        return;
      }
      prev = node;
      node = topo_.next_hop[static_cast<std::size_t>(pi)][static_cast<std::size_t>(node)];
    }
  }

  void handle_delivery(const Event& ev, std::priority_queue<Event, std::vector<Event>, EventAfter>& queue,
                       std::uint64_t& seq) {
    auto& policy = *policies_[static_cast<std::size_t>(ev.node)];
    bool had = policy.contains(ev.content);
    auto decision = policy.admit(ev.content, ev.time);
    bool stored = !had && decision.verdict != Verdict::Forward;
    if (stored && ev.time >= warmup_end_)
      ++stats_[static_cast<std::size_t>(ev.node)].insertions;
    trace(ev.time, ev.node, ev.content, stored ? "store" : "pass");
    auto& pit = pit_[static_cast<std::size_t>(ev.node)];
    auto it = pit.find(ev.content);
    if (it == pit.end()) return;
    for (double t_req : it->second.local_times) {
      if (t_req >= warmup_end_) {
        delay_sum_ += ev.time - t_req;
        ++delivered_;
      }
    }
    for (int m : it->second.downstream)
      queue.push({ev.time + topo_.graph.edge_delay(ev.node, m), m, seq++,
                  EventKind::ContentDelivery, ev.content});
    pit.erase(it);
  }

  const Topology& topo_;
  const PopularityModel& model_;
  SimConfig config_;
  std::vector<std::unique_ptr<CachePolicy>> policies_;
  std::vector<std::unordered_map<ContentId, PitEntry>> pit_;
  std::vector<NodeStats> stats_;
  std::vector<std::int64_t> window_lengths_;
  double warmup_end_{0.0};
  double delay_sum_{0.0};
  long delivered_{0};
  std::ostream* trace_{nullptr};
};

// Cartesian sweep sharing one topology and one request stream seed, so runs
// differing only in policy see identical workloads.
inline std::vector<MetricsReport> run_sweep(const Topology& topo,
                                            const SimConfig& base,
                                            const std::vector<std::size_t>& cache_sizes,
                                            const std::vector<double>& alphas,
                                            const std::vector<std::string>& policies,
                                            int workers = 1) {
  if (cache_sizes.empty() || alphas.empty() || policies.empty())
    throw std::invalid_argument("sweep lists must be non-empty");
  std::vector<SimConfig> configs;
  for (double alpha : alphas)
    for (std::size_t size : cache_sizes)
      for (const auto& policy : policies) {
        SimConfig c = base;
        c.alpha = alpha;
        c.cache_capacity = size;
        c.policy = policy;
        configs.push_back(c);
      }
  std::vector<MetricsReport> reports(configs.size());
  std::unordered_map<double, std::shared_ptr<PopularityModel>> models;
  for (double alpha : alphas)
    models.emplace(alpha,
                   std::make_shared<PopularityModel>(alpha, topo.catalog_size()));
  auto worker = [&](std::atomic<std::size_t>& next) {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      Simulator sim(topo, *models.at(configs[i].alpha), configs[i]);
      reports[i] = sim.run();
    }
  };
  std::atomic<std::size_t> next{0};
  if (workers <= 1) {
    worker(next);
  } else {
    std::vector<std::future<void>> futures;
    for (int w = 0; w < workers; ++w)
      futures.push_back(std::async(std::launch::async, [&] { worker(next); }));
    for (auto& f : futures) f.get();
  }
  return reports;
}

}  // namespace cachenet
