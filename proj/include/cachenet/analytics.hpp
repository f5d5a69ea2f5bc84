#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "cachenet/topology.hpp"
#include "cachenet/workload.hpp"

namespace cachenet {

// Expected delivery delay under the first-hit reading: the request is served
// at the first node whose cache hits, otherwise by the publisher at the last
// hop. `cumulative_delays[n]` is the delay from the requester to hop n+1;
// `hit_probs[n]` the per-hop hit probability, publisher hop implied P = 1.
inline double expected_delay(const std::vector<double>& cumulative_delays,
                             const std::vector<double>& hit_probs) {
  if (cumulative_delays.empty() || cumulative_delays.size() != hit_probs.size())
    throw std::domain_error("path must be non-empty with matching hit probabilities");
  double survive = 1.0;  // P(no hit before hop n)
  double expected = 0.0;
  for (std::size_t n = 0; n < hit_probs.size(); ++n) {
    double p = hit_probs[n];
    if (p < 0.0 || p > 1.0) throw std::domain_error("hit probability out of [0,1]");
    expected += cumulative_delays[n] * p * survive;
    survive *= 1.0 - p;
  }
  expected += cumulative_delays.back() * survive;  // publisher serves
  return expected;
}

struct CheSolution {
  double characteristic_time{0.0};
  double residual{0.0};
  int iterations{0};
  bool saturated{false};  // cache size >= content count: no finite root
};

// Characteristic cache time: the root T of
//   cache_size = sum_n (1 - exp(-v(n) T)),
// Newton iteration from T0 = cache_size / sum v(n), bisection fallback.
inline CheSolution che_characteristic_time(double cache_size,
                                           const std::vector<double>& popularity) {
  if (popularity.empty()) throw std::invalid_argument("empty popularity vector");
  if (cache_size <= 0.0) throw std::invalid_argument("cache_size must be > 0");
  for (double v : popularity)
    if (v <= 0.0) throw std::invalid_argument("popularity rates must be > 0");
  double n_items = static_cast<double>(popularity.size());
  if (cache_size >= n_items) return {std::numeric_limits<double>::infinity(), 0.0, 0, true};

  auto f = [&](double t) {
    double s = 0.0;
    for (double v : popularity) s += -std::expm1(-v * t);
    return cache_size - s;
  };
  auto fprime = [&](double t) {
    double s = 0.0;
    for (double v : popularity) s += v * std::exp(-v * t);
    return -s;
  };

  double sum_v = std::accumulate(popularity.begin(), popularity.end(), 0.0);
  double t = cache_size / sum_v;
  const double tol = 1e-9;
  int iter = 0;
  for (; iter < 100; ++iter) {
    double ft = f(t);
    if (std::abs(ft) < tol) return {t, std::abs(ft), iter, false};
    double d = fprime(t);
    double next = (d != 0.0) ? t - ft / d : -1.0;
    if (next <= 0.0 || !std::isfinite(next)) break;
    t = next;
  }
  if (std::abs(f(t)) < tol) return {t, std::abs(f(t)), iter, false};

  // bracketing bisection fallback; f(0) = cache_size > 0, f decreasing
  double lo = 0.0, hi = std::max(t, cache_size / sum_v);
  while (f(hi) > 0.0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    double mid = 0.5 * (lo + hi);
    if (std::abs(f(mid)) < tol) return {mid, std::abs(f(mid)), iter + i, false};
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  double mid = 0.5 * (lo + hi);
  return {mid, std::abs(f(mid)), iter + 200, false};
}

// Che hit probability for a content with request rate v under characteristic
// time T: 1 - exp(-v T).
inline double content_hit_prob(double v_n, double t_j) {
  if (v_n < 0.0 || t_j < 0.0) throw std::domain_error("arguments must be >= 0");
  return -std::expm1(-v_n * t_j);
}

// Lower bound on the ALFU (unprivileged) hit rate for the alpha = 1 regime:
// (1 - eps) * sum_{i in set} 1 / (i ln C).
inline double alfu_hit_bound(const std::vector<std::int64_t>& unprivileged_ranks,
                             double catalog_size, double window_error) {
  double lc = std::log(catalog_size);
  double s = 0.0;
  for (std::int64_t i : unprivileged_ranks) s += 1.0 / (static_cast<double>(i) * lc);
  return (1.0 - window_error) * s;
}

struct HitRateEstimate {
  double h_u{0.0};
  std::vector<double> h_p;
  double h_total{0.0};
};

struct LfruGeometry {
  std::vector<std::int64_t> unprivileged_ranks;
  std::vector<std::vector<std::int64_t>> partition_ranks;  // stored set per sub-partition
  std::vector<std::size_t> partition_sizes;
};

// Combined LFRU hit-rate estimate. The privileged term follows the printed
// per-partition average form
//   h_p^k = (1/|n_k|) sum_{n in partition k} (1 - exp(-v(n) T_k)),
// with T_k the characteristic time of a cache of size |n_k| facing the full
// rate vector. `request_share_weighted` instead weights each content's hit
// probability by its share of the total request rate, which keeps h_total a
// probability and is directly comparable to simulation.
inline HitRateEstimate lfru_hit_rate(const LfruGeometry& geometry,
                                     const std::vector<double>& popularity,
                                     double catalog_size, double window_error,
                                     bool request_share_weighted = false) {
  if (geometry.partition_ranks.size() != geometry.partition_sizes.size())
    throw std::domain_error("partition rank sets and sizes disagree");
  HitRateEstimate est;
  est.h_u = alfu_hit_bound(geometry.unprivileged_ranks, catalog_size, window_error);
  double total_rate = std::accumulate(popularity.begin(), popularity.end(), 0.0);
  for (std::size_t k = 0; k < geometry.partition_ranks.size(); ++k) {
    std::size_t cap = geometry.partition_sizes[k];
    const auto& ranks = geometry.partition_ranks[k];
    if (cap == 0 || ranks.size() > cap)
      throw std::domain_error("inconsistent partition geometry");
    double t_k;
    if (static_cast<double>(cap) >= static_cast<double>(popularity.size())) {
      t_k = std::numeric_limits<double>::infinity();
    } else {
      t_k = che_characteristic_time(static_cast<double>(cap), popularity)
                .characteristic_time;
    }
    double h = 0.0;
    for (std::int64_t rank : ranks) {
      if (rank < 1 || rank > static_cast<std::int64_t>(popularity.size()))
        throw std::domain_error("rank outside popularity vector");
      double v = popularity[static_cast<std::size_t>(rank - 1)];
      double p = content_hit_prob(v, t_k);
      h += request_share_weighted ? (v / total_rate) * p : p;
    }
    if (!request_share_weighted) h /= static_cast<double>(cap);
    est.h_p.push_back(h);
  }
  est.h_total = est.h_u + std::accumulate(est.h_p.begin(), est.h_p.end(), 0.0);
  return est;
}

struct SteadyStateOptions {
  double epsilon{0.001};
  int max_iterations{500};
  bool hard_assignment{false};  // occupy exactly the top-capacity ranks
};

struct SteadyStateResult {
  std::vector<double> forwarded_rates;              // lambda_j^f per node
  std::vector<std::vector<std::int64_t>> contents;  // top-occupancy rank sets
  int iterations{0};
  std::vector<double> final_ratios;                 // X(j,t+1)/X(j,t) at exit
  std::vector<double> worst_deviation_trace;        // max_j |ratio - 1| per iteration
};

// Fixed point of the network traffic equations: per-node per-content arrival
// rates propagate miss traffic along the routing trees, each node's occupancy
// follows its Che characteristic time, until the average cached popularity
// ratio X(j,t+1)/X(j,t) settles within [1-eps, 1+eps] at every node.
inline SteadyStateResult steady_state_solve(const Topology& topo,
                                            const std::vector<double>& direct_lambda,
                                            int cache_capacity,
                                            const PopularityModel& model,
                                            const SteadyStateOptions& opts = {}) {
  std::size_t n = static_cast<std::size_t>(topo.graph.node_count);
  if (direct_lambda.size() != n)
    throw std::invalid_argument("one direct arrival rate per node required");
  std::size_t c = static_cast<std::size_t>(model.catalog_size());
  if (topo.catalog_size() != model.catalog_size())
    throw std::invalid_argument("catalog size disagrees with topology");

  std::vector<int> pub_of(c);
  for (std::size_t i = 0; i < c; ++i)
    pub_of[i] = topo.publisher_of(static_cast<ContentId>(i + 1));

  std::vector<std::vector<double>> out(n, std::vector<double>(c, 0.0));
  std::vector<std::vector<double>> in_rate(n, std::vector<double>(c, 0.0));
  std::vector<std::vector<double>> p_hit(n, std::vector<double>(c, 0.0));
  std::vector<double> x_prev(n, 0.0);
  std::vector<double> ratios(n, 0.0);
  std::vector<double> trace;

  int iter = 0;
  bool converged = false;
  for (; iter < opts.max_iterations; ++iter) {
    // (2),(4) arrivals = direct consumer traffic + neighbor forwards
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < c; ++i)
        in_rate[j][i] = direct_lambda[j] * model.pmf(static_cast<std::int64_t>(i + 1));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < c; ++i) {
        int hop = topo.next_hop[static_cast<std::size_t>(pub_of[i])][j];
        if (hop >= 0) in_rate[static_cast<std::size_t>(hop)][i] += out[j][i];
      }

    // (3) refresh occupancy via the characteristic time of each node
    for (std::size_t j = 0; j < n; ++j) {
      if (cache_capacity <= 0) {
        std::fill(p_hit[j].begin(), p_hit[j].end(), 0.0);
      } else if (static_cast<std::size_t>(cache_capacity) >= c) {
        std::fill(p_hit[j].begin(), p_hit[j].end(), 1.0);
      } else {
        double t_j = che_characteristic_time(static_cast<double>(cache_capacity),
                                             in_rate[j])
                         .characteristic_time;
        for (std::size_t i = 0; i < c; ++i)
          p_hit[j][i] = content_hit_prob(in_rate[j][i], t_j);
        if (opts.hard_assignment) {
          std::vector<std::size_t> order(c);
          std::iota(order.begin(), order.end(), std::size_t{0});
          std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return in_rate[j][a] > in_rate[j][b] ||
                   (in_rate[j][a] == in_rate[j][b] && a < b);
          });
          std::fill(p_hit[j].begin(), p_hit[j].end(), 0.0);
          for (int k = 0; k < cache_capacity; ++k)
            p_hit[j][order[static_cast<std::size_t>(k)]] = 1.0;
        }
      }
      for (std::size_t i = 0; i < c; ++i)
        out[j][i] = in_rate[j][i] * (1.0 - p_hit[j][i]);
    }

    // (5) steady-state test on the average popularity of cached content
    bool ok = true;
    for (std::size_t j = 0; j < n; ++j) {
      double x = 0.0;
      for (std::size_t i = 0; i < c; ++i)
        x += p_hit[j][i] * model.pmf(static_cast<std::int64_t>(i + 1));
      x /= std::max(1.0, static_cast<double>(cache_capacity));
      ratios[j] = (x_prev[j] > 0.0) ? x / x_prev[j] : 0.0;
      if (!(ratios[j] >= 1.0 - opts.epsilon && ratios[j] <= 1.0 + opts.epsilon))
        ok = false;
      x_prev[j] = x;
    }
    double worst = 0.0;
    for (double r : ratios) worst = std::max(worst, std::abs(r - 1.0));
    trace.push_back(worst);
    if (ok && iter > 0) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged) {
    double worst = 0.0;
    for (double r : ratios) worst = std::max(worst, std::abs(r - 1.0));
    throw std::runtime_error("steady-state solver did not converge; worst ratio deviation " +
                             std::to_string(worst));
  }

  SteadyStateResult result;
  result.iterations = iter;
  result.final_ratios = ratios;
  result.worst_deviation_trace = std::move(trace);
  result.forwarded_rates.resize(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    result.forwarded_rates[j] =
        std::accumulate(out[j].begin(), out[j].end(), 0.0);
  result.contents.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::size_t> order(c);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return p_hit[j][a] > p_hit[j][b] || (p_hit[j][a] == p_hit[j][b] && a < b);
    });
    for (int k = 0; k < cache_capacity && k < static_cast<int>(c); ++k)
      result.contents[j].push_back(static_cast<std::int64_t>(order[static_cast<std::size_t>(k)] + 1));
    std::sort(result.contents[j].begin(), result.contents[j].end());
  }
  return result;
}

// Quantile-quantile pairing of two rate vectors, both sorted ascending.
inline std::vector<std::tuple<double, double, double>> qq_pairs(
    std::vector<double> theory, std::vector<double> sim) {
  if (theory.size() != sim.size())
    throw std::domain_error("qq vectors must have equal length");
  std::sort(theory.begin(), theory.end());
  std::sort(sim.begin(), sim.end());
  std::vector<std::tuple<double, double, double>> pairs;
  for (std::size_t i = 0; i < theory.size(); ++i) {
    double q = (static_cast<double>(i) + 0.5) / static_cast<double>(theory.size());
    pairs.emplace_back(q, theory[i], sim[i]);
  }
  return pairs;
}

}  // namespace cachenet
