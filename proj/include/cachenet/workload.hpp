#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace cachenet {

using ContentId = std::int64_t;

// Uniform double in [0,1) from the top 53 bits of the generator output.
// std::uniform_real_distribution is implementation-defined; this is not.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Truncated zeta sum: sum_{i=1..c} i^(-a), accumulated smallest term first.
inline double zeta_truncated(double a, std::int64_t c) {
  double sum = 0.0;
  for (std::int64_t i = c; i >= 1; --i) {
    sum += std::pow(static_cast<double>(i), -a);
  }
  return sum;
}

// Zipf-like popularity over a finite catalog: rank i requested with
// probability i^(-alpha) / zeta(alpha).
class PopularityModel {
 public:
  PopularityModel(double alpha, std::int64_t catalog_size)
      : alpha_(alpha), catalog_size_(catalog_size) {
    if (catalog_size < 1) throw std::invalid_argument("catalog_size must be >= 1");
    zeta_ = zeta_truncated(alpha, catalog_size);
    pmf_.resize(static_cast<std::size_t>(catalog_size));
    cdf_.resize(static_cast<std::size_t>(catalog_size));
    double acc = 0.0;
    for (std::int64_t i = 1; i <= catalog_size; ++i) {
      double p = std::pow(static_cast<double>(i), -alpha) / zeta_;
      pmf_[static_cast<std::size_t>(i - 1)] = p;
      acc += p;
      cdf_[static_cast<std::size_t>(i - 1)] = acc;
    }
    cdf_.back() = 1.0;
  }

  double alpha() const { return alpha_; }
  std::int64_t catalog_size() const { return catalog_size_; }
  double zeta() const { return zeta_; }

  double pmf(std::int64_t rank) const {
    if (rank < 1 || rank > catalog_size_)
      throw std::domain_error("rank out of range");
    return pmf_[static_cast<std::size_t>(rank - 1)];
  }

  // (mean, variance) of the rank distribution, zeta sums truncated at C.
  std::pair<double, double> moments() const {
    double za1 = zeta_truncated(alpha_ - 1.0, catalog_size_);
    double za2 = zeta_truncated(alpha_ - 2.0, catalog_size_);
    double mean = za1 / zeta_;
    double var = za2 / zeta_ - mean * mean;
    return {mean, var};
  }

  // Inverse-CDF sample of a content rank.
  ContentId sample(std::mt19937_64& gen) const {
    double u = uniform01(gen);
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<ContentId>(it - cdf_.begin()) + 1;
  }

 private:
  double alpha_;
  std::int64_t catalog_size_;
  double zeta_;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
};

// Slotted Poisson request process at one node.
struct RequestProcess {
  double node_rate;   // lambda_j, requests/second
  double slot;        // delta, seconds
  std::uint64_t seed;
};

struct RequestEvent {
  double time;
  int origin_node;
  ContentId content;
};

// Probability that the arrival in one slot is a request for `rank`.
inline double request_probability(const PopularityModel& model,
                                  const RequestProcess& process,
                                  std::int64_t rank) {
  if (process.node_rate < 0.0 || process.slot <= 0.0)
    throw std::invalid_argument("node_rate must be >= 0 and slot > 0");
  double ld = process.node_rate * process.slot;
  if (ld > 1.0 + 1e-12)
    throw std::invalid_argument("lambda*delta must be <= 1 for the slotted model");
  return ld * model.pmf(rank);
}

// Expected number of requests for `rank` among window_len slots.
inline double expected_window_requests(const PopularityModel& model,
                                       const RequestProcess& process,
                                       std::int64_t rank,
                                       std::int64_t window_len) {
  if (window_len < 1) throw std::invalid_argument("window_len must be >= 1");
  return static_cast<double>(window_len) * request_probability(model, process, rank);
}

// Poisson stream of Zipf-distributed requests over [0, duration).
inline std::vector<RequestEvent> generate_stream(const PopularityModel& model,
                                                 const RequestProcess& process,
                                                 double duration,
                                                 int origin_node = 0) {
  if (duration <= 0.0) throw std::invalid_argument("duration must be > 0");
  if (process.node_rate <= 0.0) throw std::invalid_argument("node_rate must be > 0");
  std::mt19937_64 gen(process.seed);
  std::vector<RequestEvent> events;
  double t = 0.0;
  for (;;) {
    double u = uniform01(gen);
    t += -std::log1p(-u) / process.node_rate;
    if (t >= duration) break;
    events.push_back({t, origin_node, model.sample(gen)});
  }
  return events;
}

}  // namespace cachenet
