#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "cachenet/workload.hpp"

namespace cachenet {

enum class WindowMethod { Chebyshev, Clt, CltNewton };

struct WindowEstimate {
  std::int64_t w_requests;  // W, in request arrivals
  double w_time;            // W_T, seconds
  double epsilon;
  double conf;              // percent, 0 < conf < 100
  WindowMethod method;
};

// Inverse standard normal CDF (Acklam's rational approximation, ~1e-9).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile argument must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, r, x;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    q = p - 0.5;
    r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step against the forward CDF tightens the tails.
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

inline void check_window_args(double epsilon, double conf) {
  if (epsilon <= 0.0) throw std::domain_error("epsilon must be > 0");
  if (conf <= 0.0 || conf >= 100.0) throw std::domain_error("conf must be in (0,100)");
}

// Chebyshev window bound: W = 100 / (4 eps^2 (100 - Conf)), rounded up.
inline std::int64_t chebyshev_window(double epsilon, double conf) {
  check_window_args(epsilon, conf);
  double w = 100.0 / (4.0 * epsilon * epsilon * (100.0 - conf));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(w)));
}

// CLT window: q is the two-sided upper quantile, W = ceil((q / (2 eps))^2).
inline std::int64_t clt_window(double epsilon, double conf) {
  check_window_args(epsilon, conf);
  double q = normal_quantile((100.0 + conf) / 200.0);
  double w = (q / (2.0 * epsilon)) * (q / (2.0 * epsilon));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(w)));
}

// Newton refinement of the window length against
//   F(W) = E(tau_hat at W) - a_w - epsilon
// where E is the expected per-window request count for `rank` and a_w is the
// supplied empirical per-window average for that content.
inline std::int64_t newton_refine_window(std::int64_t w0,
                                         const PopularityModel& model,
                                         const RequestProcess& process,
                                         std::int64_t rank, double epsilon,
                                         double a_w) {
  if (w0 < 1) throw std::invalid_argument("w0 must be >= 1");
  double p = request_probability(model, process, rank);
  auto f = [&](double w) { return w * p - a_w - epsilon; };
  double w = static_cast<double>(w0);
  if (p <= 0.0) {
    // F'(W) = 0 everywhere: bisection fallback on [1, 10 w0].
    double lo = 1.0, hi = 10.0 * static_cast<double>(w0);
    if (f(lo) * f(hi) > 0.0)
      throw std::runtime_error("window refinement did not converge");
    for (int i = 0; i < 200; ++i) {
      double mid = 0.5 * (lo + hi);
      (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
    }
    w = 0.5 * (lo + hi);
  } else {
    bool converged = false;
    for (int i = 0; i < 100; ++i) {
      double step = f(w) / p;
      w -= step;
      if (std::abs(step) < 0.5) {
        converged = true;
        break;
      }
    }
    if (!converged) throw std::runtime_error("window refinement did not converge");
  }
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(w)));
}

// Observation time: W_T = max(W / lambda, average miss delay).
inline double window_time(std::int64_t w, double lambda_j, double avg_miss_delay) {
  if (lambda_j <= 0.0) throw std::invalid_argument("lambda_j must be > 0");
  if (avg_miss_delay < 0.0) throw std::invalid_argument("avg_miss_delay must be >= 0");
  return std::max(static_cast<double>(w) / lambda_j, avg_miss_delay);
}

// Window-LFU window length from the cache size and catalog size (theta = 1):
//   W = max(n^3 ln n ln C ln(1/eps), n ln^2 C ln(1/eps)), rounded up.
inline std::int64_t wlfu_window(std::int64_t cache_size, double catalog_size,
                                double epsilon) {
  if (cache_size < 2 || catalog_size < 2.0)
    throw std::invalid_argument("cache_size and catalog_size must be >= 2");
  if (epsilon >= 1.0 || epsilon <= 0.0)
    throw std::domain_error("epsilon must be in (0,1)");
  double n = static_cast<double>(cache_size);
  double lc = std::log(catalog_size);
  double le = std::log(1.0 / epsilon);
  double w = std::max(n * n * n * std::log(n) * lc * le, n * lc * lc * le);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(w)));
}

}  // namespace cachenet
