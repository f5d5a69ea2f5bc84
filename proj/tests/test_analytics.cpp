#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "cachenet/analytics.hpp"
#include "cachenet/cache.hpp"
#include "cachenet/topology.hpp"

using namespace cachenet;

namespace {

// independent bisection oracle for the characteristic time
double che_bisect(double size, const std::vector<double>& v) {
  auto occ = [&](double t) {
    double s = 0.0;
    for (double x : v) s += 1.0 - std::exp(-x * t);
    return s;
  };
  double lo = 0.0, hi = 1.0;
  while (occ(hi) < size) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (occ(mid) < size ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("expected delay outcome enumeration") {
  CHECK(expected_delay({1.0}, {1.0}) == doctest::Approx(1.0));
  // no cache ever hits: the publisher at cumulative delay D serves
  CHECK(expected_delay({1.0, 2.0, 3.5}, {0.0, 0.0, 0.0}) == doctest::Approx(3.5));
  // two hops, P = (0.5, 0.5), d = (1, 2):
  // 0.5*1 + 0.5*0.5*2 + 0.25*2 (publisher) = 1.5
  CHECK(expected_delay({1.0, 2.0}, {0.5, 0.5}) == doctest::Approx(1.5));
  CHECK_THROWS_AS(expected_delay({}, {}), std::domain_error);
  CHECK_THROWS_AS(expected_delay({1.0}, {1.5}), std::domain_error);
}

TEST_CASE("expected delay bounds and monotonicity") {
  std::vector<double> d{1.0, 2.0, 3.0};
  std::vector<double> p{0.3, 0.2, 0.4};
  double base = expected_delay(d, p);
  CHECK(base >= d.front() * p.front());
  CHECK(base <= d.back());
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto p2 = p;
    p2[i] += 0.1;
    CHECK(expected_delay(d, p2) <= base);
  }
}

TEST_CASE("che solver matches the uniform closed form") {
  for (double s : {1.0, 5.0, 50.0}) {
    double v = 0.3;
    std::vector<double> pop(100, v);
    auto sol = che_characteristic_time(s, pop);
    CHECK_FALSE(sol.saturated);
    CHECK(sol.residual < 1e-9);
    double expected = -std::log(1.0 - s / 100.0) / v;
    CHECK(sol.characteristic_time == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("che solver agrees with an independent bisection oracle") {
  std::vector<double> v{0.5, 0.3, 0.2};
  auto sol = che_characteristic_time(1.0, v);
  CHECK(sol.residual < 1e-9);
  CHECK(sol.characteristic_time == doctest::Approx(che_bisect(1.0, v)).epsilon(1e-9));

  // a zipf-shaped rate vector at desk scale
  PopularityModel m(0.8, 2000);
  std::vector<double> rates;
  for (std::int64_t i = 1; i <= 2000; ++i) rates.push_back(85.0 * m.pmf(i));
  auto big = che_characteristic_time(200.0, rates);
  CHECK(big.residual < 1e-9);
  CHECK(big.iterations <= 50);
  CHECK(big.characteristic_time ==
        doctest::Approx(che_bisect(200.0, rates)).epsilon(1e-8));
}

TEST_CASE("che saturation when the cache holds everything") {
  std::vector<double> v{0.5, 0.3, 0.2};
  auto sol = che_characteristic_time(3.0, v);
  CHECK(sol.saturated);
  auto more = che_characteristic_time(5.0, v);
  CHECK(more.saturated);
  // approaching saturation the time blows up
  double t1 = che_characteristic_time(2.9, v).characteristic_time;
  double t2 = che_characteristic_time(2.99, v).characteristic_time;
  CHECK(t2 > t1);
  CHECK_THROWS_AS(che_characteristic_time(0.0, v), std::invalid_argument);
  CHECK_THROWS_AS(che_characteristic_time(1.0, std::vector<double>{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(che_characteristic_time(1.0, std::vector<double>{0.5, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("content hit probability") {
  CHECK(content_hit_prob(0.0, 5.0) == doctest::Approx(0.0));
  CHECK(content_hit_prob(0.5, 2.0) == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(content_hit_prob(1e9, 1e9) == doctest::Approx(1.0));
  CHECK(content_hit_prob(0.5, 3.0) > content_hit_prob(0.5, 2.0));
  CHECK(content_hit_prob(0.6, 2.0) > content_hit_prob(0.5, 2.0));
  CHECK_THROWS_AS(content_hit_prob(-0.1, 1.0), std::domain_error);
}

TEST_CASE("filtered traffic lengthens the characteristic time") {
  // selection filtering removes part of each content's rate, so the same
  // partition size needs a longer horizon to fill
  PopularityModel m(1.0, 100);
  std::vector<double> full, filtered;
  for (std::int64_t i = 1; i <= 100; ++i) {
    double v = 50.0 * m.pmf(i);
    full.push_back(v);
    filtered.push_back(v * 0.25);
  }
  double t_full = che_characteristic_time(10.0, full).characteristic_time;
  double t_filtered = che_characteristic_time(10.0, filtered).characteristic_time;
  CHECK(t_filtered > t_full);
}

TEST_CASE("alfu hit bound harmonic oracle") {
  CHECK(alfu_hit_bound({}, 5000.0, 0.1) == doctest::Approx(0.0));
  CHECK(alfu_hit_bound({1}, std::exp(1.0), 0.0) == doctest::Approx(1.0));
  std::vector<std::int64_t> ranks(10);
  std::iota(ranks.begin(), ranks.end(), 1);
  double h10 = 0.0;
  for (int i = 1; i <= 10; ++i) h10 += 1.0 / i;  // 2.9290
  double expected = 0.9 * h10 / std::log(5000.0);
  CHECK(alfu_hit_bound(ranks, 5000.0, 0.1) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.3096).epsilon(1e-3));
}

TEST_CASE("lfru hit rate composition") {
  PopularityModel m(1.0, 20);
  std::vector<double> pop;
  for (std::int64_t i = 1; i <= 20; ++i) pop.push_back(m.pmf(i));

  // K = 0: only the unprivileged bound remains
  LfruGeometry none{{1, 2}, {}, {}};
  auto est0 = lfru_hit_rate(none, pop, 20.0, 0.1);
  CHECK(est0.h_total == doctest::Approx(est0.h_u));
  CHECK(est0.h_p.empty());

  // one saturated sub-partition: T -> inf, h_p -> 1
  LfruGeometry sat{{}, {{1, 2, 3}}, {20}};
  auto est1 = lfru_hit_rate(sat, pop, 20.0, 0.1);
  CHECK(est1.h_p[0] == doctest::Approx(3.0 / 20.0));  // printed average over cap
  auto est1w = lfru_hit_rate(sat, pop, 20.0, 0.1, true);
  double share = pop[0] + pop[1] + pop[2];
  CHECK(est1w.h_p[0] == doctest::Approx(share));

  // additivity holds exactly
  LfruGeometry geo{{5, 6}, {{1, 2}, {3, 4}}, {2, 2}};
  auto est = lfru_hit_rate(geo, pop, 20.0, 0.1);
  CHECK(est.h_total ==
        doctest::Approx(est.h_u + est.h_p[0] + est.h_p[1]).epsilon(1e-15));
  CHECK(est.h_p.size() == 2);
  CHECK(est.h_p[0] > est.h_p[1]);  // hotter ranks hit more

  LfruGeometry bad{{1}, {{1, 2, 3}}, {2}};
  CHECK_THROWS_AS(lfru_hit_rate(bad, pop, 20.0, 0.1), std::domain_error);
  LfruGeometry mismatched{{1}, {{1}}, {}};
  CHECK_THROWS_AS(lfru_hit_rate(mismatched, pop, 20.0, 0.1), std::domain_error);
}

TEST_CASE("weighted lfru estimate tracks a single-cache simulation") {
  // C=20, cache 6 = 2 unprivileged + 2x2 privileged, alpha=1. The window is
  // short (10 requests) so the cache churns at the error level the bound's
  // (1-eps) slack accounts for.
  PopularityModel m(1.0, 20);
  std::mt19937_64 gen(23);
  LfruCache cache(6, 1.0 / 3.0, 2, 0.2);
  long n = 400000, hits = 0, measured = 0;
  double t = 0.0;
  for (long i = 0; i < n; ++i) {
    t += 0.02;
    ContentId id = m.sample(gen);
    bool hit = cache.on_request(id, t);
    if (!hit) cache.admit(id, t);
    if (i >= n / 5) {  // warmup discarded
      ++measured;
      hits += hit;
    }
  }
  double sim_rate = static_cast<double>(hits) / static_cast<double>(measured);

  // popularity-order placement: the most demanded ranks fill the cache
  LfruGeometry geo{{1, 2}, {{3, 4}, {5, 6}}, {2, 2}};
  std::vector<double> pop;
  for (std::int64_t i = 1; i <= 20; ++i) pop.push_back(m.pmf(i) / 0.02);
  auto est = lfru_hit_rate(geo, pop, 20.0, 0.1, true);
  CHECK(std::abs(est.h_total - sim_rate) <= 0.05);
}

TEST_CASE("steady state on a single node") {
  TopologyParams params;
  params.nodes = 1;
  params.publishers = 1;
  params.items_per_publisher = 50;
  auto topo = build_topology(params);
  PopularityModel m(0.8, 50);
  auto res = steady_state_solve(topo, {40.0}, 10, m);
  // lambda^f = lambda * sum_i pmf(i) (1 - p_hit(i)) with the node's Che time
  std::vector<double> rates;
  for (std::int64_t i = 1; i <= 50; ++i) rates.push_back(40.0 * m.pmf(i));
  double t_j = che_characteristic_time(10.0, rates).characteristic_time;
  double expect = 0.0;
  for (double v : rates) expect += v * std::exp(-v * t_j);
  CHECK(res.forwarded_rates[0] == doctest::Approx(expect).epsilon(1e-9));
  for (double r : res.final_ratios) CHECK(std::abs(r - 1.0) <= 0.001);
}

TEST_CASE("steady state on a two-node line matches the flow equations") {
  Topology topo;
  topo.graph.node_count = 2;
  topo.graph.adj.resize(2);
  topo.graph.delay.resize(2);
  topo.graph.add_edge(0, 1, 0.01);
  topo.publishers = {{1, 1, 1, 30}};  // publisher behind node 1
  build_routing(topo);
  PopularityModel m(1.0, 30);
  std::vector<double> lambda{20.0, 10.0};
  auto res = steady_state_solve(topo, lambda, 5, m);

  // hand-iterated oracle: node 0 sees only direct traffic, node 1 sees
  // direct traffic plus node 0 misses
  std::vector<double> v0;
  for (std::int64_t i = 1; i <= 30; ++i) v0.push_back(lambda[0] * m.pmf(i));
  double t0 = che_characteristic_time(5.0, v0).characteristic_time;
  std::vector<double> out0;
  for (double v : v0) out0.push_back(v * std::exp(-v * t0));
  double f0 = std::accumulate(out0.begin(), out0.end(), 0.0);
  CHECK(res.forwarded_rates[0] == doctest::Approx(f0).epsilon(1e-9));

  std::vector<double> v1;
  for (std::int64_t i = 1; i <= 30; ++i)
    v1.push_back(lambda[1] * m.pmf(i) + out0[static_cast<std::size_t>(i - 1)]);
  double t1 = che_characteristic_time(5.0, v1).characteristic_time;
  double f1 = 0.0;
  for (double v : v1) f1 += v * std::exp(-v * t1);
  CHECK(res.forwarded_rates[1] == doctest::Approx(f1).epsilon(1e-6));
}

TEST_CASE("steady state at desk scale converges without oscillation") {
  TopologyParams params;  // 30-node BA, 5 publishers, 5000 contents
  params.items_per_publisher = 200;  // keep the run quick: C = 1000
  auto topo = build_topology(params);
  PopularityModel m(0.8, topo.catalog_size());
  std::vector<double> lambda(30);
  std::mt19937_64 gen(4);
  for (auto& l : lambda) l = 70.0 + 30.0 * uniform01(gen);
  auto res = steady_state_solve(topo, lambda, 50, m);
  CHECK(res.iterations <= 500);
  for (double r : res.final_ratios) {
    CHECK(r >= 0.999);
    CHECK(r <= 1.001);
  }
  // worst deviation settles monotonically over the final stretch
  const auto& tr = res.worst_deviation_trace;
  REQUIRE(tr.size() >= 2);
  std::size_t tail = std::min<std::size_t>(10, tr.size() - 1);
  for (std::size_t i = tr.size() - tail; i < tr.size(); ++i)
    CHECK(tr[i] <= tr[i - 1] + 1e-12);
  // every cached set at capacity
  for (const auto& set : res.contents) CHECK(set.size() == 50);
}

TEST_CASE("steady state error paths") {
  TopologyParams params;
  params.nodes = 1;
  params.publishers = 1;
  params.items_per_publisher = 10;
  auto topo = build_topology(params);
  PopularityModel m(0.8, 10);
  CHECK_THROWS_AS(steady_state_solve(topo, {1.0, 2.0}, 2, m), std::invalid_argument);
  PopularityModel wrong(0.8, 11);
  CHECK_THROWS_AS(steady_state_solve(topo, {1.0}, 2, wrong), std::invalid_argument);
  SteadyStateOptions opts;
  opts.max_iterations = 0;
  CHECK_THROWS_AS(steady_state_solve(topo, {1.0}, 2, m, opts), std::runtime_error);
}

TEST_CASE("hard assignment caches exactly the top ranks") {
  TopologyParams params;
  params.nodes = 1;
  params.publishers = 1;
  params.items_per_publisher = 30;
  auto topo = build_topology(params);
  PopularityModel m(1.0, 30);
  SteadyStateOptions opts;
  opts.hard_assignment = true;
  auto res = steady_state_solve(topo, {25.0}, 5, m, opts);
  CHECK(res.contents[0] == std::vector<std::int64_t>{1, 2, 3, 4, 5});
}

TEST_CASE("qq pairing") {
  std::vector<double> a{3.0, 1.0, 2.0};
  auto same = qq_pairs(a, a);
  REQUIRE(same.size() == 3);
  CHECK(std::get<0>(same[0]) == doctest::Approx(0.5 / 3.0));
  for (const auto& [q, th, sm] : same) CHECK(th == sm);

  std::vector<double> shifted{3.5, 1.5, 2.5};
  auto off = qq_pairs(a, shifted);
  for (const auto& [q, th, sm] : off) CHECK(sm == doctest::Approx(th + 0.5));
  CHECK(std::get<1>(off[0]) == doctest::Approx(1.0));  // sorted ascending

  CHECK_THROWS_AS(qq_pairs({1.0}, {1.0, 2.0}), std::domain_error);
}
