#include <catch2/catch.hpp>

#include <cmath>
#include <sstream>

#include "cgedg/measures.hpp"
#include "cgedg/rng.hpp"

using namespace cgedg;

namespace {

GridMeasure random_measure(Rng& rng, double eps, int max_bin) {
  std::vector<double> w(static_cast<std::size_t>(max_bin) + 1, 0.0);
  double total = 0.0;
  for (auto& v : w) {
    v = rng.uniform() < 0.4 ? rng.uniform() : 0.0;
    total += v;
  }
  if (total == 0.0) {
    w[0] = 1.0;
    total = 1.0;
  }
  for (auto& v : w) v /= total;
  return density_measure(eps, std::move(w));
}

// the discrete tail formula used by empirical measures on a shared grid:
// eps * sum_i |sum_{j>=i} (c - c')(j eps)|
double w1_common_grid(const GridMeasure& a, const GridMeasure& b) {
  REQUIRE(a.eps == b.eps);
  const std::size_t n = std::max(a.weights.size(), b.weights.size());
  double acc = 0.0, suffix = 0.0;
  std::vector<double> diff(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double wa = i < a.weights.size() ? a.weights[i] : 0.0;
    const double wb = i < b.weights.size() ? b.weights[i] : 0.0;
    diff[i] = wa - wb;
  }
  for (std::size_t i = n; i-- > 1;) {
    suffix += diff[i];
    acc += std::abs(suffix);
  }
  return a.eps * acc;
}

}  // namespace

TEST_CASE("tail distributions of atomic measures", "[measures]") {
  auto d0 = dirac(1.0, 0);
  auto t0 = tail(d0);
  CHECK(t0(0.0) == 1.0);
  CHECK(t0(0.5) == 0.0);

  // (1/2) delta_0 + (1/2) delta_2 on eps = 1
  GridMeasure m = density_measure(1.0, {0.5, 0.0, 0.5});
  auto tm = tail(m);
  CHECK(tm(0.0) == 1.0);
  CHECK(tm(1.0) == Approx(0.5));
  CHECK(tm(2.0) == Approx(0.5));
  CHECK(tm(2.5) == 0.0);

  GridMeasure u = density_measure(0.5, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  auto tu = tail(u);
  CHECK(tu(0.0) == 1.0);
  CHECK(tu(0.25) == Approx(2.0 / 3));
  CHECK(tu(0.75) == Approx(1.0 / 3));
  CHECK(tu(1.25) == 0.0);
}

TEST_CASE("w1 closed forms", "[measures]") {
  auto m = density_measure(1.0, {0.5, 0.0, 0.5});
  CHECK(w1(m, m) == 0.0);

  CHECK(w1(dirac(1.0, 0), dirac(1.0, 3)) == Approx(3.0));
  CHECK(w1(dirac(0.25, 0), dirac(0.5, 6)) == Approx(3.0));  // mixed grids

  auto nu = dirac(1.0, 1);
  CHECK(w1(m, nu) == Approx(1.0));
}

TEST_CASE("w1 is a metric on random measures", "[measures]") {
  Rng rng(20240811, 0);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = random_measure(rng, 0.25, 12);
    auto b = random_measure(rng, 0.25, 12);
    auto c = random_measure(rng, 0.25, 12);
    const double ab = w1(a, b), ba = w1(b, a);
    const double ac = w1(a, c), cb = w1(c, b);
    CHECK(ab >= 0.0);
    CHECK(ab == Approx(ba).margin(1e-12));
    CHECK(ab <= ac + cb + 1e-12);
    CHECK(moment(a, [](double) { return 1.0; }) == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("w1 matches the common-grid suffix formula", "[measures]") {
  Rng rng(7, 1);
  for (int trial = 0; trial < 40; ++trial) {
    auto a = random_measure(rng, 0.5, 20);
    auto b = random_measure(rng, 0.5, 20);
    CHECK(w1(a, b) == Approx(w1_common_grid(a, b)).margin(1e-12));
  }
}

TEST_CASE("w1 matches the quantile coupling on mixed grids", "[measures]") {
  // independent route: W1 = int_0^1 |F_mu^{-1}(u) - F_nu^{-1}(u)| du,
  // evaluated exactly by walking both discrete quantile functions
  auto quantile_w1 = [](const GridMeasure& a, const GridMeasure& b) {
    std::vector<std::pair<double, double>> qa, qb;  // (position, weight)
    for (std::size_t k = 0; k < a.weights.size(); ++k)
      if (a.weights[k] != 0.0) qa.push_back({k * a.eps, a.weights[k]});
    for (std::size_t k = 0; k < b.weights.size(); ++k)
      if (b.weights[k] != 0.0) qb.push_back({k * b.eps, b.weights[k]});
    double acc = 0.0;
    std::size_t i = 0, j = 0;
    double ra = qa[0].second, rb = qb[0].second;  // mass left in each atom
    while (i < qa.size() && j < qb.size()) {
      const double chunk = std::min(ra, rb);
      acc += chunk * std::abs(qa[i].first - qb[j].first);
      ra -= chunk;
      rb -= chunk;
      if (ra <= 1e-15 && ++i < qa.size()) ra = qa[i].second;
      if (rb <= 1e-15 && ++j < qb.size()) rb = qb[j].second;
    }
    return acc;
  };

  Rng rng(8, 2);
  for (int trial = 0; trial < 40; ++trial) {
    auto a = random_measure(rng, 0.3, 18);
    auto b = random_measure(rng, 0.7, 11);  // incommensurate grids
    CHECK(w1(a, b) == Approx(quantile_w1(a, b)).margin(1e-10));
  }
}

TEST_CASE("moments", "[measures]") {
  CHECK(second_moment(dirac(1.0, 3)) == Approx(9.0));

  // empirical measure of a configuration with N=4, L=2, eps=0.5 (sizes 1, 3)
  auto emp = empirical_from_counts(0.5, {0, 1, 0, 1}, 2);
  CHECK(first_moment(emp) == Approx(4 * 0.5 / 2));

  auto m = density_measure(1.0, {0.5, 0.0, 0.5});
  auto f = [](double x) { return (1.0 + x) * std::log1p(x); };
  CHECK(moment(m, f) == Approx(0.5 * 3.0 * std::log(3.0)));
  CHECK(moment(m, [](double) { return 1.0; }) == Approx(1.0));
}

TEST_CASE("exchange gradient identities", "[measures]") {
  auto id = [](double x) { return x; };
  auto one = [](double) { return 1.0; };
  auto sq = [](double x) { return x * x; };

  CHECK(exchange_gradient(id, 3.0, 1.0, 2.0) == 0.0);
  CHECK(exchange_gradient(one, 5.0, 0.0, 4.0) == 0.0);
  CHECK(exchange_gradient(sq, 3.0, 1.0, 1.0) == Approx(-2.0));
  CHECK_THROWS_AS(exchange_gradient(id, 1.0, 1.0, 2.0), std::invalid_argument);

  // |gamma . f| <= 2 z Lip(f) for Lipschitz f
  Rng rng(99, 0);
  auto lip = [](double x) { return std::min(x, 2.0); };  // Lip = 1
  for (int i = 0; i < 200; ++i) {
    const double x = 10.0 * rng.uniform();
    const double y = 10.0 * rng.uniform();
    const double z = x * rng.uniform();
    CHECK(std::abs(exchange_gradient(lip, x, y, z)) <= 2.0 * z + 1e-12);
  }
}

TEST_CASE("validate flags bad measures", "[measures]") {
  auto good = density_measure(1.0, {0.5, 0.5});
  CHECK(validate(good).ok);

  auto leaky = density_measure(1.0, {0.5, 0.4});
  CHECK_FALSE(validate(leaky).ok);

  GridMeasure emp = empirical_from_counts(1.0, {1, 1}, 2);
  CHECK(validate(emp).ok);
  emp.weights[0] = 0.3;
  emp.weights[1] = 0.7;
  CHECK_FALSE(validate(emp).ok);
}

TEST_CASE("csv and binary round trips", "[measures]") {
  GridMeasure m = density_measure(0.125, {0.25, 0.0, 0.5, 0.25});

  std::ostringstream csv;
  to_csv(m, csv);
  CHECK(csv.str() == "mass,weight\n0,0.25\n0.25,0.5\n0.375,0.25\n");

  std::stringstream bin(std::ios::in | std::ios::out | std::ios::binary);
  write_checkpoint(m, bin);
  auto back = read_checkpoint(bin);
  CHECK(back.eps == m.eps);
  REQUIRE(back.weights.size() == m.weights.size());
  for (std::size_t i = 0; i < m.weights.size(); ++i)
    CHECK(back.weights[i] == m.weights[i]);

  std::stringstream junk(std::string("not a checkpoint at all"),
                         std::ios::in | std::ios::binary);
  CHECK_THROWS_AS(read_checkpoint(junk), std::runtime_error);
}
