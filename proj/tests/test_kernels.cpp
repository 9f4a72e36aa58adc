#include <catch2/catch.hpp>

#include <cmath>

#include "cgedg/kernels.hpp"

using namespace cgedg;

TEST_CASE("builtin kernels evaluate their closed forms", "[kernels]") {
  auto constant = builtin_kernel("constant", {{"kappa0", 1.0}});
  CHECK(constant.eval(2.0, 3.0, 1.0) == Approx(std::exp(-1.0)));

  auto expdiff = builtin_kernel("expdiff");
  CHECK(expdiff.eval(1.0, 2.0, 1.0) == 0.0);
  CHECK(expdiff.eval(0.5, 7.0, 0.5) == 0.0);
  CHECK(expdiff.eval(3.0, 3.0, 3.0) == 0.0);

  auto product = builtin_kernel("product", {{"kappa0", 1.0}, {"a", 1.0}, {"b", 1.0}});
  CHECK(product.eval(1.0, 1.0, 0.0) == Approx(4.0));

  CHECK_THROWS_AS(builtin_kernel("nope"), std::invalid_argument);
  CHECK_THROWS_AS(builtin_kernel("product", {{"a", 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(builtin_kernel("expdiff", {{"kappa0", 2.0}}), std::invalid_argument);
}

TEST_CASE("builtin kernels vanish beyond the z > x diagonal", "[kernels]") {
  const auto grid = log_grid();
  for (const char* name : {"constant", "product", "expdiff"}) {
    auto k = builtin_kernel(name);
    for (double x : grid)
      for (double y : grid)
        for (double z : grid)
          if (z > x) REQUIRE(k.eval(x, y, z) == 0.0);
  }
}

TEST_CASE("separable form agrees with eval", "[kernels]") {
  for (const char* name : {"constant", "product", "expdiff"}) {
    auto k = builtin_kernel(name, {{"kappa0", 0.7}, {"a", 0.5}, {"b", 0.25}});
    REQUIRE(k.separable());
    for (double x : log_grid(0.01, 100.0, 9))
      for (double y : log_grid(0.01, 100.0, 9))
        for (double z : {0.0, 0.3 * x, x}) {
          const double direct = k.eval(x, y, z);
          const double split = k.target_factor(y) * k.source_factor(x, z);
          REQUIRE(split == Approx(direct).margin(1e-14));
        }
  }
}

TEST_CASE("check_growth_bound separates conforming and growing kernels", "[kernels]") {
  auto expdiff = builtin_kernel("expdiff");
  auto rep = check_growth_bound(expdiff);
  CHECK(rep.pass);
  CHECK(rep.max_ratio <= 1.0 + 1e-12);

  // quadratic growth in x escapes the (1+x)(1+y) envelope
  Kernel bad;
  bad.name = "quadratic";
  bad.eval = [](double x, double y, double z) {
    return z > x ? 0.0 : (1.0 + x) * (1.0 + x) * (1.0 + y) * std::exp(-z);
  };
  bad.phi = [](double z) { return std::exp(-z); };
  bad.c_k = 1.0;
  auto bad_rep = check_growth_bound(bad);
  CHECK_FALSE(bad_rep.pass);
  CHECK(bad_rep.worst.x > 100.0);

  auto zero_rep = check_growth_bound(zero_kernel());
  CHECK(zero_rep.pass);
  CHECK(zero_rep.max_ratio == 0.0);
}

TEST_CASE("derivative and boundary checks", "[kernels]") {
  auto rep = check_derivative_bounds(builtin_kernel("expdiff"));
  CHECK(rep.pass);
  CHECK(rep.max_boundary == 0.0);

  auto rep_const = check_derivative_bounds(builtin_kernel("constant"));
  CHECK_FALSE(rep_const.pass);
  CHECK(rep_const.max_boundary > 0.0);  // K(x,y,x) = exp(-x) != 0

  CHECK(check_derivative_bounds(zero_kernel()).pass);
}

TEST_CASE("admissible moment checks match the stated constants", "[kernels]") {
  auto p15 = check_admissible(power_moment(0.5));
  CHECK(p15.pass_a0);
  CHECK(p15.pass_superlinear);

  auto ent = check_admissible(entropy_moment());
  CHECK(ent.pass_a0);
  CHECK(ent.pass_superlinear);

  auto lin = check_admissible(linear_moment());
  CHECK(lin.pass_a0);
  CHECK_FALSE(lin.pass_superlinear);

  // wrong constants must fail: x^1.5 with c2 below 1.5 breaks the bound
  auto tight = power_moment(0.5);
  tight.c2 = 1.0;
  CHECK_FALSE(check_admissible(tight).pass_a0);
}

TEST_CASE("riemann sums approach integrals at the modulus rate", "[kernels]") {
  auto expphi = [](double z) { return std::exp(-z); };
  auto r = riemann_check(expphi, 1e-3, 10000);
  CHECK(std::abs(r.sum - (1.0 - std::exp(-10.0))) < 1e-2);
  CHECK(std::abs(r.sum - r.integral) <= r.bound + 1e-12);

  auto zero = riemann_check([](double) { return 0.0; }, 0.1, 100);
  CHECK(zero.sum == 0.0);
  CHECK(zero.integral == 0.0);
  CHECK(zero.bound == 0.0);

  // z exp(-z) integrates to 1; sums converge along eps -> 0 and the gap
  // shrinks monotonically
  auto zexp = [](double z) { return z * std::exp(-z); };
  double prev_gap = HUGE_VAL;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    const long n = static_cast<long>(std::lround(30.0 / eps));
    auto rr = riemann_check(zexp, eps, n);
    const double gap = std::abs(rr.sum - rr.integral);
    CHECK(std::abs(rr.sum - rr.integral) <= rr.bound + 1e-12);
    CHECK(gap < prev_gap + 1e-12);
    prev_gap = gap;
    CHECK(std::abs(rr.integral - 1.0) < 1e-6);
  }
}

TEST_CASE("riemann bound holds for every builtin phi", "[kernels]") {
  for (const char* name : {"constant", "product", "expdiff"}) {
    auto k = builtin_kernel(name);
    double prev_gap = HUGE_VAL;
    for (double eps : {0.2, 0.1, 0.05}) {
      const long n = static_cast<long>(std::lround(25.0 / eps));
      auto r = riemann_check(k.phi, eps, n);
      const double gap = std::abs(r.sum - r.integral);
      CHECK(gap <= r.bound + 1e-12);
      CHECK(gap < prev_gap + 1e-12);  // shrinking along eps -> 0
      prev_gap = gap;
    }
  }
}

TEST_CASE("phi_norm_11 matches the exponential closed form", "[kernels]") {
  // int (1+z) e^{-z} = 2
  CHECK(phi_norm_11([](double z) { return std::exp(-z); }) == Approx(2.0).epsilon(1e-7));
}
