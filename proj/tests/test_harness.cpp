#include <catch2/catch.hpp>

#include <cmath>
#include <sstream>

#include "cgedg/harness.hpp"

using namespace cgedg;

namespace {

StudyConfig tiny_config() {
  StudyConfig config;
  config.kernel.name = "expdiff";
  config.rho = 1.0;
  config.density.name = "exponential";
  config.density.params = {{"rate", 1.0}};
  config.schedule = {make_entry(1.0, 24, 0.2), make_entry(1.0, 48, 0.1)};
  config.replicas = 8;
  config.seed = 4242;
  config.checkpoints = {0.25, 0.5};
  config.solver_mass_cap = 10.0;
  config.solver_dt_max = 0.05;
  return config;
}

}  // namespace

TEST_CASE("config validation", "[harness]") {
  auto config = tiny_config();
  CHECK(validate(config).ok);

  auto off_rho = config;
  off_rho.schedule[0].n = 300;  // N eps / L = 2.5, far from rho
  CHECK_FALSE(validate(off_rho).ok);

  auto non_decreasing = config;
  non_decreasing.schedule[1].eps = 0.2;
  CHECK_FALSE(validate(non_decreasing).ok);

  auto empty = config;
  empty.checkpoints.clear();
  CHECK_FALSE(validate(empty).ok);
}

TEST_CASE("make_density builtins normalize", "[harness]") {
  for (const char* name : {"exponential", "uniform", "truncated-gaussian"}) {
    auto f = make_density({name, {}, {}});
    const double total = integrate(f, 0.0, 60.0, 1e-10);
    CHECK(total == Approx(1.0).margin(1e-6));
  }
  CHECK_THROWS_AS(make_density({"cauchy", {}, {}}), std::invalid_argument);

  // tabulated density: triangle on [0, 2], interpolated linearly
  DensitySpec tab;
  tab.name = "tabulated";
  tab.table = {{0.0, 0.0}, {1.0, 1.0}, {2.0, 0.0}};
  auto f = make_density(tab);
  CHECK(f(0.5) == Approx(0.5));
  CHECK(f(1.0) == Approx(1.0));
  CHECK(f(1.5) == Approx(0.5));
  CHECK(f(2.5) == 0.0);
  CHECK(integrate(f, 0.0, 2.0, 1e-10) == Approx(1.0).margin(1e-8));
}

TEST_CASE("validator warns when L grows faster than the modulus shrinks",
          "[harness]") {
  auto config = tiny_config();
  // eps halves but L grows 32x: L * omega(eps) increases
  config.schedule = {make_entry(1.0, 24, 0.2), make_entry(1.0, 768, 0.1)};
  auto rep = validate(config);
  CHECK(rep.ok);
  REQUIRE_FALSE(rep.warnings.empty());
}

TEST_CASE("frozen kernel: zero distance to the solver at all times", "[harness]") {
  auto config = tiny_config();
  config.kernel.name = "zero";
  config.replicas = 4;
  auto result = run_convergence(config);
  REQUIRE(result.rows.size() == 4);
  for (const auto& row : result.rows) {
    // solver and replicas share the discretized initial measure, and
    // nothing moves
    CHECK(row.mean_w1 == 0.0);
    CHECK(row.se_w1 == 0.0);
    CHECK(row.w1_mc_mean == 0.0);
  }
}

TEST_CASE("convergence output is deterministic and thread-invariant",
          "[harness]") {
  auto config = tiny_config();
  auto a = run_convergence(config);
  auto b = run_convergence(config);
  config.threads = 3;
  auto c = run_convergence(config);

  std::ostringstream sa, sb, sc;
  write_convergence_csv(a, sa);
  write_convergence_csv(b, sb);
  write_convergence_csv(c, sc);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str() == sc.str());

  // schema stamp and field count on every row
  std::istringstream lines(sa.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line.rfind("schema,", 0) == 0);
  while (std::getline(lines, line)) {
    CHECK(line.rfind("cgedg.converge.v1,", 0) == 0);
    CHECK(std::count(line.begin(), line.end(), ',') == 10);
  }
}

TEST_CASE("mean W1 decreases with system size", "[harness]") {
  auto config = tiny_config();
  config.schedule = {make_entry(1.0, 20, 0.2), make_entry(1.0, 80, 0.1)};
  config.replicas = 24;
  config.checkpoints = {0.5};
  auto result = run_convergence(config);
  REQUIRE(result.rows.size() == 2);
  CHECK(result.rows[1].mean_w1 < result.rows[0].mean_w1);
  for (const auto& row : result.rows) {
    CHECK(row.m2_bound_ok);
    CHECK(row.mf_bound_ok);
  }
}

TEST_CASE("aldous diagnostic rows", "[harness]") {
  auto config = tiny_config();
  config.replicas = 16;
  auto entry = make_entry(1.0, 40, 0.1);
  auto result = aldous_diagnostic(config, entry, {0.4, 0.2, 0.1}, 0.25);
  REQUIRE(result.rows.size() == 3);
  for (const auto& row : result.rows) CHECK(row.mean_w1 > 0.0);

  // frozen dynamics: all increments vanish
  config.kernel.name = "zero";
  auto frozen = aldous_diagnostic(config, entry, {0.4, 0.2}, 0.25);
  for (const auto& row : frozen.rows) CHECK(row.mean_w1 == 0.0);
  CHECK(frozen.pass);
}

TEST_CASE("oracle suite: exact conservation gives z = 0", "[harness]") {
  OracleConfig oc;
  oc.kernel.name = "ones";
  oc.replicas = 400;
  oc.seed = 99;
  OracleInstance inst;
  inst.n = 2;
  inst.l = 2;
  inst.eps = 1.0;
  inst.initial = {1, 1};
  inst.times = {1.0};
  oc.instances = {inst};

  auto rows = run_oracle_suite(oc);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    if (row.observable == "m1") {
      CHECK(row.z == 0.0);
      CHECK(row.mc_se == 0.0);
    } else {
      CHECK(std::abs(row.z) <= 4.0);  // loose, replica count is small
    }
    if (row.observable == "largest_class")
      CHECK(row.oracle ==
            Approx((2.0 / 3.0) * (1.0 - std::exp(-3.0))).margin(1e-9));
  }

  std::ostringstream os;
  write_oracle_jsonl(rows, os);
  std::istringstream lines(os.str());
  std::string line;
  while (std::getline(lines, line)) {
    CHECK(line.front() == '{');
    CHECK(line.find("\"schema\":\"cgedg.oracle.v1\"") != std::string::npos);
    CHECK(line.find("\"z_score\":") != std::string::npos);
  }

  // frozen dynamics: oracle and Monte Carlo agree identically
  oc.kernel.name = "zero";
  for (const auto& row : run_oracle_suite(oc)) CHECK(row.z == 0.0);
}

TEST_CASE("trajectory round trip through the binary index", "[harness]") {
  Trajectory traj;
  traj.times = {0.0, 0.5};
  traj.snapshots = {density_measure(0.5, {0.5, 0.5}),
                    density_measure(0.5, {0.25, 0.5, 0.25})};
  std::stringstream bin(std::ios::in | std::ios::out | std::ios::binary);
  std::ostringstream index;
  write_trajectory(traj, 7, bin, index);

  auto first = read_checkpoint(bin);
  auto second = read_checkpoint(bin);
  CHECK(first.weights == traj.snapshots[0].weights);
  CHECK(second.weights == traj.snapshots[1].weights);
  CHECK(index.str().find("\"replica\":7") != std::string::npos);
  CHECK(index.str().find("\"file_offset\":0") != std::string::npos);
}

TEST_CASE("moment bound constant is positive and scale-monotone", "[harness]") {
  auto kernel = builtin_kernel("expdiff");
  const double c1 = moment_bound_constant(kernel, [](double z) { return z; },
                                          0.1, 200, 1.0, 50);
  const double c2 = moment_bound_constant(kernel, entropy_gradient_weight, 0.1,
                                          200, 1.0, 50);
  CHECK(c1 > 0.0);
  CHECK(c2 > c1);  // entropy weight dominates g(z) = z pointwise
}
