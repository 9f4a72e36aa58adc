#ifndef CGEDG_HARNESS_HPP
#define CGEDG_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cgedg/init.hpp"
#include "cgedg/kernels.hpp"
#include "cgedg/master_oracle.hpp"
#include "cgedg/mean_field.hpp"
#include "cgedg/measures.hpp"
#include "cgedg/particle_sim.hpp"
#include "cgedg/rng.hpp"

namespace cgedg {

//------------------------------------------------------------------------
// named kernels and densities for config files
//------------------------------------------------------------------------

struct KernelSpec {
  std::string name = "expdiff";
  std::map<std::string, double> params;
};

// builtin_kernel names plus "ones" and "zero" for oracle/regression runs
inline Kernel make_kernel(const KernelSpec& spec) {
  if (spec.name == "ones") return ones_kernel(param(spec.params, "kappa0", 1.0));
  if (spec.name == "zero") return zero_kernel();
  return builtin_kernel(spec.name, spec.params);
}

struct DensitySpec {
  std::string name = "exponential";
  std::map<std::string, double> params;
  // for name == "tabulated": sorted (mass, density) pairs, interpolated
  // linearly and zero outside the table range
  std::vector<std::pair<double, double>> table;
};

inline std::function<double(double)> make_density(const DensitySpec& spec) {
  if (spec.name == "tabulated") {
    if (spec.table.size() < 2)
      throw std::invalid_argument("tabulated density: needs at least two rows");
    auto table = spec.table;
    for (std::size_t i = 1; i < table.size(); ++i)
      if (table[i].first <= table[i - 1].first)
        throw std::invalid_argument("tabulated density: masses must increase");
    return [table](double x) {
      if (x < table.front().first || x > table.back().first) return 0.0;
      auto it = std::lower_bound(
          table.begin(), table.end(), x,
          [](const auto& row, double v) { return row.first < v; });
      if (it == table.begin()) return it->second;
      const auto& [x1, y1] = *(it - 1);
      const auto& [x2, y2] = *it;
      return y1 + (y2 - y1) * (x - x1) / (x2 - x1);
    };
  }
  if (spec.name == "exponential") {
    const double rate = param(spec.params, "rate", 1.0);
    if (!(rate > 0.0)) throw std::invalid_argument("exponential density: rate > 0");
    return [rate](double x) { return rate * std::exp(-rate * x); };
  }
  if (spec.name == "uniform") {
    const double a = param(spec.params, "a", 0.0);
    const double b = param(spec.params, "b", 2.0);
    if (!(b > a) || a < 0.0)
      throw std::invalid_argument("uniform density: needs 0 <= a < b");
    return [a, b](double x) { return (x >= a && x < b) ? 1.0 / (b - a) : 0.0; };
  }
  if (spec.name == "truncated-gaussian") {
    const double mu = param(spec.params, "mu", 1.0);
    const double sigma = param(spec.params, "sigma", 0.25);
    if (!(sigma > 0.0))
      throw std::invalid_argument("truncated-gaussian density: sigma > 0");
    // normalized on [0, inf)
    const double z = 0.5 * std::erfc(-mu / (sigma * std::sqrt(2.0)));
    return [mu, sigma, z](double x) {
      if (x < 0.0) return 0.0;
      const double u = (x - mu) / sigma;
      return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * M_PI) * z);
    };
  }
  throw std::invalid_argument("make_density: unknown density '" + spec.name + "'");
}

//------------------------------------------------------------------------
// study configuration
//------------------------------------------------------------------------

struct ScheduleEntry {
  long n = 0;
  long l = 0;
  double eps = 0.0;
};

struct StudyConfig {
  KernelSpec kernel;
  double rho = 1.0;
  std::vector<ScheduleEntry> schedule;
  long replicas = 64;
  std::uint64_t seed = 1;
  std::vector<double> checkpoints;
  DensitySpec density;
  double solver_mass_cap = 16.0;
  double solver_dt_max = 0.02;
  int threads = 1;
  std::string out_dir;
};

inline ScheduleEntry make_entry(double rho, long l, double eps) {
  ScheduleEntry e;
  e.l = l;
  e.eps = eps;
  e.n = static_cast<long>(std::llround(rho * l / eps));
  return e;
}

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
};

// Schedule sanity: N eps / L near rho, eps decreasing, and the numerically
// estimated L * omega(eps) for the kernel envelope nonincreasing (the
// "eps -> 0 fast enough" proxy; a violation only warns).
inline ValidationReport validate(const StudyConfig& config) {
  ValidationReport rep;
  auto fail = [&rep](std::string msg) {
    rep.ok = false;
    rep.errors.push_back(std::move(msg));
  };
  if (config.schedule.empty()) fail("schedule is empty");
  if (config.replicas < 1) fail("replicas must be >= 1");
  if (config.checkpoints.empty()) fail("no checkpoints");
  for (std::size_t i = 0; i < config.checkpoints.size(); ++i)
    if (config.checkpoints[i] < 0.0 ||
        (i > 0 && config.checkpoints[i] <= config.checkpoints[i - 1]))
      fail("checkpoints must be increasing and nonnegative");

  const Kernel kernel = make_kernel(config.kernel);
  auto phi_bar = [&kernel](double z) { return (1.0 + z) * kernel.phi(z); };
  // z-modulus of the kernel itself, probed over a few (x, y) pairs
  auto kernel_slice = [&kernel](double z) {
    double worst = 0.0;
    for (double x : {1.0, 4.0, 16.0})
      for (double y : {0.0, 2.0, 8.0})
        worst = std::max(worst, kernel.eval(x + z, y, z));
    return worst;
  };

  double prev_eps = HUGE_VAL;
  double prev_lomega = HUGE_VAL;
  for (const auto& entry : config.schedule) {
    if (entry.l < 2 || entry.n < 1 || !(entry.eps > 0.0)) {
      fail("schedule entry with invalid (N, L, eps)");
      continue;
    }
    const double ratio = entry.n * entry.eps / entry.l;
    if (std::abs(ratio - config.rho) > 0.1 * config.rho)
      fail("schedule entry has N eps / L more than 10% away from rho");
    if (entry.eps >= prev_eps) fail("eps must decrease along the schedule");
    prev_eps = entry.eps;

    const double omega =
        std::max(estimate_modulus(phi_bar, entry.eps, 30.0, 1024),
                 estimate_modulus(kernel_slice, entry.eps, 30.0, 1024));
    const double lomega = entry.l * omega;
    if (lomega > prev_lomega)
      rep.warnings.push_back(
          "L * omega(eps) is not decreasing along the schedule; the particle "
          "approximation may converge slowly");
    prev_lomega = lomega;
  }
  return rep;
}

//------------------------------------------------------------------------
// replica parallelism with a fixed reduction order
//------------------------------------------------------------------------

// Runs fn(replica, thread) for replica = 0..count-1, chunked over threads.
// Callers store results into replica-indexed slots, which keeps every
// reduction independent of the thread count.
inline void for_each_replica(long count, int threads,
                             const std::function<void(long, int)>& fn) {
  if (threads <= 1) {
    for (long r = 0; r < count; ++r) fn(r, 0);
    return;
  }
  std::vector<std::thread> pool;
  const int n_threads = std::min<long>(threads, count);
  for (int t = 0; t < n_threads; ++t)
    pool.emplace_back([&, t]() {
      for (long r = t; r < count; r += n_threads) fn(r, t);
    });
  for (auto& th : pool) th.join();
}

//------------------------------------------------------------------------
// moment-propagation bound constant
//------------------------------------------------------------------------

// C such that d/dt E[M_f] <= C (1 + E[M_f]) from the exchange-gradient
// control, with the finite-eps Riemann sum evaluated directly:
//   C = 4 c_k (L/(L-1)) (1+rho)^2 max_k eps sum_{d<=k} phi(d eps) g(d eps)
inline double moment_bound_constant(const Kernel& kernel,
                                    const std::function<double(double)>& g,
                                    double eps, long n_max, double rho,
                                    long l = 0) {
  double acc = 0.0;
  for (long d = 1; d <= n_max; ++d)
    acc += kernel.phi(d * eps) * g(d * eps);
  const double finite_l = l > 1 ? static_cast<double>(l) / (l - 1.0) : 1.0;
  return 4.0 * kernel.c_k * finite_l * eps * acc * (1.0 + rho) * (1.0 + rho);
}

// g(z) controlling the exchange increments of f(x) = (1+x) log(1+x):
// |gamma . f| <= g(z) [(1 + f(x)/(1+x)) + (1 + f(y)/(1+y))]
inline double entropy_gradient_weight(double z) {
  return 2.0 * (1.0 + z + (1.0 + z) * std::log1p(z));
}

//------------------------------------------------------------------------
// convergence study
//------------------------------------------------------------------------

struct ConvergenceRow {
  long l = 0;
  double eps = 0.0;
  double t = 0.0;
  double mean_w1 = 0.0;   // mean over replicas of W1(empirical, solver)
  double se_w1 = 0.0;
  double w1_mc_mean = 0.0;  // W1(bin-averaged MC measure, solver)
  double mean_m2 = 0.0;
  double mean_mf = 0.0;   // f = (1+x) log(1+x)
  bool m2_bound_ok = true;
  bool mf_bound_ok = true;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  double solver_boundary_leak = 0.0;
};

// on_row, when given, receives every finished row as soon as its schedule
// entry completes, so long studies can flush partial results
inline ConvergenceResult run_convergence(
    const StudyConfig& config,
    const std::function<void(const ConvergenceRow&)>& on_row = nullptr) {
  const auto validation = validate(config);
  if (!validation.ok)
    throw std::invalid_argument("run_convergence: invalid config: " +
                                validation.errors.front());
  const Kernel kernel = make_kernel(config.kernel);
  const auto density = make_density(config.density);
  const auto f_entropy = entropy_moment().f;
  ConvergenceResult out;

  for (const auto& entry : config.schedule) {
    // shared initial data: the solver starts from the same discretized
    // measure the replicas are sampled from, so W1 at t=0 is exactly 0 and
    // the study isolates the dynamics
    const GridMeasure initial =
        discretize_density_bulk(density, entry.n, entry.l, entry.eps);
    // solver grid: cap bins at the configured mass cutoff (the discretized
    // initial data is bulk-supported, so this only trims empty tail bins)
    const auto solver_bins = static_cast<std::size_t>(
        std::lround(config.solver_mass_cap / entry.eps));
    GridMeasure c0 = initial.resized(solver_bins);
    c0.kind = GridMeasure::Kind::Density;
    SolveOptions sopts;
    sopts.dt_max = config.solver_dt_max;
    const SolveResult solver =
        solve(c0, kernel, config.checkpoints.back(), config.checkpoints, sopts);
    out.solver_boundary_leak =
        std::max(out.solver_boundary_leak, solver.report.boundary_leak);

    const std::size_t n_cp = config.checkpoints.size();
    const long reps = config.replicas;
    std::vector<std::vector<double>> w1_r(n_cp, std::vector<double>(reps));
    std::vector<std::vector<double>> m2_r(n_cp, std::vector<double>(reps));
    std::vector<std::vector<double>> mf_r(n_cp, std::vector<double>(reps));
    std::vector<Trajectory> trajectories(reps);

    std::vector<std::shared_ptr<RateCache>> caches(
        static_cast<std::size_t>(std::max(1, config.threads)));
    for (auto& c : caches) c = std::make_shared<RateCache>(kernel, entry.eps);

    for_each_replica(reps, config.threads, [&](long r, int thread) {
      Rng rng = replica_rng(config.seed, static_cast<std::uint64_t>(r));
      Configuration conf = sample_fiber(initial, rng);
      auto res = simulate(conf, kernel, config.checkpoints.back(),
                          config.checkpoints, rng,
                          caches[static_cast<std::size_t>(thread)]);
      for (std::size_t i = 0; i < n_cp; ++i) {
        const auto& snap = res.trajectory.snapshots[i];
        w1_r[i][static_cast<std::size_t>(r)] =
            w1(snap, solver.trajectory.snapshots[i]);
        m2_r[i][static_cast<std::size_t>(r)] = second_moment(snap);
        mf_r[i][static_cast<std::size_t>(r)] = moment(snap, f_entropy);
      }
      trajectories[static_cast<std::size_t>(r)] = std::move(res.trajectory);
    });

    // bound constants for the moment-propagation flags
    const double c_m2 = moment_bound_constant(
        kernel, [](double z) { return z; }, entry.eps, entry.n, config.rho,
        entry.l);
    const double c_mf =
        moment_bound_constant(kernel, entropy_gradient_weight, entry.eps,
                              entry.n, config.rho, entry.l);
    const double m2_0 = second_moment(initial);
    const double mf_0 = moment(initial, f_entropy);

    for (std::size_t i = 0; i < n_cp; ++i) {
      ConvergenceRow row;
      row.l = entry.l;
      row.eps = entry.eps;
      row.t = config.checkpoints[i];

      double mean = 0.0;
      for (double v : w1_r[i]) mean += v;
      mean /= reps;
      double var = 0.0;
      for (double v : w1_r[i]) var += (v - mean) * (v - mean);
      row.mean_w1 = mean;
      row.se_w1 = reps > 1 ? std::sqrt(var / (reps - 1.0) / reps) : 0.0;

      for (double v : m2_r[i]) row.mean_m2 += v;
      row.mean_m2 /= reps;
      for (double v : mf_r[i]) row.mean_mf += v;
      row.mean_mf /= reps;

      // bin-averaged MC measure on the shared eps-grid
      std::size_t max_bins = 0;
      for (const auto& traj : trajectories)
        max_bins = std::max(max_bins, traj.snapshots[i].weights.size());
      std::vector<double> avg(max_bins, 0.0);
      for (const auto& traj : trajectories)
        for (std::size_t k = 0; k < traj.snapshots[i].weights.size(); ++k)
          avg[k] += traj.snapshots[i].weights[k];
      for (auto& v : avg) v /= reps;
      row.w1_mc_mean =
          w1(density_measure(entry.eps, std::move(avg)),
             solver.trajectory.snapshots[i]);

      row.m2_bound_ok =
          row.mean_m2 <= std::exp(c_m2 * row.t) * (m2_0 + c_m2 * row.t) + 1e-12;
      row.mf_bound_ok =
          row.mean_mf <= std::exp(c_mf * row.t) * (mf_0 + c_mf * row.t) + 1e-12;
      if (on_row) on_row(row);
      out.rows.push_back(row);
    }
  }
  return out;
}

//------------------------------------------------------------------------
// Aldous time-regularity diagnostic
//------------------------------------------------------------------------

struct AldousRow {
  double delta = 0.0;
  double mean_w1 = 0.0;
  double ratio = 0.0;  // mean_w1 / sqrt(delta)
};

struct AldousResult {
  std::vector<AldousRow> rows;
  bool pass = false;  // max ratio <= 2 * min ratio
};

// Mean W1(c_{t0+delta}, c_{t0}) over an ensemble, against the sqrt(delta)
// modulus. Needs an ensemble: for a single replica with delta below the
// mean jump gap the increment is 0 whenever no jump lands in the window.
inline AldousResult aldous_diagnostic(const StudyConfig& config,
                                      const ScheduleEntry& entry,
                                      const std::vector<double>& deltas,
                                      double t0) {
  const Kernel kernel = make_kernel(config.kernel);
  const auto density = make_density(config.density);
  const GridMeasure initial =
      discretize_density_bulk(density, entry.n, entry.l, entry.eps);

  std::vector<double> cps{t0};
  for (double d : deltas) cps.push_back(t0 + d);
  std::sort(cps.begin(), cps.end());
  const double t_end = cps.back();

  const long reps = config.replicas;
  std::vector<std::vector<double>> w1_r(deltas.size(),
                                        std::vector<double>(reps));
  std::vector<std::shared_ptr<RateCache>> caches(
      static_cast<std::size_t>(std::max(1, config.threads)));
  for (auto& c : caches) c = std::make_shared<RateCache>(kernel, entry.eps);

  for_each_replica(reps, config.threads, [&](long r, int thread) {
    Rng rng = replica_rng(config.seed, static_cast<std::uint64_t>(r));
    Configuration conf = sample_fiber(initial, rng);
    auto res = simulate(conf, kernel, t_end, cps, rng,
                        caches[static_cast<std::size_t>(thread)]);
    // snapshot index of t0 and of each t0+delta within the sorted cps
    auto find_idx = [&](double tv) {
      for (std::size_t i = 0; i < cps.size(); ++i)
        if (std::abs(cps[i] - tv) < 1e-12) return i;
      throw std::logic_error("aldous: checkpoint lookup failed");
    };
    const auto& base = res.trajectory.snapshots[find_idx(t0)];
    for (std::size_t di = 0; di < deltas.size(); ++di)
      w1_r[di][static_cast<std::size_t>(r)] =
          w1(res.trajectory.snapshots[find_idx(t0 + deltas[di])], base);
  });

  AldousResult out;
  double lo = HUGE_VAL, hi = 0.0;
  for (std::size_t di = 0; di < deltas.size(); ++di) {
    AldousRow row;
    row.delta = deltas[di];
    for (double v : w1_r[di]) row.mean_w1 += v;
    row.mean_w1 /= reps;
    row.ratio = row.mean_w1 / std::sqrt(row.delta);
    lo = std::min(lo, row.ratio);
    hi = std::max(hi, row.ratio);
    out.rows.push_back(row);
  }
  out.pass = hi <= 2.0 * lo;
  return out;
}

//------------------------------------------------------------------------
// Monte Carlo vs master-equation oracle
//------------------------------------------------------------------------

struct OracleInstance {
  long n = 2;
  long l = 2;
  double eps = 1.0;
  std::vector<long> initial;  // descending partition, zeros optional
  std::vector<double> times;
};

struct OracleConfig {
  KernelSpec kernel;
  std::vector<OracleInstance> instances;
  long replicas = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
  std::size_t state_guard = 1000000;
};

struct OracleRow {
  std::string instance;
  std::string observable;
  double t = 0.0;
  double oracle = 0.0;
  double mc_mean = 0.0;
  double mc_se = 0.0;
  double z = 0.0;
};

inline std::vector<OracleRow> run_oracle_suite(const OracleConfig& config) {
  const Kernel kernel = make_kernel(config.kernel);
  std::vector<OracleRow> rows;

  for (const auto& inst : config.instances) {
    auto space = enumerate_states(inst.n, inst.l, inst.eps, config.state_guard);
    auto gen = build_generator(space, kernel);

    std::vector<long> start = inst.initial;
    start.resize(static_cast<std::size_t>(inst.l), 0);
    std::sort(start.begin(), start.end(), std::greater<long>());
    long start_total = 0;
    for (long v : start) start_total += v;
    if (start_total != inst.n)
      throw std::invalid_argument("oracle instance: initial partition does not sum to N");
    std::vector<double> p0(space.size(), 0.0);
    p0[space.index.at(start)] = 1.0;

    // observables: M1 (exact conservation), M2, indicator of the one-big-
    // cluster state
    const auto m1 = [](double x) { return x; };
    const auto m2 = [](double x) { return x * x; };
    auto is_top = [&inst](const GridMeasure& snap) {
      const auto top = static_cast<std::size_t>(inst.n);
      return snap.weights.size() > top &&
             snap.weights[top] * inst.l > 0.5;
    };

    const long reps = config.replicas;
    const std::size_t n_t = inst.times.size();
    std::vector<std::vector<double>> m2_samples(n_t, std::vector<double>(reps));
    std::vector<std::vector<double>> top_samples(n_t, std::vector<double>(reps));
    std::vector<std::vector<double>> m1_samples(n_t, std::vector<double>(reps));

    std::vector<std::shared_ptr<RateCache>> caches(
        static_cast<std::size_t>(std::max(1, config.threads)));
    for (auto& c : caches) c = std::make_shared<RateCache>(kernel, inst.eps);

    std::vector<std::int64_t> base_sizes(start.begin(), start.end());
    for_each_replica(reps, config.threads, [&](long r, int thread) {
      Rng rng = replica_rng(config.seed, static_cast<std::uint64_t>(r));
      Configuration conf = make_configuration(inst.eps, base_sizes);
      auto res = simulate(conf, kernel, inst.times.back(), inst.times, rng,
                          caches[static_cast<std::size_t>(thread)]);
      for (std::size_t i = 0; i < n_t; ++i) {
        const auto& snap = res.trajectory.snapshots[i];
        m2_samples[i][static_cast<std::size_t>(r)] = second_moment(snap);
        top_samples[i][static_cast<std::size_t>(r)] = is_top(snap) ? 1.0 : 0.0;
        m1_samples[i][static_cast<std::size_t>(r)] = first_moment(snap);
      }
    });

    const std::string label = "N=" + std::to_string(inst.n) +
                              ",L=" + std::to_string(inst.l);
    for (std::size_t i = 0; i < n_t; ++i) {
      const double t = inst.times[i];
      auto p = evolve_law(gen, p0, t);
      // project integrator dust off the simplex so that exactly conserved
      // observables compare at exact equality
      double p_total = 0.0;
      for (double v : p) p_total += v;
      for (double& v : p) v /= p_total;

      auto emit = [&](const std::string& name, double oracle,
                      const std::vector<double>& samples) {
        OracleRow row;
        row.instance = label;
        row.observable = name;
        row.t = t;
        row.oracle = oracle;
        double mean = 0.0;
        for (double v : samples) mean += v;
        mean /= reps;
        double var = 0.0;
        for (double v : samples) var += (v - mean) * (v - mean);
        row.mc_mean = mean;
        row.mc_se = reps > 1 ? std::sqrt(var / (reps - 1.0) / reps) : 0.0;
        // exactly conserved observables agree only up to summation-order
        // roundoff; differences below the floor count as zero
        const double floor = 1e-12 * std::max(1.0, std::abs(oracle));
        const double diff = mean - oracle;
        row.z = std::abs(diff) <= floor
                    ? 0.0
                    : diff / std::max(row.mc_se, floor);
        rows.push_back(row);
      };

      emit("m2", expected_observable(space, p, m2), m2_samples[i]);
      emit("m1", expected_observable(space, p, m1), m1_samples[i]);

      const auto top_state = space.index.at([&] {
        std::vector<long> s(static_cast<std::size_t>(inst.l), 0);
        s[0] = inst.n;
        return s;
      }());
      emit("largest_class", p[top_state], top_samples[i]);
    }
  }
  return rows;
}

//------------------------------------------------------------------------
// CSV / JSON-lines writers (schema stamped in the header column)
//------------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

inline void write_convergence_header(std::ostream& os) {
  os << "schema,L,eps,t,mean_W1,se_W1,w1_mc_mean,mean_M2,mean_Mf,m2_bound_ok,"
        "mf_bound_ok\n";
}

inline void write_convergence_row(const ConvergenceRow& r, std::ostream& os) {
  os << "cgedg.converge.v1," << r.l << ',' << detail::fmt(r.eps) << ','
     << detail::fmt(r.t) << ',' << detail::fmt(r.mean_w1) << ','
     << detail::fmt(r.se_w1) << ',' << detail::fmt(r.w1_mc_mean) << ','
     << detail::fmt(r.mean_m2) << ',' << detail::fmt(r.mean_mf) << ','
     << (r.m2_bound_ok ? 1 : 0) << ',' << (r.mf_bound_ok ? 1 : 0) << '\n';
}

inline void write_convergence_csv(const ConvergenceResult& result,
                                  std::ostream& os) {
  write_convergence_header(os);
  for (const auto& r : result.rows) write_convergence_row(r, os);
}

inline void write_aldous_csv(const AldousResult& result, std::ostream& os) {
  os << "schema,delta,mean_W1,ratio_to_sqrt_delta,pass\n";
  for (const auto& r : result.rows)
    os << "cgedg.aldous.v1," << detail::fmt(r.delta) << ','
       << detail::fmt(r.mean_w1) << ',' << detail::fmt(r.ratio) << ','
       << (result.pass ? 1 : 0) << '\n';
}

inline void write_oracle_jsonl(const std::vector<OracleRow>& rows,
                               std::ostream& os) {
  for (const auto& r : rows)
    os << "{\"schema\":\"cgedg.oracle.v1\",\"instance\":\"" << r.instance
       << "\",\"observable\":\"" << r.observable
       << "\",\"t\":" << detail::fmt(r.t)
       << ",\"oracle\":" << detail::fmt(r.oracle)
       << ",\"mc_mean\":" << detail::fmt(r.mc_mean)
       << ",\"mc_se\":" << detail::fmt(r.mc_se)
       << ",\"z_score\":" << detail::fmt(r.z) << "}\n";
}

inline void write_check_jsonl(const std::string& check, const CheckPoint& point,
                              double value, double bound, bool pass,
                              std::ostream& os) {
  os << "{\"schema\":\"cgedg.check.v1\",\"check\":\"" << check
     << "\",\"point\":[" << detail::fmt(point.x) << ',' << detail::fmt(point.y)
     << ',' << detail::fmt(point.z) << "],\"value\":" << detail::fmt(value)
     << ",\"bound\":" << detail::fmt(bound)
     << ",\"pass\":" << (pass ? "true" : "false") << "}\n";
}

// trajectory checkpoints: binary blobs plus a JSON-lines index with offsets
inline void write_trajectory(const Trajectory& traj, long replica,
                             std::ostream& bin, std::ostream& index) {
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto offset = static_cast<long long>(bin.tellp());
    write_checkpoint(traj.snapshots[i], bin);
    index << "{\"schema\":\"cgedg.traj.v1\",\"replica\":" << replica
          << ",\"t\":" << detail::fmt(traj.times[i])
          << ",\"file_offset\":" << offset
          << ",\"moments\":{\"m1\":" << detail::fmt(first_moment(traj.snapshots[i]))
          << ",\"m2\":" << detail::fmt(second_moment(traj.snapshots[i]))
          << "}}\n";
  }
}

}  // namespace cgedg

#endif  // CGEDG_HARNESS_HPP
