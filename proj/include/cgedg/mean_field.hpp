#ifndef CGEDG_MEAN_FIELD_HPP
#define CGEDG_MEAN_FIELD_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgedg/kernels.hpp"
#include "cgedg/measures.hpp"

namespace cgedg {

// Discretized mean-field state: probability weights on the mass grid
// {0, h, ..., M h}. Exchange amounts are restricted to the grid (z = d h),
// which makes mass and first-moment conservation exact identities of the
// right-hand side.
struct MeanFieldState {
  double h = 1.0;
  std::vector<double> weights;
  double t = 0.0;

  std::size_t max_bin() const { return weights.empty() ? 0 : weights.size() - 1; }

  GridMeasure measure() const {
    GridMeasure m;
    m.eps = h;
    m.weights = weights;
    m.kind = GridMeasure::Kind::Density;
    return m;
  }
};

inline MeanFieldState state_from_measure(const GridMeasure& c0) {
  MeanFieldState s;
  s.h = c0.eps;
  s.weights = c0.weights;
  return s;
}

struct SolverReport {
  double boundary_leak = 0.0;  // rate mass that hit the grid cutoff, time-integrated
  double clipped = 0.0;        // total negative dust clipped to zero
  long steps = 0;
  long rejected_steps = 0;
  double dt_min = HUGE_VAL;
  double dt_max_used = 0.0;
};

//------------------------------------------------------------------------
// right-hand side assembly
//------------------------------------------------------------------------

// Assembles d/dt weights for the grid generator
//   sum_{k>=1} sum_l w_k w_l sum_{d=1..k} h K(kh, lh, dh) gamma^{kh,lh,dh},
// dropping (and reporting) jumps whose target l+d leaves the grid.
// Separable kernels take an O(M^2) path through prefix sums and one
// convolution; the generic triple loop is kept both as fallback and as a
// cross-check for the fast path.
class MeanFieldSystem {
 public:
  MeanFieldSystem(const Kernel& kernel, double h, std::size_t max_bin,
                  bool force_generic = false)
      : kernel_(kernel), h_(h), m_(max_bin),
        fast_(kernel.separable() && !force_generic) {
    if (!(h > 0.0)) throw std::invalid_argument("MeanFieldSystem: h must be positive");
    if (fast_) {
      alpha_.resize(m_ + 1);
      for (std::size_t l = 0; l <= m_; ++l)
        alpha_[l] = kernel_.target_factor(l * h_);
      // triangular table beta(k h, d h), d = 1..k
      beta_row_.resize(m_ + 1, 0);
      std::size_t offset = 0;
      for (std::size_t k = 1; k <= m_; ++k) {
        beta_row_[k] = offset;
        offset += k;
      }
      beta_.resize(offset);
      for (std::size_t k = 1; k <= m_; ++k)
        for (std::size_t d = 1; d <= k; ++d)
          beta_[beta_row_[k] + d - 1] = kernel_.source_factor(k * h_, d * h_);
    }
  }

  std::size_t max_bin() const { return m_; }
  double h() const { return h_; }

  // writes d/dt w into out and returns the instantaneous boundary leak
  // rate. loss, when given, receives each bin's outflow rate (for the
  // step-size control).
  double rhs(const std::vector<double>& w, std::vector<double>& out,
             std::vector<double>* loss = nullptr) const {
    out.assign(m_ + 1, 0.0);
    if (loss) loss->assign(m_ + 1, 0.0);
    return fast_ ? rhs_fast(w, out, loss) : rhs_generic(w, out, loss);
  }

 private:
  double rhs_generic(const std::vector<double>& w, std::vector<double>& out,
                     std::vector<double>* loss) const {
    double leak = 0.0;
    for (std::size_t k = 1; k <= m_ && k < w.size(); ++k) {
      if (w[k] == 0.0) continue;
      for (std::size_t l = 0; l <= m_ && l < w.size(); ++l) {
        if (w[l] == 0.0) continue;
        const double wkl = w[k] * w[l];
        for (std::size_t d = 1; d <= k; ++d) {
          const double r = h_ * kernel_.eval(k * h_, l * h_, d * h_) * wkl;
          if (r == 0.0) continue;
          if (l + d > m_) {
            leak += r;
            continue;
          }
          out[k] -= r;
          out[l] -= r;
          out[k - d] += r;
          out[l + d] += r;
          if (loss) {
            (*loss)[k] += r;
            (*loss)[l] += r;
          }
        }
      }
    }
    return leak;
  }

  double rhs_fast(const std::vector<double>& w, std::vector<double>& out,
                  std::vector<double>* loss) const {
    const std::size_t n = std::min(w.size() - 1, m_);
    // rho_l = w_l alpha(l h) and its prefix sums P
    std::vector<double> rho(m_ + 1, 0.0), prefix(m_ + 2, 0.0);
    for (std::size_t l = 0; l <= n; ++l) rho[l] = w[l] * alpha_[l];
    for (std::size_t l = 0; l <= m_; ++l) prefix[l + 1] = prefix[l] + rho[l];
    auto psum = [&](std::size_t hi) { return prefix[hi + 1]; };  // sum rho[0..hi]

    // B[d] = sum_k h beta(k h, d h) w_k and source-side gamma terms
    std::vector<double> bsum(m_ + 1, 0.0);
    double leak = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      if (w[k] == 0.0) continue;
      const double* beta_k = beta_.data() + beta_row_[k];
      double out_k = 0.0;
      for (std::size_t d = 1; d <= k; ++d) {
        const double a = h_ * beta_k[d - 1] * w[k];
        if (a == 0.0) continue;
        bsum[d] += a;
        const double transported = a * psum(m_ - d);
        out_k += transported;
        out[k - d] += transported;
      }
      out[k] -= out_k;
      if (loss) (*loss)[k] += out_k;
    }

    // BP[j] = sum_{d<=j} B[d]; target-side gamma terms
    std::vector<double> bprefix(m_ + 2, 0.0);
    for (std::size_t d = 0; d <= m_; ++d) bprefix[d + 1] = bprefix[d] + bsum[d];
    for (std::size_t l = 0; l <= m_; ++l) {
      if (rho[l] == 0.0) continue;
      const double gone = rho[l] * bprefix[m_ - l + 1];
      out[l] -= gone;
      if (loss) (*loss)[l] += gone;
    }
    // arrivals: (B * rho)(a)
    for (std::size_t d = 1; d <= m_; ++d) {
      if (bsum[d] == 0.0) continue;
      const double bd = bsum[d];
      for (std::size_t l = 0; l + d <= m_; ++l)
        if (rho[l] != 0.0) out[l + d] += bd * rho[l];
    }
    // jumps beyond the cutoff
    for (std::size_t d = 1; d <= m_; ++d)
      if (bsum[d] != 0.0) leak += bsum[d] * (psum(m_) - psum(m_ - d));
    return leak;
  }

  const Kernel& kernel_;
  double h_;
  std::size_t m_;
  bool fast_;
  std::vector<double> alpha_;
  std::vector<double> beta_;
  std::vector<std::size_t> beta_row_;
};

// one-shot rhs for diagnostics and tests
inline std::vector<double> rhs(const MeanFieldState& state,
                               const Kernel& kernel,
                               double* leak_rate = nullptr,
                               bool force_generic = false) {
  MeanFieldSystem sys(kernel, state.h, state.max_bin(), force_generic);
  std::vector<double> out;
  const double leak = sys.rhs(state.weights, out);
  if (leak_rate) *leak_rate = leak;
  return out;
}

//------------------------------------------------------------------------
// RK4 stepping with outflow-based step control
//------------------------------------------------------------------------

namespace detail {

struct StepScratch {
  std::vector<double> k1, k2, k3, k4, tmp, loss;
};

// returns the leak rate integrated over the step
inline double rk4_once(const MeanFieldSystem& sys, std::vector<double>& w,
                       double dt, StepScratch& s, std::vector<double>& cand) {
  const std::size_t n = w.size();
  double leak = 0.0;
  leak += sys.rhs(w, s.k1);
  for (std::size_t j = 0; j < n; ++j) s.tmp[j] = w[j] + 0.5 * dt * s.k1[j];
  leak += 2.0 * sys.rhs(s.tmp, s.k2);
  for (std::size_t j = 0; j < n; ++j) s.tmp[j] = w[j] + 0.5 * dt * s.k2[j];
  leak += 2.0 * sys.rhs(s.tmp, s.k3);
  for (std::size_t j = 0; j < n; ++j) s.tmp[j] = w[j] + dt * s.k3[j];
  leak += sys.rhs(s.tmp, s.k4);
  for (std::size_t j = 0; j < n; ++j)
    cand[j] = w[j] + dt / 6.0 *
                         (s.k1[j] + 2.0 * s.k2[j] + 2.0 * s.k3[j] + s.k4[j]);
  return leak * dt / 6.0;
}

}  // namespace detail

struct StepOptions {
  double dt_max = 0.05;
  double theta = 0.5;        // dt <= theta / Lambda
  double reject_below = -1e-12;
};

// one accepted RK4 step (possibly after halvings); updates state and report
inline void step(MeanFieldState& state, const MeanFieldSystem& sys,
                 const StepOptions& opts, SolverReport& report,
                 double dt_cap = HUGE_VAL) {
  const std::size_t n = state.weights.size();
  detail::StepScratch scratch;
  scratch.tmp.resize(n);
  std::vector<double> cand(n), rhs0;

  // Lambda = max outflow rate / weight over occupied bins
  const double leak_probe = sys.rhs(state.weights, rhs0, &scratch.loss);
  (void)leak_probe;
  double lambda = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    if (state.weights[j] > 0.0)
      lambda = std::max(lambda, scratch.loss[j] / state.weights[j]);

  double dt = std::min({opts.dt_max, dt_cap,
                        lambda > 0.0 ? opts.theta / lambda : HUGE_VAL});
  if (!(dt > 0.0)) throw std::invalid_argument("step: nonpositive dt");

  for (;;) {
    const double leak = detail::rk4_once(sys, state.weights, dt, scratch, cand);
    double worst = 0.0;
    for (double v : cand) worst = std::min(worst, v);
    if (worst >= opts.reject_below) {
      double clipped = 0.0;
      for (double& v : cand)
        if (v < 0.0) {
          clipped -= v;
          v = 0.0;
        }
      state.weights.swap(cand);
      state.t += dt;
      report.boundary_leak += leak;
      report.clipped += clipped;
      report.steps += 1;
      report.dt_min = std::min(report.dt_min, dt);
      report.dt_max_used = std::max(report.dt_max_used, dt);
      return;
    }
    dt *= 0.5;
    report.rejected_steps += 1;
    if (dt < 1e-12 * opts.dt_max)
      throw std::runtime_error("step: dt underflow, problem too stiff for this scheme");
  }
}

// free-function form matching the one-shot rhs
inline MeanFieldState step(const MeanFieldState& state, const Kernel& kernel,
                           double dt_max) {
  MeanFieldSystem sys(kernel, state.h, state.max_bin());
  MeanFieldState next = state;
  SolverReport report;
  StepOptions opts;
  opts.dt_max = dt_max;
  step(next, sys, opts, report);
  return next;
}

//------------------------------------------------------------------------
// trajectory solve
//------------------------------------------------------------------------

struct SolveOptions {
  double dt_max = 0.05;
  double theta = 0.5;
  double leak_tolerance = 1e-6;  // report flag threshold
  bool force_generic = false;
};

struct SolveResult {
  Trajectory trajectory;
  SolverReport report;
  bool leak_flagged = false;
};

inline SolveResult solve(const GridMeasure& c0, const Kernel& kernel,
                         double t_end, const std::vector<double>& checkpoints,
                         const SolveOptions& opts = {}) {
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 0.0 || checkpoints[i] > t_end + 1e-12)
      throw std::invalid_argument("solve: checkpoints outside [0, t_end]");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
      throw std::invalid_argument("solve: checkpoints must be increasing");
  }
  MeanFieldState state = state_from_measure(c0);
  MeanFieldSystem sys(kernel, state.h, state.max_bin(), opts.force_generic);
  StepOptions sopts;
  sopts.dt_max = opts.dt_max;
  sopts.theta = opts.theta;

  SolveResult out;
  std::size_t ci = 0;
  auto snapshot_due = [&]() {
    while (ci < checkpoints.size() &&
           checkpoints[ci] <= state.t + 1e-12 * std::max(1.0, t_end)) {
      out.trajectory.times.push_back(checkpoints[ci]);
      out.trajectory.snapshots.push_back(state.measure());
      ++ci;
    }
  };
  snapshot_due();
  while (ci < checkpoints.size()) {
    const double dt_cap = checkpoints[ci] - state.t;
    step(state, sys, sopts, out.report, dt_cap);
    snapshot_due();
  }
  out.leak_flagged = out.report.boundary_leak > opts.leak_tolerance;
  return out;
}

//------------------------------------------------------------------------
// weak-form residual and the uniqueness (Gronwall) diagnostic
//------------------------------------------------------------------------

struct WeakFormParts {
  double moment_change = 0.0;   // <f, c_t - c_s>
  double time_integral = 0.0;   // composite Simpson of Q(c_r).f over [s,t]
};

// Both sides of the weak-form identity, with the time integral by
// composite Simpson over the stored checkpoints. Checkpoints between s and
// t must be evenly spaced with an even interval count.
inline WeakFormParts weak_form_parts(const Trajectory& traj,
                                     const Kernel& kernel,
                                     const std::function<double(double)>& f,
                                     double s, double t,
                                     bool force_generic = false) {
  if (!(s < t)) throw std::invalid_argument("weak_form: needs s < t");
  const auto& times = traj.times;
  auto locate = [&](double tv) {
    for (std::size_t i = 0; i < times.size(); ++i)
      if (std::abs(times[i] - tv) <= 1e-9 * std::max(1.0, tv)) return i;
    throw std::invalid_argument("weak_form: time not among checkpoints");
  };
  const std::size_t is = locate(s), it = locate(t);
  const std::size_t segments = it - is;
  if (segments < 2 || segments % 2 != 0)
    throw std::invalid_argument("weak_form: need an even number of checkpoint intervals");
  const double dt = (times[it] - times[is]) / segments;
  for (std::size_t i = is; i < it; ++i)
    if (std::abs(times[i + 1] - times[i] - dt) > 1e-9 * dt)
      throw std::invalid_argument("weak_form: checkpoints must be evenly spaced");

  const GridMeasure& ms = traj.snapshots[is];
  MeanFieldSystem sys(kernel, ms.eps, ms.weights.size() - 1, force_generic);
  std::vector<double> deriv;
  std::vector<double> fvals(ms.weights.size());
  for (std::size_t a = 0; a < fvals.size(); ++a) fvals[a] = f(a * ms.eps);

  auto qf = [&](std::size_t idx) {
    sys.rhs(traj.snapshots[idx].weights, deriv);
    double acc = 0.0;
    for (std::size_t a = 0; a < deriv.size(); ++a) acc += deriv[a] * fvals[a];
    return acc;
  };

  WeakFormParts parts;
  double simpson = qf(is) + qf(it);
  for (std::size_t i = 1; i < segments; ++i)
    simpson += (i % 2 == 1 ? 4.0 : 2.0) * qf(is + i);
  parts.time_integral = simpson * dt / 3.0;

  const auto& wt = traj.snapshots[it].weights;
  const auto& ws = traj.snapshots[is].weights;
  for (std::size_t a = 0; a < fvals.size(); ++a)
    parts.moment_change += fvals[a] * (wt[a] - ws[a]);
  return parts;
}

inline double weak_residual(const Trajectory& traj, const Kernel& kernel,
                            const std::function<double(double)>& f, double s,
                            double t, bool force_generic = false) {
  const auto parts = weak_form_parts(traj, kernel, f, s, t, force_generic);
  return std::abs(parts.moment_change - parts.time_integral);
}

struct GronwallRow {
  double t;
  double w1;
  double bound;
};

struct GronwallResult {
  std::vector<GronwallRow> rows;
  double constant = 0.0;  // C = 4 ||phi||_{1,1} (1 + 2 rho)
  bool pass = true;
};

inline GronwallResult gronwall_diagnostic(
    const GridMeasure& c0, const GridMeasure& d0, const Kernel& kernel,
    double rho, double t_end, const std::vector<double>& checkpoints,
    const SolveOptions& opts = {}) {
  const DerivativeReport k2 = check_derivative_bounds(kernel);
  if (!k2.pass)
    throw std::invalid_argument(
        "gronwall_diagnostic: kernel fails the differentiability/boundary check");

  const SolveResult a = solve(c0, kernel, t_end, checkpoints, opts);
  const SolveResult b = solve(d0, kernel, t_end, checkpoints, opts);

  GronwallResult out;
  out.constant = 4.0 * phi_norm_11(kernel.phi) * (1.0 + 2.0 * rho);
  const double w1_0 = w1(c0, d0);
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    GronwallRow row;
    row.t = a.trajectory.times[i];
    row.w1 = w1(a.trajectory.snapshots[i], b.trajectory.snapshots[i]);
    row.bound = std::exp(out.constant * row.t) * w1_0;
    if (row.w1 > row.bound + 1e-12) out.pass = false;
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace cgedg

#endif  // CGEDG_MEAN_FIELD_HPP
