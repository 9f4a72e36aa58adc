#ifndef CGEDG_KERNELS_HPP
#define CGEDG_KERNELS_HPP

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cgedg/quadrature.hpp"

namespace cgedg {

// Exchange rate kernel K(x,y,z): rate density for a cluster of mass x to
// hand the amount z to a cluster of mass y. The convention K(x,y,z) = 0
// for z > x is part of the contract; every constructor below enforces it.
//
// envelope phi and the constant c_k give the growth bound
//   K(x,y,z) <= c_k * (1+x)(1+y) * phi(z).
struct Kernel {
  std::string name;
  std::function<double(double, double, double)> eval;
  std::function<double(double)> phi;
  double c_k = 1.0;

  // Optional separable form K(x,y,z) = target_factor(y) * source_factor(x,z)
  // with both factors nonnegative. Solvers and rate tables use it as a fast
  // path; absence is always valid.
  std::function<double(double)> target_factor;
  std::function<double(double, double)> source_factor;

  bool separable() const { return bool(target_factor) && bool(source_factor); }
};

// Weight function class used for moment propagation: f convex increasing
// with df subadditive up to c1 and controlled by f(x)/(1+x) up to c2.
struct AdmissibleMoment {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  double c1 = 1.0;
  double c2 = 1.0;
  bool superlinear = false;
};

//------------------------------------------------------------------------
// built-in kernels
//------------------------------------------------------------------------

inline double param(const std::map<std::string, double>& params,
                    const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

inline Kernel builtin_kernel(const std::string& name,
                             const std::map<std::string, double>& params = {}) {
  const double kappa0 = param(params, "kappa0", 1.0);
  if (!(kappa0 > 0.0))
    throw std::invalid_argument("builtin_kernel: kappa0 must be positive");

  Kernel k;
  k.name = name;
  if (name == "constant") {
    // K = kappa0 * exp(-z), cut off at z > x
    k.eval = [kappa0](double x, double, double z) {
      return z > x ? 0.0 : kappa0 * std::exp(-z);
    };
    k.phi = [](double z) { return std::exp(-z); };
    k.c_k = kappa0;
    k.target_factor = [](double) { return 1.0; };
    k.source_factor = [kappa0](double x, double z) {
      return z > x ? 0.0 : kappa0 * std::exp(-z);
    };
  } else if (name == "product") {
    const double a = param(params, "a", 1.0);
    const double b = param(params, "b", 1.0);
    if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0)
      throw std::invalid_argument("builtin_kernel: product exponents must lie in [0,1]");
    k.eval = [kappa0, a, b](double x, double y, double z) {
      if (z > x) return 0.0;
      return kappa0 * std::pow(1.0 + x, a) * std::pow(1.0 + y, b) * std::exp(-z);
    };
    k.phi = [](double z) { return std::exp(-z); };
    k.c_k = kappa0;
    k.target_factor = [b](double y) { return std::pow(1.0 + y, b); };
    k.source_factor = [kappa0, a](double x, double z) {
      if (z > x) return 0.0;
      return kappa0 * std::pow(1.0 + x, a) * std::exp(-z);
    };
  } else if (name == "expdiff") {
    // K = kappa0*(1+y)*(exp(-z) - exp(-x)) for z <= x; vanishes at z = x,
    // so the boundary condition of the uniqueness assumption holds.
    // kappa0 <= 1 keeps the derivative bounds |d1 K| <= (1+y) phi etc.
    if (kappa0 > 1.0)
      throw std::invalid_argument("builtin_kernel: expdiff requires kappa0 <= 1");
    k.eval = [kappa0](double x, double y, double z) {
      if (z > x) return 0.0;
      return kappa0 * (1.0 + y) * (std::exp(-z) - std::exp(-x));
    };
    k.phi = [](double z) { return std::exp(-z); };
    k.c_k = kappa0;
    k.target_factor = [](double y) { return 1.0 + y; };
    k.source_factor = [kappa0](double x, double z) {
      if (z > x) return 0.0;
      return kappa0 * (std::exp(-z) - std::exp(-x));
    };
  } else {
    throw std::invalid_argument("builtin_kernel: unknown kernel '" + name + "'");
  }
  return k;
}

// Flat test kernel K = kappa0 on {z <= x}. Not integrable in z (phi == 1),
// so it fails the growth assumption globally; useful for closed-form chains
// on bounded mass where rates reduce to combinatorics.
inline Kernel ones_kernel(double kappa0 = 1.0) {
  Kernel k;
  k.name = "ones";
  k.eval = [kappa0](double x, double, double z) { return z > x ? 0.0 : kappa0; };
  k.phi = [](double) { return 1.0; };
  k.c_k = kappa0;
  k.target_factor = [](double) { return 1.0; };
  k.source_factor = [kappa0](double x, double z) { return z > x ? 0.0 : kappa0; };
  return k;
}

inline Kernel zero_kernel() {
  Kernel k;
  k.name = "zero";
  k.eval = [](double, double, double) { return 0.0; };
  k.phi = [](double) { return 0.0; };
  k.c_k = 0.0;
  k.target_factor = [](double) { return 0.0; };
  k.source_factor = [](double, double) { return 0.0; };
  return k;
}

//------------------------------------------------------------------------
// built-in admissible moments
//------------------------------------------------------------------------

// f(x) = x^(1+alpha), alpha in (0,1]; constants c1 = 1, c2 = 1+alpha
inline AdmissibleMoment power_moment(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("power_moment: alpha must lie in (0,1]");
  AdmissibleMoment m;
  m.name = "power";
  m.f = [alpha](double x) { return std::pow(x, 1.0 + alpha); };
  m.df = [alpha](double x) { return (1.0 + alpha) * std::pow(x, alpha); };
  m.c1 = 1.0;
  m.c2 = 1.0 + alpha;
  m.superlinear = true;
  return m;
}

// f(x) = (1+x) log(1+x); constants c1 = c2 = 1
inline AdmissibleMoment entropy_moment() {
  AdmissibleMoment m;
  m.name = "entropy";
  m.f = [](double x) { return (1.0 + x) * std::log1p(x); };
  m.df = [](double x) { return std::log1p(x) + 1.0; };
  m.c1 = 1.0;
  m.c2 = 1.0;
  m.superlinear = true;
  return m;
}

// f(x) = x: admissible but not superlinear (df bounded)
inline AdmissibleMoment linear_moment() {
  AdmissibleMoment m;
  m.name = "linear";
  m.f = [](double x) { return x; };
  m.df = [](double) { return 1.0; };
  m.c1 = 1.0;
  m.c2 = 1.0;
  m.superlinear = false;
  return m;
}

//------------------------------------------------------------------------
// sample grids and checker reports
//------------------------------------------------------------------------

// log-spaced per-axis samples in [lo, hi]
inline std::vector<double> log_grid(double lo = 1e-3, double hi = 1e3,
                                    int points = 17) {
  std::vector<double> g(points);
  const double la = std::log(lo), lb = std::log(hi);
  for (int i = 0; i < points; ++i)
    g[i] = std::exp(la + (lb - la) * i / (points - 1));
  return g;
}

struct CheckPoint {
  double x = 0, y = 0, z = 0;
};

struct CheckReport {
  std::string check;
  bool pass = true;
  double max_ratio = 0.0;   // worst measured value / bound
  CheckPoint worst;         // where it happened
  std::vector<std::string> violations;
};

// growth bound check: K <= c_k (1+x)(1+y) phi(z) on the grid, and K = 0
// strictly beyond the diagonal z > x
inline CheckReport check_growth_bound(const Kernel& kernel,
                            const std::vector<double>& grid = log_grid()) {
  if (grid.empty()) throw std::invalid_argument("check_growth_bound: empty grid");
  CheckReport rep;
  rep.check = "growth";
  for (double x : grid)
    for (double y : grid)
      for (double z : grid) {
        const double k = kernel.eval(x, y, z);
        if (z > x) {
          if (k != 0.0) {
            rep.pass = false;
            rep.violations.push_back("K nonzero beyond z > x");
            rep.worst = {x, y, z};
          }
          continue;
        }
        if (k < 0.0) {
          rep.pass = false;
          rep.violations.push_back("negative kernel value");
          rep.worst = {x, y, z};
          continue;
        }
        const double bound = (1.0 + x) * (1.0 + y) * kernel.phi(z);
        const double ratio = bound > 0.0 ? k / bound
                                         : (k > 0.0 ? HUGE_VAL : 0.0);
        if (ratio > rep.max_ratio) {
          rep.max_ratio = ratio;
          rep.worst = {x, y, z};
        }
      }
  if (rep.max_ratio > kernel.c_k * (1.0 + 1e-12)) {
    rep.pass = false;
    rep.violations.push_back("growth bound exceeded");
  }
  return rep;
}

// derivative bounds via central finite differences, step h*(1+coordinate):
//   |d1 K| <= (1+y) phi(z),  |d2 K| <= (1+x) phi(z),  |d1 d2 K| <= phi(z),
// plus the boundary condition K(x,y,x) = 0.
struct DerivativeReport {
  bool pass = true;
  double max_d1_excess = 0.0;   // max of |d1K| - bound (and analogously below)
  double max_d2_excess = 0.0;
  double max_d12_excess = 0.0;
  double max_boundary = 0.0;    // max |K(x,y,x)|
  CheckPoint worst;
};

inline DerivativeReport check_derivative_bounds(const Kernel& kernel,
                         const std::vector<double>& grid = log_grid(),
                         double h = 1e-4) {
  if (grid.empty()) throw std::invalid_argument("check_derivative_bounds: empty grid");
  DerivativeReport rep;
  auto consider = [&rep](double& slot, double excess, double x, double y,
                         double z) {
    if (excess > slot) {
      slot = excess;
      rep.worst = {x, y, z};
    }
  };

  for (double x : grid) {
    const double hx = h * (1.0 + x);
    // probe next to the z = x kink as well, with enough margin that the
    // stencil stays on one side of it
    std::vector<double> zs = grid;
    if (x - 8.0 * hx > 0.0) zs.push_back(x - 8.0 * hx);
    for (double y : grid) {
      rep.max_boundary = std::max(rep.max_boundary,
                                  std::abs(kernel.eval(x, y, x)));
      const double hy = h * (1.0 + y);
      for (double z : zs) {
        if (z > x - 4.0 * hx) continue;
        const double phi_z = kernel.phi(z);
        // tolerance for the O(h^2) truncation error of the stencil
        const double fd_tol =
            1e-6 * (1.0 + x) * (1.0 + y) * std::max(phi_z, 1e-12) + 1e-12;

        const double d1 = (kernel.eval(x + hx, y, z) -
                           kernel.eval(x - hx, y, z)) / (2.0 * hx);
        consider(rep.max_d1_excess,
                 std::abs(d1) - (1.0 + y) * phi_z - fd_tol, x, y, z);

        const double yl = std::max(0.0, y - hy);
        const double d2 = (kernel.eval(x, y + hy, z) - kernel.eval(x, yl, z)) /
                          (hy + (y - yl));
        consider(rep.max_d2_excess,
                 std::abs(d2) - (1.0 + x) * phi_z - fd_tol, x, y, z);

        const double d12 = (kernel.eval(x + hx, y + hy, z) -
                            kernel.eval(x + hx, yl, z) -
                            kernel.eval(x - hx, y + hy, z) +
                            kernel.eval(x - hx, yl, z)) /
                           (2.0 * hx * (hy + (y - yl)));
        consider(rep.max_d12_excess, std::abs(d12) - phi_z - fd_tol, x, y, z);
      }
    }
  }
  rep.pass = rep.max_d1_excess <= 0.0 && rep.max_d2_excess <= 0.0 &&
             rep.max_d12_excess <= 0.0 && rep.max_boundary <= 1e-12;
  return rep;
}

// pointwise verification of the two admissible-moment inequalities and a
// growth probe of df for the superlinear flag
struct AdmissibleReport {
  bool pass_a0 = true;      // both inequalities with the stated c1, c2
  bool pass_superlinear = true;
  double max_sub_ratio = 0.0;   // df(x+z) / (c1 (df(x)+df(z)))
  double max_ctrl_ratio = 0.0;  // df(x) / (c2 (1 + f(x)/(1+x)))
  double df_growth = 0.0;       // df(max grid) / max(df(1), tiny)
};

inline AdmissibleReport check_admissible(
    const AdmissibleMoment& m, const std::vector<double>& grid = log_grid()) {
  if (grid.empty()) throw std::invalid_argument("check_admissible: empty grid");
  AdmissibleReport rep;
  const double tol = 1.0 + 1e-9;
  double prev_df = -HUGE_VAL;
  for (double x : grid) {
    const double dfx = m.df(x);
    if (m.f(x) < 0.0 || dfx < 0.0 || dfx < prev_df - 1e-12) rep.pass_a0 = false;
    prev_df = dfx;
    const double ctrl = m.c2 * (1.0 + m.f(x) / (1.0 + x));
    rep.max_ctrl_ratio = std::max(rep.max_ctrl_ratio,
                                  ctrl > 0 ? dfx / ctrl : HUGE_VAL);
    for (double z : grid) {
      const double sub = m.c1 * (dfx + m.df(z));
      rep.max_sub_ratio = std::max(rep.max_sub_ratio,
                                   sub > 0 ? m.df(x + z) / sub : HUGE_VAL);
    }
  }
  if (rep.max_sub_ratio > tol || rep.max_ctrl_ratio > tol) rep.pass_a0 = false;
  rep.df_growth = m.df(grid.back()) / std::max(m.df(1.0), 1e-300);
  rep.pass_superlinear = rep.df_growth >= 2.0;
  return rep;
}

//------------------------------------------------------------------------
// Riemann-sum diagnostics and envelope norms
//------------------------------------------------------------------------

struct RiemannResult {
  double sum = 0.0;       // eps * sum_{d=1..n} f(d eps)
  double integral = 0.0;  // int_0^{n eps} f
  double bound = 0.0;     // (n eps) * omega_f(eps)
};

// |eps * sum f(d eps) - int f| <= (n eps) * omega_f(eps); omega estimated
// numerically unless supplied
inline RiemannResult riemann_check(const std::function<double(double)>& f,
                                   double eps, long n,
                                   double omega = -1.0) {
  RiemannResult r;
  const double hi = n * eps;
  double acc = 0.0;
  for (long d = 1; d <= n; ++d) acc += f(d * eps);
  r.sum = eps * acc;
  r.integral = hi > 0 ? integrate(f, 0.0, hi, 1e-12) : 0.0;
  if (omega < 0.0) omega = estimate_modulus(f, eps, hi);
  r.bound = hi * omega;
  return r;
}

// ||phi||_{1,1} = int_0^inf (1+z) phi(z) dz
inline double phi_norm_11(const std::function<double(double)>& phi,
                          double tol = 1e-8) {
  return integrate_halfline([&phi](double z) { return (1.0 + z) * phi(z); },
                            tol);
}

}  // namespace cgedg

#endif  // CGEDG_KERNELS_HPP
