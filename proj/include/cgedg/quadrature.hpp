#ifndef CGEDG_QUADRATURE_HPP
#define CGEDG_QUADRATURE_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace cgedg {

namespace detail {

inline double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fm,
                                   double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol,
                              depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol,
                              depth - 1);
}

}  // namespace detail

// adaptive Simpson on [a,b]
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-10) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = detail::simpson(a, b, fa, fm, fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// integral over [0, inf) of an integrable f, by doubling the cutoff until
// the increment falls below tol
inline double integrate_halfline(const std::function<double(double)>& f,
                                 double tol = 1e-8) {
  double total = 0.0;
  double a = 0.0, b = 8.0;
  for (int i = 0; i < 16; ++i) {
    const double piece = integrate(f, a, b, tol * 0.1);
    total += piece;
    if (i > 0 && std::abs(piece) < tol) return total;
    a = b;
    b *= 2.0;
  }
  throw std::runtime_error("integrate_halfline: no convergence, integrand may not be integrable");
}

// numerical estimate of the modulus of uniform continuity omega_f(delta)
// = sup_{|u-v|<=delta} |f(u)-f(v)|, scanned over [0, hi]
inline double estimate_modulus(const std::function<double(double)>& f,
                               double delta, double hi, int samples = 4096) {
  double omega = 0.0;
  const double step = hi / samples;
  double prev = f(0.0);
  // coarse scan of |f(s+delta)-f(s)| plus adjacent-sample variation so a
  // kink between sample points is still seen
  for (int i = 0; i <= samples; ++i) {
    const double s = i * step;
    const double a = f(s);
    const double b = f(s + delta);
    omega = std::max(omega, std::abs(b - a));
    if (i > 0 && step <= delta)
      omega = std::max(omega, std::abs(a - prev));
    prev = a;
  }
  return omega;
}

}  // namespace cgedg

#endif  // CGEDG_QUADRATURE_HPP
