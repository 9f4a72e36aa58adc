#ifndef CGEDG_INIT_HPP
#define CGEDG_INIT_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "cgedg/measures.hpp"
#include "cgedg/particle_sim.hpp"
#include "cgedg/quadrature.hpp"
#include "cgedg/rng.hpp"

namespace cgedg {

// Discretized exponential reference measure
//   g_{eps,b}(m eps) = b * int_{m eps}^{(m+1) eps} e^{-b x} dx
//                    = e^{-b m eps} (1 - e^{-b eps}),
// normalized on eps*N_0 by the geometric series.
struct ReferenceMeasure {
  double eps;
  double b;

  double log_g(long m) const {
    return -b * m * eps + std::log1p(-std::exp(-b * eps));
  }
  double g(long m) const { return std::exp(log_g(m)); }
};

inline double g_eps_b(double eps, double b, long m) {
  if (!(eps > 0.0) || !(b > 0.0))
    throw std::invalid_argument("g_eps_b: eps and b must be positive");
  return std::exp(-b * m * eps) * (-std::expm1(-b * eps));
}

//------------------------------------------------------------------------
// density discretization with exact mass and first-moment bookkeeping
//------------------------------------------------------------------------

// Floors L * (bin integral) to integer cluster counts, then restores unit
// mass and the exact first moment N eps / L:
//  - if a_{L,eps} >= 1/L: add one cluster at bin b_{L,eps} and the rest of
//    the missing mass at 0;
//  - if a_{L,eps} = 0: move one cluster from the smallest occupied bin k'
//    up to k' + b_{L,eps}.
// The output is empirical-compatible: counts are integers, sum(counts) = L
// and sum(k * counts) = N hold exactly in integer arithmetic.
inline GridMeasure discretize_density(
    const std::function<double(double)>& density, long n, long l, double eps) {
  if (l < 2 || n < 0 || !(eps > 0.0))
    throw std::invalid_argument("discretize_density: bad (N, L, eps)");

  std::vector<long> counts(static_cast<std::size_t>(n) + 1, 0);
  long count_total = 0;
  std::int64_t moment_total = 0;
  for (long k = 0; k <= n; ++k) {
    const double bin_mass = integrate(density, k * eps, (k + 1) * eps, 1e-13);
    const long c = static_cast<long>(std::floor(l * bin_mass + 1e-12));
    if (c <= 0) continue;
    counts[static_cast<std::size_t>(k)] = c;
    count_total += c;
    moment_total += static_cast<std::int64_t>(c) * k;
  }
  if (count_total > l)
    throw std::runtime_error("discretize_density: density mass exceeds 1");

  const long a_num = l - count_total;            // L * a_{L,eps}
  const std::int64_t b_corr = n - moment_total;  // b_{L,eps}
  if (b_corr < 0)
    throw std::runtime_error(
        "discretize_density: first moment of the density exceeds N eps / L");

  if (a_num >= 1) {
    if (b_corr > n)
      throw std::runtime_error("discretize_density: correction mass exceeds grid");
    counts[static_cast<std::size_t>(b_corr)] += 1;
    counts[0] += a_num - 1;
  } else {
    long kp = -1;
    for (long k = 0; k <= n; ++k)
      if (counts[static_cast<std::size_t>(k)] > 0) {
        kp = k;
        break;
      }
    if (kp < 0 || kp + b_corr > n)
      throw std::runtime_error("discretize_density: correction mass exceeds grid");
    counts[static_cast<std::size_t>(kp)] -= 1;
    counts[static_cast<std::size_t>(kp + b_corr)] += 1;
  }
  return empirical_from_counts(eps, counts, l);
}

// Variant used by convergence studies: the missing mass is re-inserted in
// the bulk (at the mean of the missing moment) instead of as one far-out
// cluster, which keeps second moments bounded along refinement schedules.
// Same exact integer bookkeeping as discretize_density.
inline GridMeasure discretize_density_bulk(
    const std::function<double(double)>& density, long n, long l, double eps) {
  if (l < 2 || n < 0 || !(eps > 0.0))
    throw std::invalid_argument("discretize_density_bulk: bad (N, L, eps)");

  std::vector<long> counts(static_cast<std::size_t>(n) + 1, 0);
  long count_total = 0;
  std::int64_t moment_total = 0;
  for (long k = 0; k <= n; ++k) {
    const double bin_mass = integrate(density, k * eps, (k + 1) * eps, 1e-13);
    const long c = static_cast<long>(std::floor(l * bin_mass + 1e-12));
    if (c <= 0) continue;
    counts[static_cast<std::size_t>(k)] = c;
    count_total += c;
    moment_total += static_cast<std::int64_t>(c) * k;
  }
  long a_num = l - count_total;
  std::int64_t b_corr = n - moment_total;
  if (a_num < 0 || b_corr < 0)
    throw std::runtime_error("discretize_density_bulk: density inconsistent with (N, L, eps)");

  if (a_num == 0) {
    // fall back to the single-move correction
    long kp = 0;
    while (kp <= n && counts[static_cast<std::size_t>(kp)] == 0) ++kp;
    if (kp > n || kp + b_corr > n)
      throw std::runtime_error("discretize_density_bulk: correction exceeds grid");
    counts[static_cast<std::size_t>(kp)] -= 1;
    counts[static_cast<std::size_t>(kp + b_corr)] += 1;
  } else {
    // place a_num clusters at bins m and m+1 so that the added moment is
    // exactly b_corr: m = floor(b_corr / a_num), r = b_corr - a_num * m
    const std::int64_t m = b_corr / a_num;
    const std::int64_t r = b_corr - m * a_num;
    if (m + 1 > n)
      throw std::runtime_error("discretize_density_bulk: correction exceeds grid");
    counts[static_cast<std::size_t>(m)] += a_num - r;
    counts[static_cast<std::size_t>(m + 1)] += r;
  }
  return empirical_from_counts(eps, counts, l);
}

//------------------------------------------------------------------------
// fibers of the empirical-measure map
//------------------------------------------------------------------------

inline std::vector<long> integer_counts(const GridMeasure& c) {
  if (c.kind != GridMeasure::Kind::Empirical || c.cluster_count < 1)
    throw std::invalid_argument("expected an empirical measure");
  std::vector<long> counts(c.weights.size(), 0);
  long total = 0;
  for (std::size_t k = 0; k < c.weights.size(); ++k) {
    const double scaled = c.weights[k] * c.cluster_count;
    const double rounded = std::round(scaled);
    if (std::abs(scaled - rounded) > 1e-9)
      throw std::invalid_argument("weights are not multiples of 1/L");
    counts[k] = static_cast<long>(rounded);
    total += counts[k];
  }
  if (total != c.cluster_count)
    throw std::invalid_argument("weights do not sum to 1");
  return counts;
}

// log |fiber| = log L! - sum_k log (c(k eps) L)!
inline double log_factorial(long nn) {
  if (nn < 0) throw std::invalid_argument("log_factorial: negative argument");
  if (nn <= 20) {
    double p = 1.0;
    for (long i = 2; i <= nn; ++i) p *= i;
    return std::log(p);
  }
  return std::lgamma(static_cast<double>(nn) + 1.0);
}

inline double fiber_log_size(const GridMeasure& c) {
  const auto counts = integer_counts(c);
  double acc = log_factorial(c.cluster_count);
  for (long nk : counts)
    if (nk > 1) acc -= log_factorial(nk);
  return acc;
}

// Uniform sample from the fiber {eta : C^L(eta) = c}: the multiset of sizes
// is assigned to cluster indices by a uniform random permutation. The
// empirical measure of the output equals c exactly.
inline Configuration sample_fiber(const GridMeasure& c, Rng& rng) {
  const auto counts = integer_counts(c);
  std::vector<std::int64_t> sizes;
  sizes.reserve(static_cast<std::size_t>(c.cluster_count));
  for (std::size_t k = 0; k < counts.size(); ++k)
    for (long i = 0; i < counts[k]; ++i)
      sizes.push_back(static_cast<std::int64_t>(k));
  for (std::size_t i = sizes.size(); i > 1; --i)
    std::swap(sizes[i - 1], sizes[rng.uniform_int(i)]);
  return make_configuration(c.eps, std::move(sizes));
}

// (1/L) H(uniform-on-fiber | nu_{L,eps,b})
//   = -(1/L) log |fiber| - sum_k c(k eps) log g_{eps,b}(k eps)
inline double initial_entropy(const GridMeasure& c,
                              const ReferenceMeasure& ref) {
  const auto counts = integer_counts(c);
  double cross = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] > 0)
      cross += (static_cast<double>(counts[k]) / c.cluster_count) *
               ref.log_g(static_cast<long>(k));
  return -fiber_log_size(c) / c.cluster_count - cross;
}

}  // namespace cgedg

#endif  // CGEDG_INIT_HPP
