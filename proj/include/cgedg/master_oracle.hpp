#ifndef CGEDG_MASTER_ORACLE_HPP
#define CGEDG_MASTER_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "cgedg/kernels.hpp"
#include "cgedg/measures.hpp"

namespace cgedg {

// Empirical-measure states for tiny (N, L): partitions of N into at most L
// parts, stored as descending size vectors of length L (zeros included).
// The lumped chain on these classes is Markov because jump rates depend on
// cluster sizes only.
struct StateSpace {
  long n = 0;
  long l = 0;
  double eps = 1.0;
  std::vector<std::vector<long>> states;
  std::map<std::vector<long>, std::size_t> index;

  std::size_t size() const { return states.size(); }

  GridMeasure measure(std::size_t s) const {
    std::vector<long> counts(static_cast<std::size_t>(n) + 1, 0);
    for (long v : states[s]) counts[static_cast<std::size_t>(v)] += 1;
    return empirical_from_counts(eps, counts, l);
  }
};

inline StateSpace enumerate_states(long n, long l, double eps,
                                   std::size_t guard = 1000000) {
  if (n < 0 || l < 2 || !(eps > 0.0))
    throw std::invalid_argument("enumerate_states: bad (N, L, eps)");
  StateSpace space;
  space.n = n;
  space.l = l;
  space.eps = eps;

  std::vector<long> parts;
  // descending partitions of `remaining` into at most `slots` parts, each
  // bounded by `cap`
  std::function<void(long, long, long)> rec = [&](long remaining, long slots,
                                                  long cap) {
    if (remaining == 0) {
      std::vector<long> state = parts;
      state.resize(static_cast<std::size_t>(l), 0);
      space.index.emplace(state, space.states.size());
      space.states.push_back(std::move(state));
      if (space.states.size() > guard)
        throw std::runtime_error("enumerate_states: state space exceeds guard");
      return;
    }
    if (slots == 0) return;
    for (long first = std::min(cap, remaining); first >= 1; --first) {
      if (first * slots < remaining) break;  // cannot fit the rest
      parts.push_back(first);
      rec(remaining - first, slots - 1, first);
      parts.pop_back();
    }
  };
  rec(n, l, n);
  return space;
}

// number of partitions of n into at most l parts, for cross-checks:
// dp2[j][v] counts partitions of v into at most j parts
inline std::uint64_t partition_count(long n, long l) {
  std::vector<std::vector<std::uint64_t>> dp2(
      static_cast<std::size_t>(l) + 1,
      std::vector<std::uint64_t>(static_cast<std::size_t>(n) + 1, 0));
  for (long j = 0; j <= l; ++j) dp2[static_cast<std::size_t>(j)][0] = 1;
  for (long j = 1; j <= l; ++j)
    for (long v = 1; v <= n; ++v) {
      dp2[static_cast<std::size_t>(j)][static_cast<std::size_t>(v)] =
          dp2[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(v)];
      if (v - j >= 0)
        dp2[static_cast<std::size_t>(j)][static_cast<std::size_t>(v)] +=
            dp2[static_cast<std::size_t>(j)][static_cast<std::size_t>(v - j)];
    }
  return dp2[static_cast<std::size_t>(l)][static_cast<std::size_t>(n)];
}

// dense generator of the lumped empirical-measure chain; row sums vanish
struct GeneratorMatrix {
  std::size_t dim = 0;
  std::vector<double> q;  // row-major

  double& at(std::size_t from, std::size_t to) { return q[from * dim + to]; }
  double at(std::size_t from, std::size_t to) const {
    return q[from * dim + to];
  }
};

inline GeneratorMatrix build_generator(const StateSpace& space,
                                       const Kernel& kernel) {
  GeneratorMatrix gen;
  gen.dim = space.size();
  gen.q.assign(gen.dim * gen.dim, 0.0);
  const double eps = space.eps;

  for (std::size_t s = 0; s < space.size(); ++s) {
    const auto& sizes = space.states[s];
    std::map<long, long> occ;
    for (long v : sizes) occ[v] += 1;

    for (const auto& [k, nk] : occ) {
      if (k == 0) continue;
      for (const auto& [l, nl] : occ) {
        const double pairs =
            static_cast<double>(nk) * nl - (k == l ? nk : 0.0);
        if (pairs <= 0.0) continue;
        for (long d = 1; d <= k; ++d) {
          const double kval = kernel.eval(k * eps, l * eps, d * eps);
          if (kval == 0.0) continue;
          const double rate = kval * eps * pairs / (space.l - 1.0);

          std::vector<long> target = sizes;
          // replace one k by k-d and one l by l+d
          auto itk = std::find(target.begin(), target.end(), k);
          *itk = k - d;
          auto itl = std::find(target.begin(), target.end(), l);
          if (itl == itk) itl = std::find(std::next(itk), target.end(), l);
          *itl = l + d;
          std::sort(target.begin(), target.end(), std::greater<long>());

          const auto found = space.index.find(target);
          if (found == space.index.end())
            throw std::runtime_error("build_generator: jump leaves the state space");
          if (found->second == s) continue;  // self-class jump
          gen.at(s, found->second) += rate;
          gen.at(s, s) -= rate;
        }
      }
    }
  }
  return gen;
}

//------------------------------------------------------------------------
// forward equation dp/dt = p Q, Dormand-Prince 5(4) with step control
//------------------------------------------------------------------------

namespace detail {

inline void vec_mat(const std::vector<double>& p, const GeneratorMatrix& gen,
                    std::vector<double>& out) {
  const std::size_t n = gen.dim;
  out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = p[i];
    if (pi == 0.0) continue;
    const double* row = gen.q.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += pi * row[j];
  }
}

}  // namespace detail

inline std::vector<double> evolve_law(const GeneratorMatrix& gen,
                                      std::vector<double> p, double t,
                                      double tol = 1e-12) {
  if (t < 0.0) throw std::invalid_argument("evolve_law: negative time");
  if (p.size() != gen.dim)
    throw std::invalid_argument("evolve_law: distribution size mismatch");
  if (t == 0.0 || gen.dim == 0) return p;

  // Dormand-Prince coefficients
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                      a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const std::size_t n = gen.dim;
  double max_rate = 1e-12;
  for (std::size_t i = 0; i < n; ++i)
    max_rate = std::max(max_rate, -gen.at(i, i));

  double time = 0.0;
  double dt = std::min(t, 0.1 / max_rate);
  std::vector<double> k1, k2, k3, k4, k5, k6, k7, tmp(n), cand(n);
  detail::vec_mat(p, gen, k1);

  int rejections_in_a_row = 0;
  while (time < t) {
    dt = std::min(dt, t - time);
    auto stage = [&](const std::vector<double>& coeffs,
                     const std::vector<const std::vector<double>*>& ks,
                     std::vector<double>& out) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = p[j];
        for (std::size_t m = 0; m < ks.size(); ++m)
          acc += dt * coeffs[m] * (*ks[m])[j];
        tmp[j] = acc;
      }
      detail::vec_mat(tmp, gen, out);
    };
    stage({a21}, {&k1}, k2);
    stage({a31, a32}, {&k1, &k2}, k3);
    stage({a41, a42, a43}, {&k1, &k2, &k3}, k4);
    stage({a51, a52, a53, a54}, {&k1, &k2, &k3, &k4}, k5);
    stage({a61, a62, a63, a64, a65}, {&k1, &k2, &k3, &k4, &k5}, k6);
    for (std::size_t j = 0; j < n; ++j)
      cand[j] = p[j] + dt * (b1 * k1[j] + b3 * k3[j] + b4 * k4[j] +
                             b5 * k5[j] + b6 * k6[j]);
    detail::vec_mat(cand, gen, k7);

    double err = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      err = std::max(err, std::abs(dt * (e1 * k1[j] + e3 * k3[j] + e4 * k4[j] +
                                         e5 * k5[j] + e6 * k6[j] +
                                         e7 * k7[j])));
    if (err <= tol) {
      time += dt;
      p.swap(cand);
      k1.swap(k7);  // FSAL
      rejections_in_a_row = 0;
    } else if (++rejections_in_a_row > 60) {
      throw std::runtime_error("evolve_law: step control failure");
    }
    const double scale =
        err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 2.0;
    dt *= std::clamp(scale, 0.2, 2.0);
    if (!(dt > 1e-15 * std::max(1.0, t)))
      throw std::runtime_error("evolve_law: step underflow");
  }
  return p;
}

inline double expected_observable(const StateSpace& space,
                                  const std::vector<double>& p,
                                  const std::function<double(double)>& f) {
  if (p.size() != space.size())
    throw std::invalid_argument("expected_observable: size mismatch");
  double acc = 0.0;
  for (std::size_t s = 0; s < space.size(); ++s) {
    if (p[s] == 0.0) continue;
    double m = 0.0;
    for (long v : space.states[s]) m += f(v * space.eps);
    acc += p[s] * m / space.l;
  }
  return acc;
}

// expectation of a functional of the whole empirical state
inline double expected_state_functional(
    const StateSpace& space, const std::vector<double>& p,
    const std::function<double(const std::vector<long>&)>& f) {
  double acc = 0.0;
  for (std::size_t s = 0; s < space.size(); ++s)
    if (p[s] != 0.0) acc += p[s] * f(space.states[s]);
  return acc;
}

}  // namespace cgedg

#endif  // CGEDG_MASTER_ORACLE_HPP
