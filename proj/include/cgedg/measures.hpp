#ifndef CGEDG_MEASURES_HPP
#define CGEDG_MEASURES_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <functional>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cgedg {

// Probability measure supported on the mass grid eps*{0,..,N}. Empirical
// measures additionally carry the cluster count L and have weights in
// (1/L) * N_0.
struct GridMeasure {
  enum class Kind { Empirical, Density };

  double eps = 1.0;
  std::vector<double> weights;  // weights[k] sits at mass k*eps
  Kind kind = Kind::Density;
  long cluster_count = 0;       // L, meaningful for empirical measures

  std::size_t bins() const { return weights.size(); }
  double mass_at(std::size_t k) const { return k * eps; }

  // pad with zero bins up to n+1 entries (for solver headroom)
  GridMeasure with_bins(std::size_t n) const {
    GridMeasure out = *this;
    if (out.weights.size() < n + 1) out.weights.resize(n + 1, 0.0);
    return out;
  }

  // resize to exactly n+1 bins; refuses to drop positive weight
  GridMeasure resized(std::size_t n) const {
    GridMeasure out = *this;
    for (std::size_t k = n + 1; k < out.weights.size(); ++k)
      if (out.weights[k] != 0.0)
        throw std::invalid_argument("GridMeasure::resized would truncate mass");
    out.weights.resize(n + 1, 0.0);
    return out;
  }
};

inline GridMeasure density_measure(double eps, std::vector<double> weights) {
  GridMeasure m;
  m.eps = eps;
  m.weights = std::move(weights);
  m.kind = GridMeasure::Kind::Density;
  return m;
}

inline GridMeasure empirical_from_counts(double eps,
                                         const std::vector<long>& counts,
                                         long total_clusters) {
  GridMeasure m;
  m.eps = eps;
  m.kind = GridMeasure::Kind::Empirical;
  m.cluster_count = total_clusters;
  m.weights.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k)
    m.weights[k] = static_cast<double>(counts[k]) / total_clusters;
  return m;
}

inline GridMeasure dirac(double eps, std::size_t k) {
  GridMeasure m;
  m.eps = eps;
  m.weights.assign(k + 1, 0.0);
  m.weights[k] = 1.0;
  return m;
}

struct MeasureCheck {
  bool ok = true;
  std::string reason;
};

inline MeasureCheck validate(const GridMeasure& m) {
  double total = 0.0;
  for (double w : m.weights) {
    if (w < 0.0) return {false, "negative weight"};
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) return {false, "mass differs from 1"};
  if (m.kind == GridMeasure::Kind::Empirical) {
    if (m.cluster_count < 2) return {false, "empirical measure needs L >= 2"};
    for (double w : m.weights) {
      const double scaled = w * m.cluster_count;
      if (std::abs(scaled - std::round(scaled)) > 1e-9)
        return {false, "empirical weight not a multiple of 1/L"};
    }
  }
  return {};
}

//------------------------------------------------------------------------
// moments and the exchange gradient
//------------------------------------------------------------------------

inline double moment(const GridMeasure& mu,
                     const std::function<double(double)>& f) {
  double acc = 0.0;
  for (std::size_t k = 0; k < mu.weights.size(); ++k)
    if (mu.weights[k] != 0.0) acc += f(k * mu.eps) * mu.weights[k];
  return acc;
}

inline double first_moment(const GridMeasure& mu) {
  return moment(mu, [](double x) { return x; });
}

inline double second_moment(const GridMeasure& mu) {
  return moment(mu, [](double x) { return x * x; });
}

// gamma^{x,y,z} . f = -f(x) - f(y) + f(x-z) + f(y+z), defined for z <= x
inline double exchange_gradient(const std::function<double(double)>& f,
                                double x, double y, double z) {
  if (z > x)
    throw std::invalid_argument("exchange_gradient: requires z <= x");
  return -f(x) - f(y) + f(x - z) + f(y + z);
}

//------------------------------------------------------------------------
// tails and the exact W1 metric
//------------------------------------------------------------------------

// T_mu(x) = mu([x, inf)), piecewise constant between support points; the
// stored value[i] is the tail just past breakpoint[i].
struct TailFunction {
  std::vector<double> breakpoints;
  std::vector<double> values;

  double operator()(double x) const {
    // largest i with breakpoints[i] < x decides the value
    auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), x);
    if (it == breakpoints.begin()) return 1.0;
    return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
  }
};

inline TailFunction tail(const GridMeasure& mu) {
  TailFunction t;
  std::vector<std::size_t> support;
  for (std::size_t k = 0; k < mu.weights.size(); ++k)
    if (mu.weights[k] != 0.0) support.push_back(k);
  t.breakpoints.resize(support.size());
  t.values.resize(support.size());
  // backward pass so the value past the last atom is exactly zero
  double suffix = 0.0;
  for (std::size_t i = support.size(); i-- > 0;) {
    t.breakpoints[i] = support[i] * mu.eps;
    t.values[i] = suffix;
    suffix += mu.weights[support[i]];
  }
  return t;
}

// W1(mu, nu) = int |T_mu - T_nu| computed exactly by merging atom
// positions; grids need not match.
inline double w1(const GridMeasure& mu, const GridMeasure& nu) {
  struct Atom {
    double pos;
    double wa;
    double wb;
  };
  std::vector<Atom> atoms;
  atoms.reserve(mu.weights.size() + nu.weights.size());
  for (std::size_t k = 0; k < mu.weights.size(); ++k)
    if (mu.weights[k] != 0.0) atoms.push_back({k * mu.eps, mu.weights[k], 0.0});
  for (std::size_t k = 0; k < nu.weights.size(); ++k)
    if (nu.weights[k] != 0.0) atoms.push_back({k * nu.eps, 0.0, nu.weights[k]});
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.pos < b.pos; });

  double dist = 0.0;
  double ta = 1.0, tb = 1.0;  // tails on the current open interval
  double prev = 0.0;
  std::size_t i = 0;
  while (i < atoms.size()) {
    const double pos = atoms[i].pos;
    dist += (pos - prev) * std::abs(ta - tb);
    // drop every atom sitting exactly at pos from both tails
    for (; i < atoms.size() && atoms[i].pos == pos; ++i) {
      ta -= atoms[i].wa;
      tb -= atoms[i].wb;
    }
    prev = pos;
  }
  return dist;
}

//------------------------------------------------------------------------
// serialization: CSV rows and the binary checkpoint format
//------------------------------------------------------------------------

inline void to_csv(const GridMeasure& mu, std::ostream& os) {
  os << "mass,weight\n";
  for (std::size_t k = 0; k < mu.weights.size(); ++k) {
    if (mu.weights[k] == 0.0) continue;
    char line[64];
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", k * mu.eps,
                  mu.weights[k]);
    os << line;
  }
}

inline constexpr char kCheckpointMagic[16] = {'C', 'G', 'E', 'D', 'G', '-',
                                              'C', 'K', 'P', 'T', '-', 'v',
                                              '0', '0', '1', '\0'};

// layout: magic(16) | eps f64 | N u64 | N+1 weights f64, little-endian
inline void write_checkpoint(const GridMeasure& mu, std::ostream& os) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint writer assumes a little-endian host");
  os.write(kCheckpointMagic, 16);
  const double eps = mu.eps;
  os.write(reinterpret_cast<const char*>(&eps), 8);
  const uint64_t n = mu.weights.empty() ? 0 : mu.weights.size() - 1;
  os.write(reinterpret_cast<const char*>(&n), 8);
  os.write(reinterpret_cast<const char*>(mu.weights.data()),
           static_cast<std::streamsize>(8 * mu.weights.size()));
}

inline GridMeasure read_checkpoint(std::istream& is) {
  char magic[16];
  is.read(magic, 16);
  if (!is || std::memcmp(magic, kCheckpointMagic, 16) != 0)
    throw std::runtime_error("read_checkpoint: bad magic");
  GridMeasure mu;
  uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&mu.eps), 8);
  is.read(reinterpret_cast<char*>(&n), 8);
  mu.weights.resize(n + 1);
  is.read(reinterpret_cast<char*>(mu.weights.data()),
          static_cast<std::streamsize>(8 * (n + 1)));
  if (!is) throw std::runtime_error("read_checkpoint: truncated data");
  return mu;
}

// time-stamped sequence of measures
struct Trajectory {
  std::vector<double> times;
  std::vector<GridMeasure> snapshots;

  std::size_t size() const { return times.size(); }
};

}  // namespace cgedg

#endif  // CGEDG_MEASURES_HPP
