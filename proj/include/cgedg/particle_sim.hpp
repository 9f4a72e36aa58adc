#ifndef CGEDG_PARTICLE_SIM_HPP
#define CGEDG_PARTICLE_SIM_HPP

#include <algorithm>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "cgedg/kernels.hpp"
#include "cgedg/measures.hpp"
#include "cgedg/rng.hpp"

namespace cgedg {

// Microscopic state: L clusters with integer masses (units of eps) summing
// to N exactly.
struct Configuration {
  double eps = 1.0;
  std::vector<std::int64_t> sizes;
  std::int64_t n_total = 0;

  long cluster_count() const { return static_cast<long>(sizes.size()); }
};

inline Configuration make_configuration(double eps,
                                        std::vector<std::int64_t> sizes) {
  Configuration c;
  c.eps = eps;
  c.sizes = std::move(sizes);
  if (c.sizes.size() < 2)
    throw std::invalid_argument("Configuration: needs L >= 2 clusters");
  for (auto s : c.sizes)
    if (s < 0) throw std::invalid_argument("Configuration: negative size");
  c.n_total = 0;
  for (auto s : c.sizes) c.n_total += s;
  return c;
}

inline GridMeasure empirical_measure(const Configuration& config) {
  std::int64_t max_size = 0;
  for (auto s : config.sizes) max_size = std::max(max_size, s);
  std::vector<long> counts(static_cast<std::size_t>(max_size) + 1, 0);
  for (auto s : config.sizes) counts[static_cast<std::size_t>(s)] += 1;
  return empirical_from_counts(config.eps, counts, config.cluster_count());
}

// mesoscopic rate kappa^L_eps[c](x,y,z) with x = k eps, y = l eps, z = d eps:
//   (L/(L-1)) * K(x,y,z) * eps * c(x) * (c(y) - 1/L * delta_{x,y})
inline double kappa(const GridMeasure& c, const Kernel& kernel, long k, long l,
                    long d) {
  if (c.kind != GridMeasure::Kind::Empirical || c.cluster_count < 2)
    throw std::invalid_argument("kappa: needs an empirical measure with L >= 2");
  if (d < 1 || d > k) throw std::invalid_argument("kappa: requires 1 <= d <= k");
  const double big_l = static_cast<double>(c.cluster_count);
  auto weight = [&](long idx) {
    const double w =
        idx < static_cast<long>(c.weights.size()) ? c.weights[static_cast<std::size_t>(idx)] : 0.0;
    const double scaled = w * big_l;
    if (w < 0.0 || std::abs(scaled - std::round(scaled)) > 1e-9)
      throw std::invalid_argument("kappa: invalid empirical weights");
    return w;
  };
  const double ck = weight(k);
  const double cl = weight(l) - (k == l ? 1.0 / big_l : 0.0);
  const double rate = big_l / (big_l - 1.0) *
                      kernel.eval(k * c.eps, l * c.eps, d * c.eps) * c.eps *
                      ck * cl;
  if (rate < 0.0) throw std::invalid_argument("kappa: negative rate from invalid weights");
  return rate;
}

//------------------------------------------------------------------------
// cached exchange sums S(k,l) = eps * sum_{d=1..k} K(k eps, l eps, d eps)
// and the per-pair amount distributions
//------------------------------------------------------------------------

// Shared between replicas of one (kernel, eps) ensemble; not thread-safe,
// give each worker thread its own instance.
class RateCache {
 public:
  RateCache(const Kernel& kernel, double eps) : kernel_(kernel), eps_(eps) {}

  double pair_sum(long k, long l) {
    if (kernel_.separable()) return source_sum(k) * target_value(l);
    const std::uint64_t key = pair_key(k, l);
    auto it = pair_sums_.find(key);
    if (it != pair_sums_.end()) return it->second;
    double acc = 0.0;
    for (long d = 1; d <= k; ++d)
      acc += kernel_.eval(k * eps_, l * eps_, d * eps_);
    const double s = eps_ * acc;
    if (pair_sums_.size() > (1u << 22)) pair_sums_.clear();
    pair_sums_.emplace(key, s);
    return s;
  }

  // cumulative weights over d = 1..k, proportional to K(k eps, l eps, d eps)
  const std::vector<double>& amount_cdf(long k, long l) {
    if (kernel_.separable()) l = -1;  // the d-law does not depend on l
    const std::uint64_t key = pair_key(k, l);
    auto it = cdfs_.find(key);
    if (it != cdfs_.end()) return it->second;
    std::vector<double> cdf(static_cast<std::size_t>(k));
    double acc = 0.0;
    for (long d = 1; d <= k; ++d) {
      acc += l < 0 ? kernel_.source_factor(k * eps_, d * eps_)
                   : kernel_.eval(k * eps_, l * eps_, d * eps_);
      cdf[static_cast<std::size_t>(d - 1)] = acc;
    }
    if (cdfs_.size() > (1u << 16)) cdfs_.clear();
    return cdfs_.emplace(key, std::move(cdf)).first->second;
  }

  double eps() const { return eps_; }
  const Kernel& kernel() const { return kernel_; }

  // eps * sum_d source_factor(k eps, d eps); the k-marginal weight of the
  // separable decomposition
  double source_sum(long k) {
    const auto idx = static_cast<std::size_t>(k);
    if (idx < source_sums_.size() && source_sums_[idx] >= 0.0)
      return source_sums_[idx];
    if (idx >= source_sums_.size()) source_sums_.resize(idx + 1, -1.0);
    double acc = 0.0;
    for (long d = 1; d <= k; ++d)
      acc += kernel_.source_factor(k * eps_, d * eps_);
    source_sums_[idx] = eps_ * acc;
    return source_sums_[idx];
  }

  double target_value(long l) {
    const auto idx = static_cast<std::size_t>(l);
    if (idx < target_values_.size() && target_values_[idx] >= 0.0)
      return target_values_[idx];
    if (idx >= target_values_.size()) target_values_.resize(idx + 1, -1.0);
    target_values_[idx] = kernel_.target_factor(l * eps_);
    return target_values_[idx];
  }

 private:
  static std::uint64_t pair_key(long k, long l) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k)) << 32) |
           static_cast<std::uint32_t>(l);
  }

  const Kernel& kernel_;
  double eps_;
  std::vector<double> source_sums_;    // eps * sum_d source_factor, per k
  std::vector<double> target_values_;  // target_factor(l eps), per l
  std::unordered_map<std::uint64_t, double> pair_sums_;
  std::unordered_map<std::uint64_t, std::vector<double>> cdfs_;
};

// microscopic total jump rate, assembled over size classes:
//   (1/(L-1)) * sum_{k>=1,l} S(k,l) * (n_k n_l - 1{k=l} n_k)
inline double total_rate(const Configuration& config, const Kernel& kernel) {
  RateCache cache(kernel, config.eps);
  std::unordered_map<std::int64_t, long> occ;
  for (auto s : config.sizes) occ[s] += 1;
  double acc = 0.0;
  for (const auto& [k, nk] : occ) {
    if (k == 0) continue;
    for (const auto& [l, nl] : occ) {
      const double pairs = static_cast<double>(nk) * nl - (k == l ? nk : 0);
      if (pairs <= 0.0) continue;
      acc += cache.pair_sum(k, l) * pairs;
    }
  }
  return acc / (config.cluster_count() - 1.0);
}

struct JumpEvent {
  double t = 0.0;
  long source_class = 0;  // k
  long target_class = 0;  // l
  long amount = 0;        // d
  long source_cluster = -1;
  long target_cluster = -1;
};

//------------------------------------------------------------------------
// RateTable: size-class aggregated jump rates with incremental updates
//------------------------------------------------------------------------

// prefix-sum tree over a power-of-two capacity; appends grow amortized
class Fenwick {
 public:
  void assign(const std::vector<double>& vals) {
    n_ = vals.size();
    cap_ = 1;
    while (cap_ < std::max<std::size_t>(n_, 1)) cap_ <<= 1;
    tree_.assign(cap_ + 1, 0.0);
    for (std::size_t i = 0; i < n_; ++i) add(i, vals[i]);
  }

  // append one value; `all` is consulted only when capacity doubles
  void push_back(double val, const std::vector<double>& all) {
    if (n_ == cap_) {
      assign(all);
      return;
    }
    ++n_;
    add(n_ - 1, val);
  }

  void add(std::size_t i, double delta) {
    for (std::size_t j = i + 1; j <= cap_; j += j & (~j + 1)) tree_[j] += delta;
  }

  double total() const { return cap_ ? tree_[cap_] : 0.0; }

  // smallest index with prefix sum >= u (u <= total)
  std::size_t lower_bound(double u) const {
    std::size_t pos = 0;
    for (std::size_t mask = cap_; mask > 0; mask >>= 1) {
      const std::size_t next = pos + mask;
      if (next <= cap_ && tree_[next] < u) {
        pos = next;
        u -= tree_[next];
      }
    }
    return pos;  // 0-based index
  }

  std::size_t size() const { return n_; }

 private:
  std::size_t n_ = 0;
  std::size_t cap_ = 0;
  std::vector<double> tree_;
};

class RateTable {
 public:
  // PairScan/PairTree: flat array over occupied class pairs (k,l), sampled
  // by linear scan or prefix-sum tree. TwoStage: for separable kernels,
  // the pair law factorizes and (k,l) is drawn from two per-class trees
  // with an exact diagonal rejection; this is what makes million-event
  // runs cheap. Auto picks TwoStage when the kernel is separable.
  enum class Mode { Auto, PairScan, PairTree, TwoStage };

  static constexpr std::size_t kScanLimit = 4096;
  static constexpr std::uint64_t kRefreshInterval = 1u << 16;

  RateTable(Configuration& config, const Kernel& kernel,
            std::shared_ptr<RateCache> cache = nullptr,
            Mode mode = Mode::Auto)
      : config_(config),
        kernel_(kernel),
        cache_(cache ? std::move(cache)
                     : std::make_shared<RateCache>(kernel, config.eps)),
        mode_(mode) {
    if (config.sizes.size() < 2)
      throw std::invalid_argument("RateTable: needs L >= 2 clusters");
    if (cache_->eps() != config.eps)
      throw std::invalid_argument("RateTable: cache grid mismatch");
    if (mode_ == Mode::TwoStage && !kernel.separable())
      throw std::invalid_argument("RateTable: two-stage mode needs a separable kernel");
    // the amount sum is truncated at d = k, which is only exact for kernels
    // vanishing beyond z > x; reject violations up front
    for (double x : {0.0, 0.3, 2.0, 17.0})
      for (double y : {0.0, 1.0, 9.0})
        for (double z : {x + config.eps, 2.0 * x + 1.0, 10.0 * x + 5.0})
          if (kernel.eval(x, y, z) != 0.0)
            throw std::invalid_argument(
                "RateTable: kernel must vanish for z > x");
    two_stage_ = mode_ == Mode::TwoStage ||
                 (mode_ == Mode::Auto && kernel.separable());
    rebuild();
  }

  double total_rate() const {
    if (two_stage_) {
      const double raw = src_fen_.total() * tgt_fen_.total() - diag_;
      return std::max(raw, 0.0) / (config_.cluster_count() - 1.0);
    }
    return tree_mode_ ? fenwick_.total() : total_;
  }

  long occupancy(long k) const {
    return k >= 0 && k < static_cast<long>(occ_.size()) ? occ_[static_cast<std::size_t>(k)] : 0;
  }

  std::uint64_t events() const { return events_; }
  bool tree_mode() const { return tree_mode_; }
  bool two_stage() const { return two_stage_; }

  // one exact SSA step; advances the clock, mutates the configuration and
  // the table. Throws if the state is absorbing.
  JumpEvent step(Rng& rng) {
    const double total = total_rate();
    if (!(total > 0.0))
      throw std::runtime_error("RateTable::step: absorbing state (total rate 0)");
    return step_at(clock_ + rng.exponential(total), rng);
  }

  // jump selection and application at an externally drawn event time
  JumpEvent step_at(double t_event, Rng& rng) {
    const double total = total_rate();
    if (!(total > 0.0))
      throw std::runtime_error("RateTable::step: absorbing state (total rate 0)");

    JumpEvent ev;
    ev.t = t_event;

    // class pair ~ S(k,l) (n_k n_l - 1{k=l} n_k)
    long k, l;
    if (two_stage_) {
      pick_two_stage(rng, k, l);
    } else {
      const std::size_t slot = pick_slot(rng.uniform() * total);
      k = entries_[slot].k;
      l = entries_[slot].l;
    }

    // amount ~ K(k eps, l eps, d eps), from the cached prefix sums
    const auto& cdf = cache_->amount_cdf(k, l);
    const double back = cdf.back();
    const long d = static_cast<long>(
        std::lower_bound(cdf.begin(), cdf.end(), rng.uniform() * back) -
        cdf.begin()) + 1;

    // concrete clusters, uniform among those of the chosen sizes
    const auto& src_members = members_[static_cast<std::size_t>(k)];
    const long src = src_members[rng.uniform_int(src_members.size())];
    long tgt;
    if (k == l) {
      const auto& m = members_[static_cast<std::size_t>(l)];
      auto idx = rng.uniform_int(m.size() - 1);
      if (m[idx] == src) idx = m.size() - 1;
      tgt = m[idx];
    } else {
      const auto& m = members_[static_cast<std::size_t>(l)];
      tgt = m[rng.uniform_int(m.size())];
    }

    ev.source_class = k;
    ev.target_class = l;
    ev.amount = std::min(d, k);
    ev.source_cluster = src;
    ev.target_cluster = tgt;
    apply(ev);
    clock_ = ev.t;
    return ev;
  }

  // applies a jump: masses move, occupancies and rates are updated in
  // place (only classes {k, k-d, l, l+d} change occupancy)
  void apply(const JumpEvent& ev) {
    config_.sizes[static_cast<std::size_t>(ev.source_cluster)] -= ev.amount;
    config_.sizes[static_cast<std::size_t>(ev.target_cluster)] += ev.amount;

    const long from_a = ev.source_class, to_a = ev.source_class - ev.amount;
    const long from_b = ev.target_class, to_b = ev.target_class + ev.amount;
    move_cluster(ev.source_cluster, from_a, to_a);
    move_cluster(ev.target_cluster, from_b, to_b);

    if (two_stage_) {
      class_weight_delta(from_a, -1);
      class_weight_delta(to_a, +1);
      class_weight_delta(from_b, -1);
      class_weight_delta(to_b, +1);
    } else {
      refresh_classes({from_a, to_a, from_b, to_b});
    }

    if (++events_ % kRefreshInterval == 0) rebuild();
  }

  // full reconstruction from the configuration; also the periodic
  // floating-point refresh
  void rebuild() {
    // class values are bounded by the conserved total mass
    const auto cap = static_cast<std::size_t>(config_.n_total) + 1;
    occ_.assign(cap, 0);
    members_.assign(cap, {});
    stamp_.clear();
    for (long i = 0; i < config_.cluster_count(); ++i) {
      const auto s = static_cast<std::size_t>(config_.sizes[static_cast<std::size_t>(i)]);
      occ_[s] += 1;
      members_[s].push_back(i);
    }
    occupied_.clear();
    for (std::size_t s = 0; s < cap; ++s)
      if (occ_[s] > 0) occupied_.push_back(static_cast<long>(s));

    if (two_stage_) {
      std::vector<double> w_src(cap, 0.0), w_tgt(cap, 0.0);
      diag_ = 0.0;
      for (long s : occupied_) {
        const auto idx = static_cast<std::size_t>(s);
        const double alpha = cache_->target_value(s);
        w_tgt[idx] = alpha * occ_[idx];
        if (s >= 1) {
          const double b = cache_->source_sum(s);
          w_src[idx] = b * occ_[idx];
          diag_ += b * alpha * occ_[idx];
        }
      }
      src_fen_.assign(w_src);
      tgt_fen_.assign(w_tgt);
      return;
    }

    entries_.clear();
    rates_.clear();
    slot_of_.clear();
    for (long k : occupied_) {
      if (k == 0) continue;
      for (long l : occupied_) new_slot(k, l, true);
    }
    tree_mode_ = mode_ == Mode::PairTree ||
                 (mode_ != Mode::PairScan && entries_.size() > kScanLimit);
    if (tree_mode_) fenwick_.assign(rates_);
    total_ = 0.0;
    for (double r : rates_) total_ += r;
  }

 private:
  struct Pair {
    long k, l;
  };

  static std::uint64_t pair_key(long k, long l) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k)) << 32) |
           static_cast<std::uint32_t>(l);
  }

  double pair_rate(long k, long l) const {
    const auto nk = static_cast<double>(occ_[static_cast<std::size_t>(k)]);
    const auto nl = static_cast<double>(occ_[static_cast<std::size_t>(l)]);
    const double pairs = nk * nl - (k == l ? nk : 0.0);
    if (pairs <= 0.0) return 0.0;
    return cache_->pair_sum(k, l) * pairs /
           (config_.cluster_count() - 1.0);
  }

  void new_slot(long k, long l, bool building = false) {
    const auto key = pair_key(k, l);
    if (slot_of_.find(key) != slot_of_.end()) return;
    slot_of_.emplace(key, entries_.size());
    entries_.push_back({k, l});
    rates_.push_back(pair_rate(k, l));
    if (!building) {
      if (tree_mode_) {
        fenwick_.push_back(rates_.back(), rates_);
      } else {
        total_ += rates_.back();
        if (mode_ != Mode::PairScan && entries_.size() > kScanLimit) {
          tree_mode_ = true;
          fenwick_.assign(rates_);
        }
      }
    }
  }

  // two-stage bookkeeping: one cluster entered (+1) or left (-1) class a
  void class_weight_delta(long a, int delta) {
    const double alpha = cache_->target_value(a);
    tgt_fen_.add(static_cast<std::size_t>(a), delta * alpha);
    if (a >= 1) {
      const double b = cache_->source_sum(a);
      src_fen_.add(static_cast<std::size_t>(a), delta * b);
      diag_ += delta * b * alpha;
    }
  }

  // joint law S(k,l)(n_k n_l - 1{k=l} n_k) via the factorization
  // S(k,l) = B_k alpha_l: propose k ~ B_k n_k, l ~ alpha_l n_l, accept
  // diagonal picks with probability (n_k - 1)/n_k
  void pick_two_stage(Rng& rng, long& k, long& l) const {
    for (int attempt = 0; attempt < (1 << 20); ++attempt) {
      k = static_cast<long>(src_fen_.lower_bound(rng.uniform() * src_fen_.total()));
      l = static_cast<long>(tgt_fen_.lower_bound(rng.uniform() * tgt_fen_.total()));
      if (k < 1 || k > config_.n_total || l > config_.n_total) continue;  // FP edge
      if (k == l) {
        const auto nk = static_cast<double>(occ_[static_cast<std::size_t>(k)]);
        if (rng.uniform() * nk >= nk - 1.0) continue;
      }
      if (occ_[static_cast<std::size_t>(k)] > 0 &&
          occ_[static_cast<std::size_t>(l)] > 0)
        return;
    }
    throw std::runtime_error("RateTable: two-stage sampling failed to accept");
  }

  void set_rate(std::size_t slot, double value) {
    if (tree_mode_) {
      fenwick_.add(slot, value - rates_[slot]);
    } else {
      total_ += value - rates_[slot];
    }
    rates_[slot] = value;
  }

  void move_cluster(long cluster, long from, long to) {
    if (from == to) return;
    auto& src = members_[static_cast<std::size_t>(from)];
    // swap-remove; member lists are small enough that a linear find is
    // cheaper than maintaining back-pointers
    for (std::size_t i = 0; i < src.size(); ++i)
      if (src[i] == cluster) {
        src[i] = src.back();
        src.pop_back();
        break;
      }
    members_[static_cast<std::size_t>(to)].push_back(cluster);
    occ_[static_cast<std::size_t>(from)] -= 1;
    occ_[static_cast<std::size_t>(to)] += 1;
  }

  // re-derive the rates of every pair involving the given classes; creates
  // slots for newly occupied classes and drops empty ones from the active
  // list
  void refresh_classes(std::initializer_list<long> classes) {
    ++stamp_id_;
    long touched[4];
    int n_touched = 0;
    for (long a : classes) {
      bool seen = false;
      for (int i = 0; i < n_touched; ++i) seen = seen || touched[i] == a;
      if (!seen) touched[n_touched++] = a;
    }

    // membership changes of the occupied list
    for (int i = 0; i < n_touched; ++i) {
      const long a = touched[i];
      const bool now = occ_[static_cast<std::size_t>(a)] > 0;
      const auto it = std::find(occupied_.begin(), occupied_.end(), a);
      const bool was = it != occupied_.end();
      if (now && !was) {
        occupied_.push_back(a);
        for (long b : occupied_) {
          if (a != 0) new_slot(a, b);
          if (b != 0) new_slot(b, a);
        }
      } else if (!now && was) {
        occupied_.erase(it);
      }
    }

    for (int i = 0; i < n_touched; ++i) {
      const long a = touched[i];
      for (long b : occupied_) {
        touch(a, b);
        touch(b, a);
      }
      // pairs against classes that just emptied still need zeroing
      for (int j = 0; j < n_touched; ++j) {
        touch(a, touched[j]);
        touch(touched[j], a);
      }
    }
  }

  void touch(long k, long l) {
    if (k == 0) return;
    const auto it = slot_of_.find(pair_key(k, l));
    if (it == slot_of_.end()) return;
    if (stamp_.size() <= it->second) stamp_.resize(entries_.size(), 0);
    if (stamp_[it->second] == stamp_id_) return;
    stamp_[it->second] = stamp_id_;
    set_rate(it->second, pair_rate(k, l));
  }

  std::size_t pick_slot(double u) const {
    if (tree_mode_) {
      std::size_t slot = fenwick_.lower_bound(u);
      if (slot >= entries_.size()) slot = entries_.size() - 1;
      // guard against landing on a zero-rate slot through rounding
      while (slot > 0 && rates_[slot] <= 0.0) --slot;
      return slot;
    }
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (rates_[i] <= 0.0) continue;
      acc += rates_[i];
      last_positive = i;
      if (acc >= u) return i;
    }
    return last_positive;
  }

  Configuration& config_;
  const Kernel& kernel_;
  std::shared_ptr<RateCache> cache_;
  Mode mode_;

  std::vector<long> occ_;                      // occupancy per size class
  std::vector<std::vector<long>> members_;     // cluster ids per size class
  std::vector<long> occupied_;                 // classes with occupancy > 0
  std::vector<Pair> entries_;                  // flat (k,l) slots
  std::vector<double> rates_;                  // per-slot aggregated rates
  std::unordered_map<std::uint64_t, std::size_t> slot_of_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t stamp_id_ = 0;
  Fenwick fenwick_;
  bool tree_mode_ = false;
  bool two_stage_ = false;
  double total_ = 0.0;

  Fenwick src_fen_;  // B_k n_k over source classes
  Fenwick tgt_fen_;  // alpha_l n_l over target classes
  double diag_ = 0.0;  // sum_k B_k alpha_k n_k

  double clock_ = 0.0;
  std::uint64_t events_ = 0;
};

//------------------------------------------------------------------------
// trajectory sampling
//------------------------------------------------------------------------

struct SimResult {
  Trajectory trajectory;
  std::uint64_t events = 0;
  bool absorbed = false;
};

// Exact-in-law sample path; snapshots are the empirical measures at the
// requested checkpoint times. Once the state is absorbing all later
// checkpoints repeat the frozen measure.
inline SimResult simulate(Configuration& config, const Kernel& kernel,
                          double t_end, const std::vector<double>& checkpoints,
                          Rng& rng,
                          std::shared_ptr<RateCache> cache = nullptr,
                          RateTable::Mode mode = RateTable::Mode::Auto) {
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 0.0 || checkpoints[i] > t_end)
      throw std::invalid_argument("simulate: checkpoints must lie in [0, t_end]");
    if (i > 0 && checkpoints[i] < checkpoints[i - 1])
      throw std::invalid_argument("simulate: checkpoints must be sorted");
  }

  RateTable table(config, kernel, std::move(cache), mode);
  SimResult out;
  double t = 0.0;
  std::size_t ci = 0;

  while (ci < checkpoints.size()) {
    const double total = table.total_rate();
    if (!(total > 0.0)) {
      out.absorbed = true;
      const GridMeasure frozen = empirical_measure(config);
      for (; ci < checkpoints.size(); ++ci) {
        out.trajectory.times.push_back(checkpoints[ci]);
        out.trajectory.snapshots.push_back(frozen);
      }
      break;
    }
    const double t_next = t + rng.exponential(total);
    while (ci < checkpoints.size() && checkpoints[ci] < t_next) {
      out.trajectory.times.push_back(checkpoints[ci]);
      out.trajectory.snapshots.push_back(empirical_measure(config));
      ++ci;
    }
    if (ci >= checkpoints.size() || t_next > t_end) {
      // only checkpoints at exactly t_end can remain
      while (ci < checkpoints.size()) {
        out.trajectory.times.push_back(checkpoints[ci]);
        out.trajectory.snapshots.push_back(empirical_measure(config));
        ++ci;
      }
      break;
    }
    table.step_at(t_next, rng);
    ++out.events;
    t = t_next;
  }
  return out;
}

}  // namespace cgedg

#endif  // CGEDG_PARTICLE_SIM_HPP
