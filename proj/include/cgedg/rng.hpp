#ifndef CGEDG_RNG_HPP
#define CGEDG_RNG_HPP

#include <cstdint>
#include <cmath>

namespace cgedg {

// Self-contained counter-seeded generator (xoshiro256** with splitmix64
// seeding). Standard-library distributions are not bit-stable across
// implementations, so all sampling helpers live here; a (seed, stream)
// pair fully determines the sequence.
class Rng {
 public:
  Rng() : Rng(0x853c49e6748fea9bULL, 0) {}

  Rng(uint64_t seed, uint64_t stream) {
    uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    for (auto& si : s_) si = splitmix64(x);
    // avoid the all-zero state (splitmix64 cannot produce four zeros from
    // one seed, but keep the guard cheap and explicit)
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in [0,1)
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  // uniform in (0,1], safe as an argument of log
  double uniform_pos() { return ((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  // uniform integer in [0, n), n >= 1 (Lemire's rejection method)
  uint64_t uniform_int(uint64_t n) {
    __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
    auto lo = static_cast<uint64_t>(m);
    if (lo < n) {
      const uint64_t threshold = (-n) % n;
      while (lo < threshold) {
        m = static_cast<__uint128_t>(next_u64()) * n;
        lo = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

 private:
  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  uint64_t s_[4];
};

// stream for replica r of an ensemble with a master seed
inline Rng replica_rng(uint64_t master_seed, uint64_t replica) {
  return Rng(master_seed, replica);
}

}  // namespace cgedg

#endif  // CGEDG_RNG_HPP
