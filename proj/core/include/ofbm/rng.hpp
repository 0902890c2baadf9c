#pragma once

#include <cmath>
#include <cstdint>

namespace ofbm {

// One step of the splitmix64 sequence (Steele, Lea, Flood 2014).
// Used for seed mixing and for expanding one seed into generator state.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d649d86ce2c571ULL;
  return z ^ (z >> 31);
}

// Deterministic seed derivation: hashes the base seed together with up to
// two stream labels (e.g. sample size and replication index).  Published so
// any replication can be replayed in isolation.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = base;
  std::uint64_t h = splitmix64_next(s);
  s ^= a + 0x9e3779b97f4a7c15ULL;
  h ^= splitmix64_next(s);
  s ^= b + 0xd1b54a32d192ed03ULL;
  h ^= splitmix64_next(s);
  return h;
}

// xoshiro256++ (Blackman, Vigna 2019).  State is expanded from one 64-bit
// seed via splitmix64 as the authors recommend.
class Xoshiro256pp {
public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on (0, 1]: 53-bit mantissa, never returns 0 so log() is safe.
  double uniform01() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform on (-1, 1).
  double uniform_sym() { return 2.0 * uniform01() - 1.0; }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

// Standard normal variates by the Marsaglia polar method on top of one
// xoshiro256++ stream.  Fully deterministic given the seed; a cached spare
// makes consecutive draws cheap.
class NormalSampler {
public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = rng_.uniform_sym();
      v = rng_.uniform_sym();
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    have_spare_ = true;
    return u * factor;
  }

  std::uint64_t raw() { return rng_.next(); }
  double uniform01() { return rng_.uniform01(); }

private:
  Xoshiro256pp rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace ofbm
