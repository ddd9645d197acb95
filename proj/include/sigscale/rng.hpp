#ifndef SIGSCALE_RNG_HPP
#define SIGSCALE_RNG_HPP

#include <cstdint>
#include <initializer_list>

namespace sigscale {

// splitmix64, used for seeding and for hashing stream identifiers.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Mixes a sequence of 64-bit words into a single stream seed. Used to derive
// independent per-trial substreams from (seed, n, delta, trial) so that
// results are identical regardless of execution order or thread count.
inline std::uint64_t derive_stream(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t w : words) {
    std::uint64_t s = h ^ w;
    h = splitmix64(s);
  }
  return h;
}

// xoshiro256++ with splitmix64 state expansion. All sampling in the project
// flows through this generator; no std:: distributions are used anywhere so
// output is reproducible bit-for-bit across platforms and library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next_u64() {
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

  // Uniform on the open interval (0, 1); never returns an endpoint, which
  // keeps quantile transforms and copula densities finite.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound) via Lemire's multiply-shift.
  std::uint64_t uniform_int(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  // Derives an independent child generator; `salt` distinguishes siblings.
  Rng fork(std::uint64_t salt) const {
    return Rng(derive_stream({state_[0], state_[1], state_[2], state_[3], salt}));
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace sigscale

#endif  // SIGSCALE_RNG_HPP
