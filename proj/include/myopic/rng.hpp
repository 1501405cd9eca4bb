#ifndef MYOPIC_RNG_HPP
#define MYOPIC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace myopic {

/// SplitMix64 finalizer; used only to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of stream `stream` under master seed `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Mersenne Twister stream with explicit, library-independent conversions
/// so draws are identical across standard library implementations.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t seed, std::uint64_t stream) : engine_(derive_seed(seed, stream)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Unit-mean exponential, e.g. |h|^2 for a CN(0,1) coefficient.
  double exponential() { return -std::log1p(-uniform()); }

  bool bernoulli(double p) { return uniform() < p; }

private:
  std::mt19937_64 engine_;
};

}  // namespace myopic

#endif  // MYOPIC_RNG_HPP
