#pragma once
#include <cmath>
#include <cstdint>
#include <random>

namespace rsim {

// splitmix64 finalizer; used to derive independent stream seeds from one
// master seed so that one stream's draw count never shifts another stream.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic random stream. mt19937_64 output is fully specified by the
// standard, and all variates are derived by inverse transform from raw
// 53-bit uniforms, so sequences reproduce across platforms and standard
// library implementations.
class RandomStream {
 public:
  RandomStream() : eng_(0) {}
  RandomStream(std::uint64_t master_seed, std::uint64_t tag)
      : eng_(mix64(master_seed ^ mix64(tag))) {}

  // uniform in [0, 1)
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // exponential with the given rate (mean 1/rate); rate must be > 0
  double exponential(double rate) {
    return -std::log(1.0 - uniform01()) / rate;
  }

  // uniform integer in [0, n)
  int uniform_int(int n) { return static_cast<int>(uniform01() * n); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace rsim
