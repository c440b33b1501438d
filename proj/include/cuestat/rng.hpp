#pragma once

#include <cstdint>
#include <random>

namespace cuestat {

// SplitMix64 step; used only to turn (root seed, stream id) pairs into
// well-scrambled engine seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic per-stream RNG.  Stream i of a run with root seed s is
// seeded from s XOR scramble(i), so the i-th sample of a run is a pure
// function of (seed, i) no matter how many worker threads are in flight
// or in which order streams are consumed.
class RandomStream {
 public:
  RandomStream(std::uint64_t root_seed, std::uint64_t stream_id)
      : engine_(splitmix64(root_seed ^ splitmix64(stream_id + 0x51ed2701a4aad8e3ULL))) {}

  // Uniform on [0, 1).
  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  // Uniform on [0, hi).
  double uniform(double hi) { return hi * uniform(); }

  // Exp(1) via inversion; uniform() < 1 keeps the log argument positive.
  double exponential() { return -std::log(1.0 - uniform()); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// Stream id layout: per-sample streams use the sample index directly,
// exponential-model draws live above kLimitStreamBase, and auxiliary draws
// (MCMC thinning pilots and similar) above kReservedStreamBase, so the
// three kinds never collide under one root seed.
inline constexpr std::uint64_t kLimitStreamBase = 1ULL << 61;
inline constexpr std::uint64_t kReservedStreamBase = 1ULL << 62;

}  // namespace cuestat
