#pragma once

// Deterministic random number streams.
//
// Simulation draws must reproduce bit-for-bit for a given seed, so uniforms
// are mapped from raw mt19937_64 output with a fixed 53-bit recipe instead of
// std::uniform_real_distribution (whose draw sequence is implementation
// defined). Categorical draws walk the inverse CDF in ascending index order.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "peernet/common.hpp"

namespace peernet {

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0);
  }

  // Exponential waiting time with the given rate.
  double exponential(double rate) {
    require(rate > 0.0, "exponential: rate must be positive");
    return -std::log1p(-uniform()) / rate;
  }

  // Index drawn from unnormalized weights by inverse CDF over ascending index.
  int categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
      require(w >= 0.0, "categorical: negative weight");
      total += w;
    }
    require(total > 0.0, "categorical: all weights zero");
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

 private:
  std::mt19937_64 gen_;
};

// Counter-based uniform: a pure function of (seed, replication, day, agent).
// Scenario code never perturbs the stream, so coupled runs share draws exactly.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline double counter_uniform(std::uint64_t seed, std::uint64_t replication,
                              std::uint64_t day, std::uint64_t agent) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ replication);
  h = splitmix64(h ^ day);
  h = splitmix64(h ^ agent);
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace peernet
