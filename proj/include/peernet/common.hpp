#pragma once

// Shared basics: configuration indexing, error helpers, small utilities.
//
// A configuration y assigns one alternative in {0,...,Y} to each of A agents.
// Configurations are stored as vectors of ints and addressed by their
// lexicographic index with agent 0 as the most significant digit (base Y+1),
// so the all-default configuration always has index 0.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace peernet {

using Config = std::vector<int>;

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void require_state(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

// Number of joint configurations (Y+1)^A, guarded against overflow.
inline std::int64_t config_count(int n_agents, int menu_max) {
  require(n_agents >= 1, "config_count: need at least one agent");
  require(menu_max >= 1, "config_count: menu must contain a non-default alternative");
  std::int64_t s = 1;
  for (int a = 0; a < n_agents; ++a) {
    s *= static_cast<std::int64_t>(menu_max + 1);
    require(s <= (std::int64_t{1} << 40), "config_count: state space too large to index");
  }
  return s;
}

inline std::int64_t config_index(const Config& y, int menu_max) {
  std::int64_t idx = 0;
  for (int c : y) {
    require(c >= 0 && c <= menu_max, "config_index: entry outside menu");
    idx = idx * (menu_max + 1) + c;
  }
  return idx;
}

inline Config config_from_index(std::int64_t idx, int n_agents, int menu_max) {
  require(idx >= 0 && idx < config_count(n_agents, menu_max),
          "config_from_index: index out of range");
  Config y(n_agents, 0);
  for (int a = n_agents - 1; a >= 0; --a) {
    y[a] = static_cast<int>(idx % (menu_max + 1));
    idx /= (menu_max + 1);
  }
  return y;
}

// Copy of y with agent a switched to alternative v.
inline Config switched(const Config& y, int a, int v) {
  Config z = y;
  z.at(a) = v;
  return z;
}

// Agents at which two configurations differ.
inline std::vector<int> diff_agents(const Config& y, const Config& z) {
  require(y.size() == z.size(), "diff_agents: configuration sizes differ");
  std::vector<int> d;
  for (std::size_t a = 0; a < y.size(); ++a)
    if (y[a] != z[a]) d.push_back(static_cast<int>(a));
  return d;
}

// FNV-1a over raw bytes; used for input/model fingerprints in manifests.
inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

}  // namespace peernet
