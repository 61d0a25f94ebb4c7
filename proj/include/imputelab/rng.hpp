#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace imputelab {

/// splitmix64 finaliser; used to combine seed material into stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_str(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t seed_stream(std::uint64_t global_seed, const std::string& a) {
  return mix64(global_seed ^ mix64(hash_str(a)));
}

inline std::uint64_t seed_stream(std::uint64_t global_seed, const std::string& a,
                                 const std::string& b) {
  return mix64(mix64(global_seed ^ mix64(hash_str(a))) ^ mix64(hash_str(b)));
}

/// Deterministic generator: mt19937_64 core with hand-rolled draws so results
/// do not depend on the standard library's distribution implementations.
class rng {
public:
  explicit rng(std::uint64_t seed) : core_(seed) {}

  std::uint64_t next_u64() { return core_(); }

  /// uniform in [0, 1) with 53 random bits
  double uniform01() { return static_cast<double>(core_() >> 11) * 0x1.0p-53; }

  /// uniform integer in [0, n), rejection sampled; n must be > 0
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = core_();
    while (x >= limit) x = core_();
    return x % n;
  }

  /// standard normal via Box-Muller (pairs cached)
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// first k slots of a Fisher-Yates shuffle of 0..n-1
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform_below(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }

private:
  std::mt19937_64 core_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace imputelab
