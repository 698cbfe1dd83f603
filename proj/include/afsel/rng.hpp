#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

namespace afsel {

// Identifies one deterministic random stream.  Keys are derived by hashing a
// parent key with integer or string tags, so every (function, instance, seed,
// schedule, phase) combination gets its own independent stream and no module
// can perturb another's draws.
struct StreamKey {
  std::uint64_t value = 0;

  friend bool operator==(StreamKey a, StreamKey b) { return a.value == b.value; }
  friend bool operator!=(StreamKey a, StreamKey b) { return a.value != b.value; }
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

constexpr StreamKey derive(StreamKey parent, std::uint64_t tag) {
  return {detail::splitmix64(parent.value ^ detail::splitmix64(tag))};
}

constexpr StreamKey derive(StreamKey parent, std::int64_t tag) {
  return derive(parent, static_cast<std::uint64_t>(tag));
}

constexpr StreamKey derive(StreamKey parent, int tag) {
  return derive(parent, static_cast<std::uint64_t>(static_cast<std::int64_t>(tag)));
}

constexpr StreamKey derive(StreamKey parent, std::string_view tag) {
  return derive(parent, detail::fnv1a(tag));
}

template <typename T1, typename T2, typename... Rest>
constexpr StreamKey derive(StreamKey parent, T1 first, T2 second, Rest... rest) {
  return derive(derive(parent, first), second, rest...);
}

// Deterministic generator over a fully specified engine.  All distributions
// are sampled by hand from raw 64-bit words so that sequences are identical
// across standard library implementations.
class Rng {
 public:
  explicit Rng(StreamKey key) : engine_(detail::splitmix64(key.value ^ 0x6a09e667f3bcc908ULL)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }

  bool coin() { return (next_u64() >> 33) & 1u; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  // Standard Cauchy as a ratio of two independent normals.
  double cauchy() {
    double num = normal();
    double den = normal();
    while (std::abs(den) < 1e-300) den = normal();
    return num / den;
  }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

  std::vector<int> permutation(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    shuffle(p);
    return p;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace afsel
