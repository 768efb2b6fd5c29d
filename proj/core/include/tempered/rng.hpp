#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace tempered {

/// Counter-based splittable random generator.
///
/// Each stream is a pure function of its key: draw i equals
/// mix64(key + i * gamma), the splitmix64 output sequence. Sub-streams are
/// derived from (key, tag) without touching the parent's counter, so
/// replications keyed by (master_seed, replication, stage) can run in any
/// order, or in parallel, and still produce identical draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix64(seed + 0x243f6a8885a308d3ull)) {}

  /// Derived stream for an integer tag (replication index, stage id, ...).
  [[nodiscard]] Rng sub(std::uint64_t tag) const {
    return Rng(mix64(key_ ^ mix64(tag + 0x452821e638d01377ull)), RawKey{});
  }

  /// Derived stream for a named stage.
  [[nodiscard]] Rng sub(std::string_view stage) const { return sub(fnv1a(stage)); }

  std::uint64_t next_u64() { return mix64(key_ + ++counter_ * 0x9e3779b97f4a7c15ull); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1), safe as an argument to log or a quantile function.
  double uniform_pos() {
    const double u = uniform();
    return u > 0.0 ? u : 0x1.0p-53;
  }

  /// Standard normal via the inverse-cdf map; one uniform per normal, no
  /// rejection, so consumption is stream-position stable.
  double gauss();

  double gauss(double mean, double sd) { return mean + sd * gauss(); }

  /// Gamma(shape, 1) via Marsaglia-Tsang squeeze, boosted for shape < 1.
  double gamma(double shape);
  double gamma(double shape, double rate) { return gamma(shape) / rate; }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  /// Stable identifier of this stream, usable to seed a child component.
  std::uint64_t stream_key() const { return key_; }

 private:
  struct RawKey {};
  Rng(std::uint64_t key, RawKey) : key_(key) {}

  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return h;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace tempered
