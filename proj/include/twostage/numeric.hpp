#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>

#include <boost/multiprecision/gmp.hpp>

namespace twostage {

using Rational = boost::multiprecision::mpq_rational;

/// Scaling constant of the edge-weighted algorithm, 2*sqrt(2) - 2.
inline const double kEdgeScale = 2.0 * std::numbers::sqrt2 - 2.0;

/// Tight vertex-uniform rounding factor.
inline constexpr double kVertexScale = 7.0 / 8.0;

/// Returns p/q with q <= max_denominator whose nearest double is exactly
/// `value`, or nullopt when no such fraction exists. Used to decide whether
/// instance data can be handled by the exact LP backend.
std::optional<Rational> recover_rational(double value,
                                         std::int64_t max_denominator = 1'000'000);

std::string to_string(const Rational& r);
double to_double(const Rational& r);

/// A numeric datum that always carries a double and, when the datum is a
/// short rational, its exact value too.
struct Quantity {
  double value = 0.0;
  std::optional<Rational> exact;

  static Quantity from_double(double v);
  static Quantity from_fraction(std::int64_t numerator, std::int64_t denominator);
  static Quantity from_rational(const Rational& r);

  bool is_exact() const { return exact.has_value(); }

  friend bool operator==(const Quantity& a, const Quantity& b) {
    return a.value == b.value && a.exact == b.exact;
  }
};

/// splitmix64 finaliser over (master, stream); gives every Monte Carlo trial
/// an independent, reproducible seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Seedable, splittable generator used throughout the library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng derive(std::uint64_t master, std::uint64_t stream) {
    return Rng(derive_seed(master, stream));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Fresh generator for a sub-task; advances this generator once.
  Rng split() { return Rng(derive_seed(next(), 0x5eed)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace twostage
