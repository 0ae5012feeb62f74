#include "twostage/numeric.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace twostage {

std::optional<Rational> recover_rational(double value, std::int64_t max_denominator) {
  if (!std::isfinite(value)) return std::nullopt;
  if (value == std::floor(value) && std::fabs(value) < 0x1.0p53) {
    return Rational(static_cast<std::int64_t>(value));
  }
  // Continued-fraction convergents h/k of value.
  const bool negative = value < 0;
  double rest = std::fabs(value);
  std::int64_t h_prev = 1, h = static_cast<std::int64_t>(std::floor(rest));
  std::int64_t k_prev = 0, k = 1;
  double frac = rest - std::floor(rest);
  for (int iter = 0; iter < 64 && frac > 0; ++iter) {
    rest = 1.0 / frac;
    const double a_real = std::floor(rest);
    if (a_real > static_cast<double>(max_denominator)) break;
    const auto a = static_cast<std::int64_t>(a_real);
    frac = rest - a_real;
    const std::int64_t h_next = a * h + h_prev;
    const std::int64_t k_next = a * k + k_prev;
    if (k_next > max_denominator) break;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
    const double approx = static_cast<double>(h) / static_cast<double>(k);
    if (approx == std::fabs(value)) {
      Rational r(h, k);
      return negative ? Rational(-r) : r;
    }
  }
  return std::nullopt;
}

std::string to_string(const Rational& r) { return r.str(); }

double to_double(const Rational& r) { return r.convert_to<double>(); }

Quantity Quantity::from_double(double v) { return Quantity{v, recover_rational(v)}; }

Quantity Quantity::from_fraction(std::int64_t numerator, std::int64_t denominator) {
  if (denominator == 0) throw std::invalid_argument("fraction with zero denominator");
  Rational r(numerator, denominator);
  return Quantity{to_double(r), r};
}

Quantity Quantity::from_rational(const Rational& r) { return Quantity{to_double(r), r}; }

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below requires n > 0");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return draw % n;
}

}  // namespace twostage
