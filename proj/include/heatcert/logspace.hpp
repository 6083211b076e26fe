#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace heatcert {

/// A real number carried as (sign, natural-log magnitude) so that constants
/// like 2^{41 N^3} stay representable.
struct SignedLog {
  int sign = 0;
  double log_mag = -std::numeric_limits<double>::infinity();

  static SignedLog zero() { return {}; }
  static SignedLog from_log(double lg) { return {1, lg}; }
  static SignedLog from_value(double v) {
    if (v == 0.0) return {};
    return {v > 0.0 ? 1 : -1, std::log(std::abs(v))};
  }
  double value() const {
    if (sign == 0) return 0.0;
    return sign * std::exp(log_mag);
  }
  SignedLog operator*(const SignedLog& o) const {
    if (sign == 0 || o.sign == 0) return {};
    return {sign * o.sign, log_mag + o.log_mag};
  }
  SignedLog pow(double e) const {
    if (sign == 0) return {};
    if (sign < 0)
      throw std::domain_error("pow of a negative SignedLog");
    return {1, log_mag * e};
  }
};

constexpr double kLn2 = 0.6931471805599453;

/// floor(x) with a 1e-12 nudge against rounding noise; flags arguments that
/// sit within 1e-9 of an integer, where the floor is numerically ambiguous.
struct FloorResult {
  long long k = 0;
  bool near_integer = false;
  bool infinite = false;  // argument ratio was infinite (zero denominator)
};

FloorResult nudged_floor(double x);

/// floor( 0.5 * log2(num/den) ), the recurring exponent-count pattern.
FloorResult floor_half_log2(double num, double den);

}  // namespace heatcert
