// Signed log-domain scalars.
//
// A LogScalar stores sign(x) and ln|x| so that magnitudes such as 5^(-2^40)
// stay representable. Exact zero is a distinguished sign state; its log_mag
// is ignored by every operation.

#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace kakutani {

struct LogScalar {
  int sign = 0;         // -1, 0 or +1
  double log_mag = 0.0;  // ln|x|, meaningful only when sign != 0

  static constexpr LogScalar zero() { return {}; }
  static constexpr LogScalar one() { return {1, 0.0}; }
  static constexpr LogScalar positive(double log_mag) { return {1, log_mag}; }
  static LogScalar from_log(int sign, double log_mag);
  static LogScalar from_real(double value);

  bool is_zero() const { return sign == 0; }
  double to_real() const;

  LogScalar operator-() const { return {-sign, log_mag}; }
  LogScalar abs() const { return {sign == 0 ? 0 : 1, log_mag}; }
};

/// Bitwise equality of the represented value (zeros compare equal regardless
/// of their ignored log_mag).
bool identical(LogScalar a, LogScalar b);

LogScalar mul(LogScalar a, LogScalar b);
LogScalar div(LogScalar a, LogScalar b);  // throws std::domain_error on b == 0
LogScalar add(LogScalar a, LogScalar b);
inline LogScalar sub(LogScalar a, LogScalar b) { return add(a, -b); }

/// Raise |a| to a real power; zero stays zero for positive exponents.
LogScalar pow_abs(LogScalar a, double exponent);

/// Signed ordering: returns <0, 0, >0 like strcmp.
int compare(LogScalar a, LogScalar b);
/// Ordering of |a| and |b|; zero is below everything else.
int compare_magnitude(LogScalar a, LogScalar b);

/// Euclidean length of the vector of terms: (+, 1/2 * ln sum exp(2 m_i)).
/// The largest magnitude is factored out and the rest are accumulated in
/// descending order. Empty input or all-zero input gives exact zero.
LogScalar log_sum_exp_sq(std::span<const LogScalar> terms);

/// Number of opposite-sign additions whose operands differed by at most one
/// ulp without being bit-equal (catastrophic cancellation). Process-wide.
std::uint64_t cancellation_events();
void reset_cancellation_events();

std::string to_string(LogScalar a);

}  // namespace kakutani
