// Kakutani weight sequence: eps_m = M / K^(m-1), alpha_n = eps_{1+k(n)} where
// k(n) is the 2-adic valuation of n, plus the single-level shifts L_m and the
// nilpotent classes Omega_k.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kakutani/log_scalar.hpp"

namespace kakutani {

using Index = std::uint64_t;

/// The pair (M, K) with M > K > 1 that fixes the whole construction.
class Params {
 public:
  static constexpr double kDefaultM = 5.0;
  static constexpr double kDefaultK = 3.0;

  Params() : Params(kDefaultM, kDefaultK) {}
  /// Throws std::invalid_argument unless M > K > 1 (strict, no tolerance).
  Params(double M, double K);

  double M() const { return m_; }
  double K() const { return k_; }
  double log_M() const { return log_m_; }
  double log_K() const { return log_k_; }

  /// -2^j ln M, the log coordinate of the threshold M^(-2^j). Exact: scaling
  /// by a power of two does not round.
  double threshold(int j) const;

  bool operator==(const Params&) const = default;

 private:
  double m_, k_, log_m_, log_k_;
};

/// k(n): the unique k with n = 2^k * odd. Throws on n == 0.
int dyadic_valuation(Index n);

/// eps_m in the log domain: ln M - (m-1) ln K. Throws on m == 0.
LogScalar epsilon(std::uint64_t m, const Params& p);

/// alpha_n = eps_{1+k(n)}.
LogScalar alpha(Index n, const Params& p);

/// True iff L_m has a nonzero weight at position n (k(n) == m-1).
bool lm_hits(std::uint64_t m, Index n);

class WeightProfile {
 public:
  enum class Kind { full, complement, single_level };

  static WeightProfile full(const Params& p) { return {p, Kind::full, 0}; }
  /// Weights of W_eps - L_m.
  static WeightProfile complement(const Params& p, std::uint64_t m);
  /// Weights of L_m.
  static WeightProfile single_level(const Params& p, std::uint64_t m);

  LogScalar operator()(Index n) const;

  const Params& params() const { return params_; }
  Kind kind() const { return kind_; }
  std::uint64_t level() const { return level_; }
  std::string label() const;

 private:
  WeightProfile(const Params& p, Kind kind, std::uint64_t level)
      : params_(p), kind_(kind), level_(level) {}

  Params params_;
  Kind kind_;
  std::uint64_t level_;
};

using WeightFn = std::function<LogScalar(Index)>;

/// Raised when a weight window cannot certify Omega_k membership.
class InsufficientWindow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Weights w(first), ..., w(last).
std::vector<LogScalar> sample_weights(const WeightFn& w, Index first, Index last);

/// Omega_k membership over a window of weights starting at position `first`:
/// every position n with k(n) == k-1 must carry an exact zero. A window
/// shorter than one period 2^k cannot certify anything and throws
/// InsufficientWindow.
bool in_omega_k(std::span<const LogScalar> weights, Index first, int k);

}  // namespace kakutani
