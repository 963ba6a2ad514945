#include "kakutani/weights.hpp"

#include <bit>
#include <cmath>

namespace kakutani {

Params::Params(double M, double K) : m_(M), k_(K) {
  if (!(std::isfinite(M) && std::isfinite(K) && M > K && K > 1.0))
    throw std::invalid_argument("parameters must satisfy M > K > 1");
  log_m_ = std::log(M);
  log_k_ = std::log(K);
}

double Params::threshold(int j) const { return -std::ldexp(log_m_, j); }

int dyadic_valuation(Index n) {
  if (n == 0) throw std::invalid_argument("dyadic_valuation: n must be >= 1");
  return std::countr_zero(n);
}

LogScalar epsilon(std::uint64_t m, const Params& p) {
  if (m == 0) throw std::invalid_argument("epsilon: m must be >= 1");
  return LogScalar::positive(p.log_M() - static_cast<double>(m - 1) * p.log_K());
}

LogScalar alpha(Index n, const Params& p) {
  return epsilon(static_cast<std::uint64_t>(dyadic_valuation(n)) + 1, p);
}

bool lm_hits(std::uint64_t m, Index n) {
  if (m == 0) throw std::invalid_argument("lm_hits: m must be >= 1");
  return static_cast<std::uint64_t>(dyadic_valuation(n)) == m - 1;
}

WeightProfile WeightProfile::complement(const Params& p, std::uint64_t m) {
  if (m == 0) throw std::invalid_argument("WeightProfile: level must be >= 1");
  return {p, Kind::complement, m};
}

WeightProfile WeightProfile::single_level(const Params& p, std::uint64_t m) {
  if (m == 0) throw std::invalid_argument("WeightProfile: level must be >= 1");
  return {p, Kind::single_level, m};
}

LogScalar WeightProfile::operator()(Index n) const {
  switch (kind_) {
    case Kind::full:
      return alpha(n, params_);
    case Kind::complement:
      return lm_hits(level_, n) ? LogScalar::zero() : alpha(n, params_);
    case Kind::single_level:
      return lm_hits(level_, n) ? alpha(n, params_) : LogScalar::zero();
  }
  return LogScalar::zero();
}

std::string WeightProfile::label() const {
  switch (kind_) {
    case Kind::full:
      return "W";
    case Kind::complement:
      return "W-L" + std::to_string(level_);
    case Kind::single_level:
      return "L" + std::to_string(level_);
  }
  return "?";
}

std::vector<LogScalar> sample_weights(const WeightFn& w, Index first, Index last) {
  if (first == 0 || last < first) throw std::invalid_argument("sample_weights: bad window");
  std::vector<LogScalar> out;
  out.reserve(last - first + 1);
  for (Index n = first; n <= last; ++n) out.push_back(w(n));
  return out;
}

bool in_omega_k(std::span<const LogScalar> weights, Index first, int k) {
  if (k < 1) throw std::invalid_argument("in_omega_k: k must be >= 1");
  if (first == 0) throw std::invalid_argument("in_omega_k: positions start at 1");
  const std::uint64_t period = std::uint64_t{1} << k;
  if (weights.size() < period)
    throw InsufficientWindow("window of " + std::to_string(weights.size()) +
                             " weights is shorter than the period 2^" + std::to_string(k));
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const Index n = first + i;
    if (dyadic_valuation(n) == k - 1 && !weights[i].is_zero()) return false;
  }
  return true;
}

}  // namespace kakutani
