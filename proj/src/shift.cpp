#include "kakutani/shift.hpp"

#include <cmath>
#include <limits>

namespace kakutani {

SparseVec apply(const ShiftSpec& op, const SparseVec& x) {
  SparseVecBuilder b;
  b.reserve(x.support_size());
  for (const auto& e : x.entries()) b.push(e.index + 1, mul(op.weight(e.index), e.value));
  return std::move(b).build();
}

LogScalar op_norm_power(const ShiftSpec& op, std::uint64_t k, std::uint64_t horizon) {
  if (k == 0) throw std::invalid_argument("op_norm_power: k must be >= 1");
  if (horizon < k) throw std::invalid_argument("op_norm_power: horizon must be >= k");

  // Window [n, n+k-1]: running sum of log weights over its nonzero entries
  // and a count of the exact zeros inside it.
  double log_sum = 0.0;
  std::uint64_t zeros = 0;
  auto take = [&](Index i, int dir) {
    const LogScalar w = op.weight(i);
    if (w.is_zero())
      zeros += dir > 0 ? 1 : -1;
    else
      log_sum += dir * w.log_mag;
  };
  for (Index i = 1; i <= k; ++i) take(i, +1);

  bool found = false;
  double best = -std::numeric_limits<double>::infinity();
  for (Index n = 1;; ++n) {
    if (zeros == 0) {
      found = true;
      best = std::max(best, log_sum);
    }
    if (n == horizon) break;
    take(n, -1);
    take(n + k, +1);
  }
  return found ? LogScalar::positive(best) : LogScalar::zero();
}

LogScalar wn_norm_closed(int p, const Params& params) {
  if (p < 1) throw std::invalid_argument("wn_norm_closed: p must be >= 1");
  double sum = 0.0;
  for (int q = 1; q <= p; ++q)
    sum += std::ldexp(1.0, p - q) * epsilon(static_cast<std::uint64_t>(q), params).log_mag;
  return LogScalar::positive(sum);
}

double log_rho_estimate(int p, const Params& params) {
  if (p < 1) throw std::invalid_argument("rho_estimate: p must be >= 1");
  double series = 0.0;
  for (int q = 1; q <= p; ++q)
    series += std::ldexp(epsilon(static_cast<std::uint64_t>(q), params).log_mag, -q);
  const double two_p = std::ldexp(1.0, p);
  return two_p / (two_p - 1.0) * series;
}

double rho_estimate(int p, const Params& params) { return std::exp(log_rho_estimate(p, params)); }

OmegaCertificationError::OmegaCertificationError(std::size_t op_index, const std::string& label)
    : std::runtime_error("operator " + std::to_string(op_index) + " (" + label +
                         ") is not in the nilpotent class"),
      op_index_(op_index) {}

NilpotencyResult verify_nilpotent_set(const std::vector<ShiftSpec>& ops, int k, Index first,
                                      Index last) {
  if (k < 1 || k > 62) throw std::invalid_argument("verify_nilpotent_set: k out of range");
  if (first == 0 || last < first)
    throw std::invalid_argument("verify_nilpotent_set: bad basis range");

  const Index window_end = last + (Index{1} << k);
  for (std::size_t j = 0; j < ops.size(); ++j) {
    const auto weights = sample_weights(ops[j].weight, 1, window_end);
    if (!in_omega_k(weights, 1, k)) throw OmegaCertificationError(j, ops[j].label);
  }

  for (Index i = first; i <= last; ++i) {
    SparseVec v = SparseVec::basis(i, LogScalar::one());
    for (auto it = ops.rbegin(); it != ops.rend() && !v.is_zero(); ++it) v = apply(*it, v);
    if (!v.is_zero()) return {false, i};
  }
  return {true, std::nullopt};
}

}  // namespace kakutani
