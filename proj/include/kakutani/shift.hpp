// Weighted shifts e_n -> w(n) e_{n+1}: application, windowed operator norms of
// powers, nilpotency of products, and the spectral radius of W_eps.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kakutani/sparse_vec.hpp"
#include "kakutani/weights.hpp"

namespace kakutani {

struct ShiftSpec {
  WeightFn weight;
  std::string label;

  static ShiftSpec from_profile(const WeightProfile& profile) {
    return {profile, profile.label()};
  }
};

/// Each entry (n, c) goes to (n+1, w(n) c); products that vanish are pruned.
SparseVec apply(const ShiftSpec& op, const SparseVec& x);

/// sup over starting positions n <= horizon of |w(n) ... w(n+k-1)|, by a
/// sliding log-sum. Windows containing an exact zero weight contribute zero.
/// Throws std::invalid_argument when horizon < k.
LogScalar op_norm_power(const ShiftSpec& op, std::uint64_t k, std::uint64_t horizon);

/// ||W_eps^(2^p - 1)|| = prod_{q=1..p} eps_q^(2^(p-q)), in the log domain.
LogScalar wn_norm_closed(int p, const Params& params);

/// ||W_eps^n||^(1/n) at n = 2^p - 1 via the partial series
/// 2^p/(2^p-1) * sum_{q<=p} ln(eps_q)/2^q. Converges to M/K.
double rho_estimate(int p, const Params& params);
/// The same quantity in log form.
double log_rho_estimate(int p, const Params& params);

struct NilpotencyResult {
  bool annihilates = false;
  /// First basis index whose image survives, when annihilates is false.
  std::optional<Index> survivor;
};

/// Raised when an operator handed to verify_nilpotent_set is not in Omega_k.
class OmegaCertificationError : public std::runtime_error {
 public:
  OmegaCertificationError(std::size_t op_index, const std::string& label);
  std::size_t op_index() const { return op_index_; }

 private:
  std::size_t op_index_;
};

/// Applies the product ops[0] * ops[1] * ... * ops[last] (rightmost first) to
/// every e_i with i in [first, last] and reports whether all images are exact
/// zeros. Each operator is first certified in Omega_k over the window
/// [1, last + 2^k].
NilpotencyResult verify_nilpotent_set(const std::vector<ShiftSpec>& ops, int k, Index first,
                                      Index last);

}  // namespace kakutani
