// The stabilizing perturbation N(x) = sum_k Ntilde_k(||x||) x with
// Ntilde_k(t) = -c_k(t) L_k, and the map T = W_eps + N.
//
// For a fixed t = ||x||, W_eps + Ntilde(t) is itself a weighted shift with
// effective weights beta_n(t) = alpha_n (1 - c_{k(n)+1}(t)), so T is one shift
// application with weights chosen by the norm of its argument.
//
// All threshold tests compare log t against -2^j ln M, which is exact, and use
// the half-open intervals of the envelope definition literally.

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "kakutani/shift.hpp"
#include "kakutani/sparse_vec.hpp"
#include "kakutani/weights.hpp"

namespace kakutani {

struct CutoffValue {
  double value = 0.0;
  double derivative = 0.0;  // d/dt
};

/// Cubic Hermite smoothstep 3s^2 - 2s^3, s = (t-a)/(b-a). Throws on a >= b.
/// Outside [a, b] the value is clamped and the derivative is zero.
CutoffValue phi1(double a, double b, double t);
inline CutoffValue phi2(double a, double b, double t) {
  const auto v = phi1(a, b, t);
  return {1.0 - v.value, -v.derivative};
}

/// c_k(t) together with 1 - c_k(t) (computed without cancellation) and the
/// logarithmic slope t * dc_k/dt, which stays O(1) at every depth.
struct Envelope {
  double value = 0.0;
  double complement = 1.0;
  double log_slope = 0.0;

  bool active() const { return value != 0.0; }
  bool plateau() const { return value == 1.0 && log_slope == 0.0; }
};

/// Envelope of level k >= 1 at t = exp(log_t):
///   0            for t <  M^-2^(k+3)
///   phi1 ramp    on [M^-2^(k+3), M^-2^(k+2))
///   1            on [M^-2^(k+2), M^-2^k)
///   phi2 ramp    on [M^-2^k,     M^-2^(k-1))
///   0            for t >= M^-2^(k-1)
/// Ramps are evaluated in a frame shifted by the right endpoint so that t never
/// has to be represented on the linear scale.
Envelope envelope(int k, double log_t, const Params& p);

/// The consecutive levels k with 2^(k-1) < u <= 2^(k+3), u = -log t / ln M,
/// i.e. the candidates whose envelope can be nonzero at t. At most four; one of
/// them can sit exactly on a left ramp boundary with value zero.
struct ActiveBand {
  int first_k = 1;
  std::vector<Envelope> envelopes;

  bool empty() const { return envelopes.empty(); }
  std::vector<int> k_list() const;
  /// Envelope of level k; the zero envelope for levels outside the band.
  Envelope at(int k) const;
  std::size_t nonzero_count() const;
  /// Smallest and largest k with a nonzero envelope.
  std::optional<std::pair<int, int>> nonzero_range() const;
};

ActiveBand active_set(double log_t, const Params& p);

/// Band k: ||x|| in [M^-2^(k+1), M^-2^k), k >= 0. Empty above M^-1.
std::optional<int> band_index(double log_t, const Params& p);

/// beta_n(t) = alpha_n (1 - c_{k(n)+1}(t)); exact zero on a plateau hit.
LogScalar effective_weight(Index n, double log_t, const Params& p);
/// The shift W_eps + Ntilde(t) as a ShiftSpec.
ShiftSpec effective_shift(double log_t, const Params& p);

class StabilizedMap {
 public:
  explicit StabilizedMap(const Params& p = Params{}) : params_(p) {}

  const Params& params() const { return params_; }

  SparseVec linear(const SparseVec& x) const;
  /// N(x), built directly from the envelope terms.
  SparseVec nonlinear(const SparseVec& x) const;
  /// T(x) = W_eps x + N(x) as one effective-shift application.
  SparseVec operator()(const SparseVec& x) const;
  /// Effective-shift application reusing a precomputed active band.
  SparseVec apply_with(const ActiveBand& band, const SparseVec& x) const;
  /// Ntilde(t) y for the band of t. N(x) = Ntilde(||x||) x, so for a unit u the
  /// ratio ||N(R u)|| / R is ||Ntilde(R) u||, free of the cancellation in
  /// log||N(x)|| - log||x|| at deep bands.
  SparseVec nonlinear_with(const ActiveBand& band, const SparseVec& y) const;

  /// DT(x) y. At x = 0 this is W_eps y.
  SparseVec derivative(const SparseVec& x, const SparseVec& y) const;
  /// DN(x) y = -sum_k [ c_k'(t) <x/t, y> L_k x + c_k(t) L_k y ]. Zero at x = 0.
  SparseVec nonlinear_derivative(const SparseVec& x, const SparseVec& y) const;

 private:
  Params params_;
};

}  // namespace kakutani
