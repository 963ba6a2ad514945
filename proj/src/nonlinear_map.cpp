#include "kakutani/nonlinear_map.hpp"

#include <algorithm>
#include <cmath>

namespace kakutani {

namespace {

// Smoothstep ramp on [a, b] = [e^lo, e^hi] evaluated at t = e^lam, lo <= lam < hi.
// With r = a/b and e = t/b: s = (e - r)/(1 - r), 1 - s = (1 - e)/(1 - r) and
// t ds/dt = e/(1 - r). Nothing here underflows however deep the band is.
struct RampFrame {
  double rise;   // phi1(s) = s^2 (3 - 2s)
  double fall;   // phi2(s) = (1 - s)^2 (1 + 2s)
  double slope;  // t d(phi1)/dt = 6 s (1 - s) t/(b - a)
};

RampFrame ramp(double lo, double hi, double lam) {
  const double one_minus_r = -std::expm1(lo - hi);
  const double e = std::exp(lam - hi);
  const double r = std::exp(lo - hi);
  double s = (e - r) / one_minus_r;
  double oms = -std::expm1(lam - hi) / one_minus_r;
  s = std::clamp(s, 0.0, 1.0);
  oms = std::clamp(oms, 0.0, 1.0);
  return {s * s * (3.0 - 2.0 * s), oms * oms * (1.0 + 2.0 * s),
          6.0 * s * oms * (e / one_minus_r)};
}

LogScalar real_factor(double v) {
  return v == 0.0 ? LogScalar::zero() : LogScalar::from_real(v);
}

// sum over entries (n, c) of x of factor(level(n)) * alpha_n * c e_{n+1}
template <typename Factor>
SparseVec level_scaled_shift(const SparseVec& x, const Params& p, Factor&& factor) {
  SparseVecBuilder b;
  b.reserve(x.support_size());
  for (const auto& e : x.entries()) {
    const int level = dyadic_valuation(e.index) + 1;
    const LogScalar f = factor(level);
    if (f.is_zero()) continue;
    b.push(e.index + 1, mul(f, mul(alpha(e.index, p), e.value)));
  }
  return std::move(b).build();
}

}  // namespace

CutoffValue phi1(double a, double b, double t) {
  if (!(a < b)) throw std::invalid_argument("phi1: requires a < b");
  if (t <= a) return {0.0, 0.0};
  if (t >= b) return {1.0, 0.0};
  const double s = (t - a) / (b - a);
  return {s * s * (3.0 - 2.0 * s), 6.0 * s * (1.0 - s) / (b - a)};
}

Envelope envelope(int k, double log_t, const Params& p) {
  if (k < 1) throw std::invalid_argument("envelope: k must be >= 1");
  const double t_k3 = p.threshold(k + 3);
  const double t_k2 = p.threshold(k + 2);
  const double t_k = p.threshold(k);
  const double t_k1 = p.threshold(k - 1);

  if (log_t < t_k3) return {0.0, 1.0, 0.0};
  if (log_t < t_k2) {
    const auto r = ramp(t_k3, t_k2, log_t);
    return {r.rise, r.fall, r.slope};
  }
  if (log_t < t_k) return {1.0, 0.0, 0.0};
  if (log_t < t_k1) {
    const auto r = ramp(t_k, t_k1, log_t);
    return {r.fall, r.rise, -r.slope};
  }
  return {0.0, 1.0, 0.0};
}

std::vector<int> ActiveBand::k_list() const {
  std::vector<int> ks(envelopes.size());
  for (std::size_t i = 0; i < ks.size(); ++i) ks[i] = first_k + static_cast<int>(i);
  return ks;
}

Envelope ActiveBand::at(int k) const {
  if (k < first_k || k >= first_k + static_cast<int>(envelopes.size())) return {};
  return envelopes[static_cast<std::size_t>(k - first_k)];
}

std::size_t ActiveBand::nonzero_count() const {
  return static_cast<std::size_t>(
      std::count_if(envelopes.begin(), envelopes.end(), [](const Envelope& e) { return e.active(); }));
}

std::optional<std::pair<int, int>> ActiveBand::nonzero_range() const {
  std::optional<std::pair<int, int>> range;
  for (std::size_t i = 0; i < envelopes.size(); ++i) {
    if (!envelopes[i].active()) continue;
    const int k = first_k + static_cast<int>(i);
    if (!range)
      range = {k, k};
    else
      range->second = k;
  }
  return range;
}

ActiveBand active_set(double log_t, const Params& p) {
  ActiveBand band;
  if (!(log_t < p.threshold(0))) return band;  // u <= 1: nothing below M^-1 applies

  const double u = -log_t / p.log_M();
  const int guess = static_cast<int>(std::ceil(std::log2(u)));
  for (int k = std::max(1, guess - 5); k <= guess + 2; ++k) {
    const bool below_top = log_t < p.threshold(k - 1);      // u > 2^(k-1)
    const bool above_floor = log_t >= p.threshold(k + 3);   // u <= 2^(k+3)
    if (!(below_top && above_floor)) continue;
    if (band.envelopes.empty()) band.first_k = k;
    band.envelopes.push_back(envelope(k, log_t, p));
  }
  return band;
}

std::optional<int> band_index(double log_t, const Params& p) {
  if (!(log_t < p.threshold(0))) return std::nullopt;
  const double u = -log_t / p.log_M();
  int k = std::max(0, static_cast<int>(std::floor(std::log2(u))) - 1);
  while (k > 0 && log_t >= p.threshold(k)) --k;
  while (log_t < p.threshold(k + 1)) ++k;
  return k;
}

LogScalar effective_weight(Index n, double log_t, const Params& p) {
  const auto band = active_set(log_t, p);
  const auto env = band.at(dyadic_valuation(n) + 1);
  return mul(alpha(n, p), real_factor(env.complement));
}

ShiftSpec effective_shift(double log_t, const Params& p) {
  auto band = active_set(log_t, p);
  return {[band = std::move(band), p](Index n) {
            return mul(alpha(n, p), real_factor(band.at(dyadic_valuation(n) + 1).complement));
          },
          "W+N(t)"};
}

SparseVec StabilizedMap::linear(const SparseVec& x) const {
  return apply(ShiftSpec::from_profile(WeightProfile::full(params_)), x);
}

SparseVec StabilizedMap::nonlinear(const SparseVec& x) const {
  if (x.is_zero()) return {};
  return nonlinear_with(active_set(x.norm().log_mag, params_), x);
}

SparseVec StabilizedMap::nonlinear_with(const ActiveBand& band, const SparseVec& y) const {
  return level_scaled_shift(y, params_, [&](int level) { return -real_factor(band.at(level).value); });
}

SparseVec StabilizedMap::operator()(const SparseVec& x) const {
  if (x.is_zero()) return {};
  return apply_with(active_set(x.norm().log_mag, params_), x);
}

SparseVec StabilizedMap::apply_with(const ActiveBand& band, const SparseVec& x) const {
  return level_scaled_shift(x, params_, [&](int level) { return real_factor(band.at(level).complement); });
}

namespace {

// Per-level coefficient of the rank-one term: t c_k'(t) <x, y> / t^2.
struct RankOneTerm {
  const ActiveBand& band;
  LogScalar projection;  // <x, y> / t^2

  LogScalar operator()(int level) const {
    return mul(real_factor(band.at(level).log_slope), projection);
  }
};

}  // namespace

SparseVec StabilizedMap::derivative(const SparseVec& x, const SparseVec& y) const {
  if (x.is_zero()) return linear(y);
  const LogScalar t = x.norm();
  const auto band = active_set(t.log_mag, params_);
  const RankOneTerm rank_one{band, div(inner(x, y), mul(t, t))};

  const SparseVec linear_part = apply_with(band, y);
  const SparseVec slope_part = level_scaled_shift(x, params_, rank_one);
  return axpy(LogScalar{-1, 0.0}, slope_part, linear_part);
}

SparseVec StabilizedMap::nonlinear_derivative(const SparseVec& x, const SparseVec& y) const {
  if (x.is_zero()) return {};
  const LogScalar t = x.norm();
  const auto band = active_set(t.log_mag, params_);
  const RankOneTerm rank_one{band, div(inner(x, y), mul(t, t))};

  const SparseVec level_part =
      level_scaled_shift(y, params_, [&](int level) { return real_factor(band.at(level).value); });
  const SparseVec slope_part = level_scaled_shift(x, params_, rank_one);
  return scale(LogScalar{-1, 0.0}, axpy(LogScalar::one(), slope_part, level_part));
}

}  // namespace kakutani
