// Trajectory engine and runtime certificates for the stability and size
// estimates of the stabilized Kakutani map.
//
// Every certificate returns a CertificateReport. A failing report always carries
// a witness; a report whose hypotheses do not apply is "not applicable", which
// is neither a pass nor a failure.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kakutani/nonlinear_map.hpp"

namespace kakutani {

struct TrajectoryRecord {
  std::uint64_t step = 0;
  std::optional<double> log_norm;  // empty: the state is exactly zero
  std::optional<Index> support_min;
  std::optional<Index> support_max;
  std::optional<std::pair<int, int>> active_k_range;
  std::optional<int> band_k;

  bool is_zero() const { return !log_norm.has_value(); }
};

using TrajectorySink = std::function<void(const TrajectoryRecord&)>;

/// Iterates x_{n+1} = T(x_n) for up to `steps` steps, emitting one record per
/// state starting with x_0. Stops after the first exactly-zero record.
/// Returns the last state.
SparseVec iterate(const StabilizedMap& map, SparseVec x0, std::uint64_t steps,
                  const TrajectorySink& sink);
std::vector<TrajectoryRecord> iterate(const StabilizedMap& map, const SparseVec& x0,
                                      std::uint64_t steps);

/// The k with ||x|| in [M^-2^(k+2), M^-2^(k+1)), k >= 1: the index for which the
/// band-confinement estimate applies to x. Empty when ||x|| >= M^-4.
std::optional<int> stability_index(double log_norm, const Params& p);

enum class Status { pass, fail, not_applicable };

struct Metric {
  std::string name;
  double value;
};

struct Witness {
  std::uint64_t at = 0;  // step, level or sample index, depending on the certificate
  std::string what;
  std::vector<Metric> values;
};

struct CertificateReport {
  std::string id;
  Status status = Status::pass;
  double tolerance = 0.0;
  std::optional<Witness> witness;
  std::vector<Metric> metrics;
  std::string note;

  bool passed() const { return status == Status::pass; }
  bool failed() const { return status == Status::fail; }
  std::optional<double> metric(const std::string& name) const;
};

const char* to_string(Status s);

/// Combines per-item reports of one certificate: fails on the first failing
/// item (its witness is kept), not applicable only if every item is.
CertificateReport merge_reports(const std::string& id, std::span<const CertificateReport> items);

// Trajectory certificates ----------------------------------------------------

/// Rounding allowance of the per-step growth cap, in natural-log units.
double growth_cap_slack(double log_norm, const Params& p);

/// log||x_{n+1}|| <= log||x_n|| + ln M on every step, and zero is absorbing.
CertificateReport check_growth_cap(std::span<const TrajectoryRecord> traj, const Params& p);

/// Band confinement: with ||x_0|| < M^-2^(k+1), every state has
/// log||x_n|| < -2^k ln M; and, when ||x_0|| < M^-4, log||x_n|| < log||x_0|| / 4.
/// Both strict, zero tolerance. Not applicable when ||x_0|| >= M^-2^(k+1).
CertificateReport check_stability(std::span<const TrajectoryRecord> traj, int k, const Params& p);

/// log||x_n|| <= -(n/2) ln M + log||x_0|| / 8 + 1e-6 for all n.
/// Not applicable unless 0 < ||x_0|| < M^-4.
constexpr double kExponentialSlack = 1e-6;
CertificateReport check_exponential(std::span<const TrajectoryRecord> traj, const Params& p);
/// Same, with log||x_0|| supplied instead of read from the first record.
CertificateReport check_exponential(std::span<const TrajectoryRecord> traj, const Params& p,
                                    std::optional<double> log_x0);

/// A run of consecutive states in band k has length at most 2^k, and a run of
/// exactly 2^k is followed by the zero state.
CertificateReport check_band_dwell(std::span<const TrajectoryRecord> traj, const Params& p);

/// Descent times n(i): n(0) = 0 with index k(0) = stability_index(x_0), and
/// n(i+1) the first step with ||x|| < M^-2^(k(i)+2) (the zero state counts).
/// Checks that k(i) strictly increases and n(i+1) - n(i) <= 2^k(i).
CertificateReport check_band_exits(std::span<const TrajectoryRecord> traj, const Params& p);

/// Exponent a_n of the blockwise majorant M^-a_n for an orbit starting with
/// index k: blocks of 2^k, 2^(k+1), ... consecutive steps (n counted from 0)
/// carrying the values 2^k, 2^(k+1), ...
double blockwise_exponent(std::uint64_t n, int k);
/// Records with log norm -a_n ln M for n < steps. Check them against an x_0 at
/// the bottom of the band, log||x_0|| = -2^(k+2) ln M.
std::vector<TrajectoryRecord> blockwise_majorant(int k, std::uint64_t steps, const Params& p);

// Size estimates of N ----------------------------------------------------------

/// At a radius R in band k (k >= 3): the canonical direction e_{2^(k-1)} gives
/// ||N(x)||/||x|| = eps_k within 1e-12 relative, and `samples` random unit
/// directions all stay below 4 eps_{k-2}. Throws std::invalid_argument when R is
/// outside band k or k < 3.
CertificateReport check_ratio_band(const StabilizedMap& map, int k, double log_R, int samples,
                                   std::uint64_t seed);

/// Log-log sandwich at the canonical witness x = R e_{2^(k-1)} with R at the
/// log-midpoint of band k: (-log||x||)^-c2 < ||N(x)||/||x|| <= 4 eps_{k-2} <
/// 4 (-log||x||)^-c1. Reports k0 (smallest k from which both sides hold for
/// every tested k). Throws std::invalid_argument unless 0 < c1 < ln K/ln 2 < c2
/// and 3 <= k_min <= k_max.
CertificateReport check_loglog_bound(const StabilizedMap& map, double c1, double c2, int k_min,
                                     int k_max);

// Derivative -------------------------------------------------------------------

struct FdSpec {
  int points = 20;
  std::uint64_t seed = 7;
  double min_log_norm_pow = 16.0;  // ||x|| >= M^-16
  double max_log_norm_pow = 4.0;   // ||x|| <  M^-4
  double rel_step = 1e-6;          // h = rel_step * ||x||
  double tolerance = 1e-5;
};

/// Richardson-extrapolated central differences of T against DT y at random
/// points and directions, plus the N(x) = o(||x||) witness along a shrinking
/// sequence.
CertificateReport fd_derivative_check(const StabilizedMap& map, const FdSpec& spec);

/// Sum over the levels j active at t of (2/(1 - M^-2^(j-1)) + 1) eps_j.
LogScalar dn_norm_cap(double log_t, const Params& p);

/// Lower estimate of ||DN(x)||: max of ||DN(x) y|| over x/||x||, the basis
/// vectors on x's support and at the mask positions of the active
/// levels, and `random_directions` random unit vectors.
LogScalar dn_norm_estimate(const StabilizedMap& map, const SparseVec& x, int random_directions,
                           std::mt19937_64& rng);

/// Per band k in [k_min, k_max]: sampled ||DN|| estimates stay below the
/// summed per-level cap and 12 eps_{k-2}, and the band maxima strictly decrease.
CertificateReport check_dn_bounds(const StabilizedMap& map, int k_min, int k_max,
                                  int points_per_band, std::uint64_t seed);

// Linear part ------------------------------------------------------------------

/// ||W^(2^p-1) e_1||^(1/(2^p-1)) for p <= p_max by direct iteration: above
/// 1.05 for every p >= 3 and, when p_max >= 12, within 1% of M/K at p_max.
CertificateReport linear_instability_demo(const Params& p, int p_max);

/// |rho_estimate(p) - M/K| <= tol and the estimates are nonincreasing in p.
CertificateReport check_spectral_radius(const Params& p, int p_max, double tol);

/// For p <= p_max: closed form, windowed sup with horizon 4*2^p and the prefix
/// product alpha_1...alpha_(2^p-1) agree within `rel_tol` in log magnitude.
CertificateReport check_norm_identities(const Params& p, int p_max, double rel_tol);

/// For m = 1..m_max: (W - L_m)^(2^m) kills every e_i, i <= basis_last, and
/// (W - L_m)^(2^m - 1) does not.
CertificateReport check_nilpotency(const Params& p, int m_max, Index basis_last);

// Random inputs ------------------------------------------------------------------

/// Unit vector with 1..max_support entries at indices in [1, max_index],
/// random signs and log magnitudes.
SparseVec random_unit_direction(std::mt19937_64& rng, std::size_t max_support, Index max_index);

/// Vector with 1..16 entries at indices 1..64, coefficient log magnitudes drawn
/// inside band k, rescaled so that its norm is log-uniform inside band k.
SparseVec random_initial_vector(std::mt19937_64& rng, int band_k, const Params& p);

}  // namespace kakutani
