#include "kakutani/certificates.hpp"

#include <algorithm>
#include <bit>
#include <cfloat>
#include <cmath>
#include <limits>
#include <map>

namespace kakutani {

namespace {

constexpr LogScalar kMinusOne{-1, 0.0};

CertificateReport make_report(std::string id, double tolerance) {
  CertificateReport r;
  r.id = std::move(id);
  r.tolerance = tolerance;
  return r;
}

void fail(CertificateReport& r, std::uint64_t at, std::string what, std::vector<Metric> values) {
  if (r.status == Status::fail) return;  // keep the first violation
  r.status = Status::fail;
  r.witness = Witness{at, std::move(what), std::move(values)};
}

CertificateReport not_applicable(std::string id, double tolerance, std::string why) {
  auto r = make_report(std::move(id), tolerance);
  r.status = Status::not_applicable;
  r.note = std::move(why);
  return r;
}

LogScalar normalized(const SparseVec& v) { return div(LogScalar::one(), v.norm()); }

SparseVec unit(const SparseVec& v) { return scale(normalized(v), v); }

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::uint64_t uniform_int(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

int random_sign(std::mt19937_64& rng) { return uniform_int(rng, 0, 1) ? 1 : -1; }

// Unit direction mixing uniform indices with positions on the masks of the
// levels k-3..k.
SparseVec random_mixed_direction(std::mt19937_64& rng, int k) {
  const Index wide = Index{1} << std::min(k + 3, 30);
  for (;;) {
    std::vector<SparseVec::Entry> entries;
    const auto size = uniform_int(rng, 1, 16);
    for (std::uint64_t i = 0; i < size; ++i) {
      Index n;
      if (uniform_int(rng, 0, 1) == 0) {
        n = uniform_int(rng, 1, wide);
      } else {
        const auto v = uniform_int(rng, static_cast<std::uint64_t>(std::max(0, k - 3)),
                                   static_cast<std::uint64_t>(k));
        n = (Index{1} << v) * (2 * uniform_int(rng, 0, 63) + 1);
      }
      entries.push_back({n, LogScalar{random_sign(rng), uniform(rng, -3.0, 0.0)}});
    }
    auto v = SparseVec::from_entries(std::move(entries));
    if (!v.is_zero()) return unit(v);
  }
}

// log(||N(R u)|| / R) for a unit vector u.
double log_ratio(const StabilizedMap& map, double log_R, const SparseVec& u) {
  const auto image = map.nonlinear_with(active_set(log_R, map.params()), u);
  if (image.is_zero()) return -std::numeric_limits<double>::infinity();
  return image.norm().log_mag;
}

}  // namespace

std::optional<double> CertificateReport::metric(const std::string& name) const {
  for (const auto& m : metrics)
    if (m.name == name) return m.value;
  return std::nullopt;
}

const char* to_string(Status s) {
  switch (s) {
    case Status::pass:
      return "pass";
    case Status::fail:
      return "fail";
    case Status::not_applicable:
      return "not_applicable";
  }
  return "?";
}

CertificateReport merge_reports(const std::string& id, std::span<const CertificateReport> items) {
  auto out = make_report(id, items.empty() ? 0.0 : items.front().tolerance);
  std::size_t applicable = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& r = items[i];
    if (r.status == Status::not_applicable) continue;
    ++applicable;
    if (r.failed() && !out.failed()) {
      out.status = Status::fail;
      out.witness = r.witness;
      out.note = "item " + std::to_string(i) + (r.note.empty() ? "" : ": " + r.note);
      out.metrics.push_back({"failing_item", static_cast<double>(i)});
    }
  }
  if (applicable == 0 && !items.empty()) out.status = Status::not_applicable;
  out.metrics.push_back({"items", static_cast<double>(items.size())});
  out.metrics.push_back({"applicable_items", static_cast<double>(applicable)});
  return out;
}

// ---------------------------------------------------------------------------
// Trajectories

SparseVec iterate(const StabilizedMap& map, SparseVec x, std::uint64_t steps,
                  const TrajectorySink& sink) {
  const Params& p = map.params();
  for (std::uint64_t n = 0;; ++n) {
    TrajectoryRecord rec;
    rec.step = n;
    if (x.is_zero()) {
      sink(rec);
      return x;
    }
    const double log_t = x.norm().log_mag;
    const auto band = active_set(log_t, p);
    rec.log_norm = log_t;
    rec.support_min = x.support_min();
    rec.support_max = x.support_max();
    rec.active_k_range = band.nonzero_range();
    rec.band_k = band_index(log_t, p);
    sink(rec);
    if (n == steps) return x;
    x = map.apply_with(band, x);
  }
}

std::vector<TrajectoryRecord> iterate(const StabilizedMap& map, const SparseVec& x0,
                                      std::uint64_t steps) {
  std::vector<TrajectoryRecord> out;
  iterate(map, x0, steps, [&](const TrajectoryRecord& r) { out.push_back(r); });
  return out;
}

std::optional<int> stability_index(double log_norm, const Params& p) {
  const auto b = band_index(log_norm, p);
  if (!b || *b < 2) return std::nullopt;
  return *b - 1;
}

double growth_cap_slack(double log_norm, const Params& p) {
  return 64.0 * DBL_EPSILON * (std::fabs(log_norm) + p.log_M());
}

CertificateReport check_growth_cap(std::span<const TrajectoryRecord> traj, const Params& p) {
  auto r = make_report("growth_cap", 64.0 * DBL_EPSILON);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const auto& a = traj[i];
    const auto& b = traj[i + 1];
    if (a.is_zero()) {
      if (!b.is_zero()) fail(r, b.step, "state left zero", {});
      continue;
    }
    if (b.is_zero()) continue;
    const double growth = *b.log_norm - *a.log_norm;
    worst = std::max(worst, growth);
    if (growth > p.log_M() + growth_cap_slack(*a.log_norm, p))
      fail(r, b.step, "norm grew by more than a factor M",
           {{"log_norm_before", *a.log_norm}, {"log_norm_after", *b.log_norm}});
  }
  if (std::isfinite(worst)) r.metrics.push_back({"max_log_growth", worst});
  r.metrics.push_back({"log_M", p.log_M()});
  return r;
}

CertificateReport check_stability(std::span<const TrajectoryRecord> traj, int k, const Params& p) {
  if (k < 1) throw std::invalid_argument("check_stability: k must be >= 1");
  auto r = make_report("stability", 0.0);
  if (traj.empty()) return not_applicable("stability", 0.0, "empty trajectory");
  if (traj.front().is_zero()) {
    r.note = "zero initial state";
    return r;
  }
  const double log_x0 = *traj.front().log_norm;
  if (!(log_x0 < p.threshold(k + 1)))
    return not_applicable("stability", 0.0, "initial norm not below M^-2^(k+1)");

  const double band_bound = p.threshold(k);
  const bool quarter_applies = log_x0 < p.threshold(2);
  const double quarter_bound = 0.25 * log_x0;
  double highest = -std::numeric_limits<double>::infinity();
  for (const auto& rec : traj) {
    if (rec.is_zero()) continue;
    const double v = *rec.log_norm;
    highest = std::max(highest, v);
    if (!(v < band_bound))
      fail(r, rec.step, "norm reached M^-2^k", {{"log_norm", v}, {"bound", band_bound}});
    if (quarter_applies && !(v < quarter_bound))
      fail(r, rec.step, "norm reached ||x0||^(1/4)", {{"log_norm", v}, {"bound", quarter_bound}});
  }
  r.metrics = {{"k", static_cast<double>(k)},
               {"max_log_norm", highest},
               {"band_bound", band_bound},
               {"quarter_bound", quarter_applies ? quarter_bound : NAN}};
  return r;
}

CertificateReport check_exponential(std::span<const TrajectoryRecord> traj, const Params& p,
                                    std::optional<double> log_x0_override) {
  auto r = make_report("exponential", kExponentialSlack);
  if (traj.empty()) return not_applicable("exponential", kExponentialSlack, "empty trajectory");
  if (traj.front().is_zero() && !log_x0_override) return r;
  const double log_x0 = log_x0_override ? *log_x0_override : *traj.front().log_norm;
  if (!(log_x0 < p.threshold(2)))
    return not_applicable("exponential", kExponentialSlack, "initial norm not below M^-4");

  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& rec : traj) {
    if (rec.is_zero()) continue;
    const double n = static_cast<double>(rec.step);
    const double bound = -0.5 * n * p.log_M() + log_x0 / 8.0;
    const double margin = bound - *rec.log_norm;
    min_margin = std::min(min_margin, margin);
    if (*rec.log_norm > bound + kExponentialSlack)
      fail(r, rec.step, "exponential decay bound exceeded",
           {{"log_norm", *rec.log_norm}, {"bound", bound}});
  }
  if (std::isfinite(min_margin)) r.metrics.push_back({"min_margin", min_margin});
  return r;
}

CertificateReport check_exponential(std::span<const TrajectoryRecord> traj, const Params& p) {
  return check_exponential(traj, p, std::nullopt);
}

CertificateReport check_band_dwell(std::span<const TrajectoryRecord> traj, const Params&) {
  auto r = make_report("band_dwell", 0.0);
  std::uint64_t longest = 0;
  std::size_t i = 0;
  while (i < traj.size()) {
    if (!traj[i].band_k) {
      ++i;
      continue;
    }
    const int band = *traj[i].band_k;
    std::size_t j = i;
    while (j < traj.size() && traj[j].band_k == band) ++j;
    const std::uint64_t run = j - i;
    longest = std::max(longest, run);
    if (band < 62) {
      const std::uint64_t limit = std::uint64_t{1} << band;
      if (run > limit)
        fail(r, traj[i].step, "stayed in one band for more than 2^k steps",
             {{"band", static_cast<double>(band)}, {"run", static_cast<double>(run)}});
      else if (run == limit && j < traj.size() && !traj[j].is_zero())
        fail(r, traj[j].step, "2^k steps in one band without reaching zero",
             {{"band", static_cast<double>(band)}, {"run", static_cast<double>(run)}});
    }
    i = j;
  }
  r.metrics.push_back({"longest_run", static_cast<double>(longest)});
  return r;
}

CertificateReport check_band_exits(std::span<const TrajectoryRecord> traj, const Params& p) {
  auto r = make_report("band_exits", 0.0);
  if (traj.empty()) return not_applicable("band_exits", 0.0, "empty trajectory");
  if (traj.front().is_zero()) return r;
  auto k = stability_index(*traj.front().log_norm, p);
  if (!k) return not_applicable("band_exits", 0.0, "initial norm not below M^-4");

  std::uint64_t start = traj.front().step;
  std::uint64_t descents = 0;
  int deepest = *k;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const auto& rec = traj[i];
    const bool descended = rec.is_zero() || *rec.log_norm < p.threshold(*k + 2);
    const std::uint64_t elapsed = rec.step - start;
    const std::uint64_t limit = *k < 62 ? std::uint64_t{1} << *k : UINT64_MAX;
    if (!descended) {
      if (elapsed >= limit)
        fail(r, rec.step, "no descent within 2^k steps",
             {{"k", static_cast<double>(*k)}, {"since", static_cast<double>(start)}});
      continue;
    }
    ++descents;
    if (rec.is_zero()) break;
    const auto next = stability_index(*rec.log_norm, p);
    if (!next || *next <= *k)
      fail(r, rec.step, "descent index did not increase",
           {{"k", static_cast<double>(*k)}, {"next", next ? double(*next) : NAN}});
    if (!next) break;
    k = next;
    deepest = std::max(deepest, *k);
    start = rec.step;
  }
  r.metrics = {{"descents", static_cast<double>(descents)}, {"deepest_k", static_cast<double>(deepest)}};
  return r;
}

double blockwise_exponent(std::uint64_t n, int k) {
  const std::uint64_t q = n >> k;
  const int j = static_cast<int>(std::bit_width(q + 1)) - 1;
  return std::ldexp(1.0, k + j);
}

std::vector<TrajectoryRecord> blockwise_majorant(int k, std::uint64_t steps, const Params& p) {
  std::vector<TrajectoryRecord> out;
  out.reserve(steps);
  for (std::uint64_t n = 0; n < steps; ++n) {
    TrajectoryRecord rec;
    rec.step = n;
    rec.log_norm = -blockwise_exponent(n, k) * p.log_M();
    out.push_back(rec);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Size estimates of N

CertificateReport check_ratio_band(const StabilizedMap& map, int k, double log_R, int samples,
                                   std::uint64_t seed) {
  const Params& p = map.params();
  if (k < 3) throw std::invalid_argument("check_ratio_band: k must be >= 3");
  if (!(log_R >= p.threshold(k + 1) && log_R < p.threshold(k)))
    throw std::invalid_argument("check_ratio_band: R is not in band k");
  constexpr double kRelTol = 1e-12;
  auto r = make_report("ratio_band", kRelTol);

  const double log_eps_k = epsilon(static_cast<std::uint64_t>(k), p).log_mag;
  const double log_cap = std::log(4.0) + epsilon(static_cast<std::uint64_t>(k - 2), p).log_mag;

  const auto canonical_dir = SparseVec::basis(Index{1} << (k - 1), LogScalar::one());
  const double canonical = log_ratio(map, log_R, canonical_dir);
  const double rel = std::fabs(std::expm1(canonical - log_eps_k));
  if (!(rel <= kRelTol))
    fail(r, static_cast<std::uint64_t>(k), "canonical ratio differs from eps_k",
         {{"log_ratio", canonical}, {"log_eps_k", log_eps_k}});

  std::mt19937_64 rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const double lr = log_ratio(map, log_R, random_mixed_direction(rng, k));
    worst = std::max(worst, lr);
    if (lr > log_cap)
      fail(r, static_cast<std::uint64_t>(s), "random direction exceeds 4 eps_{k-2}",
           {{"log_ratio", lr}, {"log_cap", log_cap}});
  }
  r.metrics = {{"k", static_cast<double>(k)},
               {"canonical_rel_error", rel},
               {"log_eps_k", log_eps_k},
               {"max_sampled_log_ratio", worst},
               {"log_cap", log_cap}};
  return r;
}

CertificateReport check_loglog_bound(const StabilizedMap& map, double c1, double c2, int k_min,
                                     int k_max) {
  const Params& p = map.params();
  const double critical = p.log_K() / std::log(2.0);
  if (!(0.0 < c1 && c1 < critical && critical < c2))
    throw std::invalid_argument("check_loglog_bound: need 0 < c1 < ln K / ln 2 < c2");
  if (k_min < 3 || k_max < k_min || k_max > 60)
    throw std::invalid_argument("check_loglog_bound: need 3 <= k_min <= k_max <= 60");
  auto r = make_report("loglog_bound", 0.0);

  int k0 = -1;  // -1 while the current run of passing k is empty
  int first_failure = -1;
  for (int k = k_min; k <= k_max; ++k) {
    const double log_R = 0.5 * (p.threshold(k + 1) + p.threshold(k));
    const double ratio = log_ratio(map, log_R, SparseVec::basis(Index{1} << (k - 1), LogScalar::one()));
    const double log_neg_log = std::log(-log_R);  // ln(-ln||x||)
    const double lower = -c2 * log_neg_log;
    const double upper = std::log(4.0) - c1 * log_neg_log;
    const double middle = std::log(4.0) + epsilon(static_cast<std::uint64_t>(k - 2), p).log_mag;
    const bool ok = lower < ratio && ratio <= middle && middle < upper;
    if (ok) {
      if (k0 < 0) k0 = k;
    } else {
      k0 = -1;
      first_failure = k;
    }
  }
  r.metrics = {{"c1", c1}, {"c2", c2}, {"critical_exponent", critical},
               {"k_min", double(k_min)}, {"k_max", double(k_max)}};
  if (k0 >= 0) {
    r.metrics.push_back({"k0", static_cast<double>(k0)});
  } else {
    fail(r, static_cast<std::uint64_t>(first_failure), "bound fails at the largest tested k", {});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Derivative

namespace {

SparseVec central_difference(const StabilizedMap& map, const SparseVec& x, const SparseVec& y,
                             LogScalar h) {
  const auto plus = map(axpy(h, y, x));
  const auto minus = map(axpy(-h, y, x));
  const auto diff = axpy(kMinusOne, minus, plus);
  return scale(div(LogScalar::one(), mul(LogScalar::from_real(2.0), h)), diff);
}

double relative_distance(const SparseVec& approx, const SparseVec& exact) {
  const auto err = axpy(kMinusOne, exact, approx);
  if (err.is_zero()) return 0.0;
  if (exact.is_zero()) return std::numeric_limits<double>::infinity();
  return std::exp(err.norm().log_mag - exact.norm().log_mag);
}

}  // namespace

CertificateReport fd_derivative_check(const StabilizedMap& map, const FdSpec& spec) {
  const Params& p = map.params();
  auto r = make_report("derivative_fd", spec.tolerance);
  std::mt19937_64 rng(spec.seed);
  const double lo = -spec.min_log_norm_pow * p.log_M();
  const double hi = -spec.max_log_norm_pow * p.log_M();

  double worst = 0.0;
  int applicable = 0;
  for (int i = 0; i < spec.points; ++i) {
    const auto dir = random_unit_direction(rng, 16, 64);
    const auto x = scale(LogScalar::positive(uniform(rng, lo, hi)), dir);
    const auto y = random_unit_direction(rng, 16, 64);
    const double log_t = x.norm().log_mag;
    if (!(log_t >= lo && log_t < hi)) continue;
    ++applicable;

    const LogScalar h = LogScalar::positive(log_t + std::log(spec.rel_step));
    const LogScalar half_h = mul(h, LogScalar::from_real(0.5));
    const auto coarse = central_difference(map, x, y, h);
    const auto fine = central_difference(map, x, y, half_h);
    // Richardson: (4 D(h/2) - D(h)) / 3
    const auto extrapolated = scale(LogScalar::from_real(1.0 / 3.0),
                                    axpy(LogScalar::from_real(4.0), fine, scale(kMinusOne, coarse)));
    const auto exact = map.derivative(x, y);
    const double err = relative_distance(extrapolated, exact);
    worst = std::max(worst, err);
    if (!(err <= spec.tolerance))
      fail(r, static_cast<std::uint64_t>(i), "finite differences disagree with DT",
           {{"log_norm", log_t}, {"relative_error", err}});
  }

  // N(x) = o(||x||): along x_k = R_k e_(2^(k-1)) the ratio stays below
  // 4 eps_{k-2} and strictly decreases.
  double last_log_ratio = INFINITY;
  for (int k = 3; k <= 30; ++k) {
    const double log_R = 0.5 * (p.threshold(k + 1) + p.threshold(k));
    const double lr = log_ratio(map, log_R, SparseVec::basis(Index{1} << (k - 1), LogScalar::one()));
    const double cap = std::log(4.0) + epsilon(static_cast<std::uint64_t>(k - 2), p).log_mag;
    if (lr > cap || !(lr < last_log_ratio))
      fail(r, static_cast<std::uint64_t>(k), "N(x)/||x|| not shrinking below 4 eps_{k-2}",
           {{"log_ratio", lr}, {"log_cap", cap}});
    last_log_ratio = lr;
  }

  if (applicable == 0) {
    r.status = Status::not_applicable;
    r.note = "no sample point inside the representable window";
  }
  r.metrics = {{"points", static_cast<double>(applicable)},
               {"max_relative_error", worst},
               {"log_ratio_at_k30", last_log_ratio}};
  return r;
}

LogScalar dn_norm_cap(double log_t, const Params& p) {
  const auto band = active_set(log_t, p);
  LogScalar cap = LogScalar::zero();
  for (const int k : band.k_list()) {
    if (!band.at(k).active()) continue;
    const double factor = 2.0 / -std::expm1(p.threshold(k - 1)) + 1.0;
    cap = add(cap, mul(LogScalar::from_real(factor), epsilon(static_cast<std::uint64_t>(k), p)));
  }
  return cap;
}

LogScalar dn_norm_estimate(const StabilizedMap& map, const SparseVec& x, int random_directions,
                           std::mt19937_64& rng) {
  if (x.is_zero()) return LogScalar::zero();
  LogScalar best = LogScalar::zero();
  auto probe = [&](const SparseVec& y) {
    const auto image = map.nonlinear_derivative(x, y);
    if (image.is_zero()) return;
    const auto gain = div(image.norm(), y.norm());
    if (compare(gain, best) > 0) best = gain;
  };

  probe(unit(x));
  for (const auto& e : x.entries()) probe(SparseVec::basis(e.index, LogScalar::one()));
  const auto band = active_set(x.norm().log_mag, map.params());
  for (const int k : band.k_list())
    if (k <= 62) probe(SparseVec::basis(Index{1} << (k - 1), LogScalar::one()));
  const Index reach = std::max<Index>(64, x.support_max() + 64);
  for (int i = 0; i < random_directions; ++i) probe(random_unit_direction(rng, 16, reach));
  return best;
}

CertificateReport check_dn_bounds(const StabilizedMap& map, int k_min, int k_max,
                                  int points_per_band, std::uint64_t seed) {
  const Params& p = map.params();
  if (k_min < 3 || k_max < k_min || k_max > 40)
    throw std::invalid_argument("check_dn_bounds: need 3 <= k_min <= k_max <= 40");
  auto r = make_report("derivative_dn_bounds", 1e-12);
  std::mt19937_64 rng(seed);

  std::vector<double> band_max;
  for (int k = k_min; k <= k_max; ++k) {
    const double top = p.threshold(k);
    const double bottom = p.threshold(k + 1);
    const double twelve_eps = std::log(12.0) + epsilon(static_cast<std::uint64_t>(k - 2), p).log_mag;
    double highest = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < points_per_band; ++i) {
      SparseVec x;
      double log_t;
      if (i % 2 == 0) {
        // Canonical point of the level whose rising ramp spans band k, on a grid
        // of relative positions t/M^-2^k in (0, 1).
        const int half = (points_per_band + 1) / 2;
        const double frac = (i / 2 + 0.5) / half;
        log_t = std::max(bottom, top + std::log(frac));
        x = SparseVec::basis(Index{1} << (k - 3), LogScalar::positive(log_t));
      } else {
        log_t = uniform(rng, bottom, top);
        x = scale(LogScalar::positive(log_t), random_unit_direction(rng, 16, 64));
      }
      const auto estimate = dn_norm_estimate(map, x, 8, rng);
      const auto cap = dn_norm_cap(x.norm().log_mag, p);
      const double est_log = estimate.is_zero() ? -INFINITY : estimate.log_mag;
      highest = std::max(highest, est_log);
      if (est_log > cap.log_mag + r.tolerance)
        fail(r, static_cast<std::uint64_t>(k), "sampled ||DN|| above the summed level cap",
             {{"log_estimate", est_log}, {"log_cap", cap.log_mag}});
      if (cap.log_mag > twelve_eps)
        fail(r, static_cast<std::uint64_t>(k), "summed level cap above 12 eps_{k-2}",
             {{"log_cap", cap.log_mag}, {"log_12_eps", twelve_eps}});
    }
    band_max.push_back(highest);
    r.metrics.push_back({"band_" + std::to_string(k) + "_log_max", highest});
  }
  for (std::size_t i = 1; i < band_max.size(); ++i)
    if (!(band_max[i] < band_max[i - 1]))
      fail(r, static_cast<std::uint64_t>(k_min) + i, "band maximum of ||DN|| did not decrease",
           {{"previous", band_max[i - 1]}, {"current", band_max[i]}});
  return r;
}

// ---------------------------------------------------------------------------
// Linear part

CertificateReport linear_instability_demo(const Params& p, int p_max) {
  if (p_max < 3 || p_max > 24) throw std::invalid_argument("linear_instability_demo: need 3 <= p_max <= 24");
  auto r = make_report("linear_instability", 0.01);
  const auto W = ShiftSpec::from_profile(WeightProfile::full(p));
  const double limit = p.M() / p.K();

  SparseVec v = SparseVec::basis(1, LogScalar::one());
  std::uint64_t n = 0;
  double last = 0.0;
  for (int q = 1; q <= p_max; ++q) {
    const std::uint64_t target = (std::uint64_t{1} << q) - 1;
    while (n < target) {
      v = apply(W, v);
      ++n;
    }
    const double log_norm = v.norm().log_mag;
    const double closed = wn_norm_closed(q, p).log_mag;
    if (std::fabs(log_norm - closed) > 1e-12 * std::fabs(closed))
      fail(r, static_cast<std::uint64_t>(q), "orbit norm differs from the closed form",
           {{"log_norm", log_norm}, {"closed", closed}});
    last = std::exp(log_norm / static_cast<double>(n));
    r.metrics.push_back({"root_p" + std::to_string(q), last});
    if (q >= 3 && !(last >= 1.05))
      fail(r, static_cast<std::uint64_t>(q), "root growth rate below 1.05", {{"value", last}});
  }
  if (p_max >= 12 && !(std::fabs(last / limit - 1.0) <= 0.01))
    fail(r, static_cast<std::uint64_t>(p_max), "root growth rate not within 1% of M/K",
         {{"value", last}, {"limit", limit}});
  r.metrics.push_back({"limit", limit});
  return r;
}

CertificateReport check_spectral_radius(const Params& p, int p_max, double tol) {
  if (p_max < 1) throw std::invalid_argument("check_spectral_radius: p must be >= 1");
  auto r = make_report("spectral_radius", tol);
  const double limit = p.M() / p.K();
  double prev = INFINITY;
  double value = 0.0;
  for (int q = 1; q <= p_max; ++q) {
    value = rho_estimate(q, p);
    if (value > prev)
      fail(r, static_cast<std::uint64_t>(q), "estimates increased", {{"previous", prev}, {"value", value}});
    prev = value;
  }
  if (!(std::fabs(value - limit) <= tol))
    fail(r, static_cast<std::uint64_t>(p_max), "estimate not within tolerance of M/K",
         {{"value", value}, {"limit", limit}});
  r.metrics = {{"estimate", value}, {"limit", limit}, {"abs_error", std::fabs(value - limit)}};
  return r;
}

CertificateReport check_norm_identities(const Params& p, int p_max, double rel_tol) {
  if (p_max < 1 || p_max > 20) throw std::invalid_argument("check_norm_identities: need 1 <= p <= 20");
  auto r = make_report("norm_identities", rel_tol);
  const auto W = ShiftSpec::from_profile(WeightProfile::full(p));
  double worst = 0.0;
  for (int q = 1; q <= p_max; ++q) {
    const std::uint64_t n = (std::uint64_t{1} << q) - 1;
    const double closed = wn_norm_closed(q, p).log_mag;
    const double windowed = op_norm_power(W, n, std::uint64_t{4} << q).log_mag;
    double prefix = 0.0;
    for (Index i = 1; i <= n; ++i) prefix += alpha(i, p).log_mag;
    const double scale_ = std::fabs(closed);
    const double e1 = std::fabs(windowed - closed) / scale_;
    const double e2 = std::fabs(prefix - closed) / scale_;
    worst = std::max({worst, e1, e2});
    if (!(e1 <= rel_tol && e2 <= rel_tol))
      fail(r, static_cast<std::uint64_t>(q), "norm identities disagree",
           {{"closed", closed}, {"windowed", windowed}, {"prefix", prefix}});
  }
  r.metrics = {{"max_relative_error", worst}};
  return r;
}

CertificateReport check_nilpotency(const Params& p, int m_max, Index basis_last) {
  if (m_max < 1 || m_max > 20) throw std::invalid_argument("check_nilpotency: need 1 <= m <= 20");
  auto r = make_report("nilpotency", 0.0);
  for (int m = 1; m <= m_max; ++m) {
    const auto op = ShiftSpec::from_profile(WeightProfile::complement(p, static_cast<std::uint64_t>(m)));
    std::vector<ShiftSpec> ops(std::size_t{1} << m, op);
    try {
      const auto full = verify_nilpotent_set(ops, m, 1, basis_last);
      if (!full.annihilates)
        fail(r, static_cast<std::uint64_t>(m), "2^m-fold power left a basis vector alive",
             {{"survivor", static_cast<double>(*full.survivor)}});
      ops.pop_back();
      const auto short_power = verify_nilpotent_set(ops, m, 1, basis_last);
      if (short_power.annihilates)
        fail(r, static_cast<std::uint64_t>(m), "(2^m - 1)-fold power already vanishes", {});
    } catch (const OmegaCertificationError& e) {
      fail(r, static_cast<std::uint64_t>(m), e.what(), {});
    }
  }
  r.metrics = {{"m_max", double(m_max)}, {"basis_last", double(basis_last)}};
  return r;
}

// ---------------------------------------------------------------------------
// Random inputs

SparseVec random_unit_direction(std::mt19937_64& rng, std::size_t max_support, Index max_index) {
  for (;;) {
    std::vector<SparseVec::Entry> entries;
    const auto size = uniform_int(rng, 1, max_support);
    for (std::uint64_t i = 0; i < size; ++i)
      entries.push_back({uniform_int(rng, 1, max_index),
                         LogScalar{random_sign(rng), uniform(rng, -4.0, 0.0)}});
    auto v = SparseVec::from_entries(std::move(entries));
    if (!v.is_zero()) return unit(v);
  }
}

SparseVec random_initial_vector(std::mt19937_64& rng, int band_k, const Params& p) {
  const double top = p.threshold(band_k);
  const double bottom = p.threshold(band_k + 1);
  for (;;) {
    std::vector<SparseVec::Entry> entries;
    const auto size = uniform_int(rng, 1, 16);
    for (std::uint64_t i = 0; i < size; ++i)
      entries.push_back({uniform_int(rng, 1, 64), LogScalar{random_sign(rng), uniform(rng, bottom, top)}});
    auto v = SparseVec::from_entries(std::move(entries));
    if (v.is_zero()) continue;
    const double target = uniform(rng, bottom, top);
    return scale(LogScalar::positive(target - v.norm().log_mag), v);
  }
}

}  // namespace kakutani
