#include "suites.hpp"

#include <algorithm>
#include <chrono>

namespace kakutani::cli {

namespace {

constexpr int kBandLo = 3;
constexpr int kBandHi = 12;
constexpr int kPerBand = 10;

class Collector {
 public:
  explicit Collector(bool timing) : timing_(timing) {}

  template <typename Fn>
  void run(Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    auto reports = fn();
    const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
    for (auto& r : reports) {
      out_.reports.push_back(std::move(r));
      out_.runtime_ms.push_back(timing_ ? std::optional<double>(elapsed.count()) : std::nullopt);
    }
  }

  SuiteResult take() { return std::move(out_); }

 private:
  bool timing_;
  SuiteResult out_;
};

struct TrajectoryFamily {
  bool stability = false;
  bool exponential = false;
};

std::vector<CertificateReport> trajectory_suite(const SuiteOptions& opt, TrajectoryFamily fam) {
  const Params& p = opt.params;
  const StabilizedMap map(p);
  std::mt19937_64 rng(opt.seed);

  std::vector<CertificateReport> stab, growth, dwell, exits, expo;
  for (int band = kBandLo; band <= kBandHi; ++band) {
    for (int i = 0; i < kPerBand; ++i) {
      const auto traj = iterate(map, random_initial_vector(rng, band, p), opt.steps);
      if (fam.stability) {
        stab.push_back(check_stability(traj, band - 1, p));
        growth.push_back(check_growth_cap(traj, p));
        dwell.push_back(check_band_dwell(traj, p));
        exits.push_back(check_band_exits(traj, p));
      }
      if (fam.exponential) expo.push_back(check_exponential(traj, p));
    }
  }

  std::vector<CertificateReport> out;
  if (fam.stability) {
    out.push_back(merge_reports("stability", stab));
    out.push_back(merge_reports("growth_cap", growth));
    out.push_back(merge_reports("band_dwell", dwell));
    out.push_back(merge_reports("band_exits", exits));

    // ||x_0|| = M^-257 sits in the index-7 range, so the orbit stays below M^-128.
    const auto x0 = SparseVec::basis(1, LogScalar::positive(-257.0 * p.log_M()));
    const auto traj = iterate(map, x0, opt.steps);
    auto worked = check_stability(traj, 7, p);
    worked.id = "stability_worked_instance";
    out.push_back(std::move(worked));
  }
  if (fam.exponential) {
    out.push_back(merge_reports("exponential", expo));
    std::vector<CertificateReport> maj;
    for (int k = 1; k <= kBandHi; ++k)
      maj.push_back(check_exponential(blockwise_majorant(k, opt.steps, p), p, p.threshold(k + 2)));
    out.push_back(merge_reports("exponential_majorant", maj));
  }
  return out;
}

std::vector<CertificateReport> bounds_suite(const SuiteOptions& opt) {
  const Params& p = opt.params;
  const StabilizedMap map(p);
  std::vector<CertificateReport> ratios;
  for (int k = 3; k <= 30; ++k) {
    const double mid = 0.5 * (p.threshold(k) + p.threshold(k + 1));
    ratios.push_back(check_ratio_band(map, k, mid, 200, opt.seed + static_cast<std::uint64_t>(k)));
  }
  return {merge_reports("ratio_band", ratios), check_loglog_bound(map, opt.c1, opt.c2, 3, 40)};
}

std::vector<CertificateReport> derivative_suite(const SuiteOptions& opt) {
  const StabilizedMap map(opt.params);
  FdSpec spec;
  spec.seed = opt.seed;
  return {fd_derivative_check(map, spec), check_dn_bounds(map, 3, 12, 16, opt.seed)};
}

std::vector<CertificateReport> linear_suite(const SuiteOptions& opt) {
  return {linear_instability_demo(opt.params, 12), check_spectral_radius(opt.params, 40, 1e-9),
          check_norm_identities(opt.params, 6, 1e-12)};
}

}  // namespace

bool SuiteResult::passed() const {
  return std::none_of(reports.begin(), reports.end(), [](const CertificateReport& r) { return r.failed(); });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"stability",  "exponential", "bounds",
                                                 "nilpotency", "derivative",  "linear-instability",
                                                 "all"};
  return names;
}

bool is_suite(const std::string& name) {
  const auto& n = suite_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& opt) {
  const bool all = name == "all";
  Collector c(opt.timing);
  if (all || name == "stability" || name == "exponential")
    c.run([&] {
      return trajectory_suite(opt, {all || name == "stability", all || name == "exponential"});
    });
  if (all || name == "bounds") c.run([&] { return bounds_suite(opt); });
  if (all || name == "nilpotency")
    c.run([&] { return std::vector{check_nilpotency(opt.params, 8, 512)}; });
  if (all || name == "derivative") c.run([&] { return derivative_suite(opt); });
  if (all || name == "linear-instability") c.run([&] { return linear_suite(opt); });
  return c.take();
}

}  // namespace kakutani::cli
