#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "kakutani/certificates.hpp"

using namespace kakutani;

namespace {

const Params P;
const StabilizedMap T(P);
const double lnM = std::log(5.0);

TrajectoryRecord rec(std::uint64_t n, std::optional<double> log_norm, std::optional<int> band = {}) {
  TrajectoryRecord r;
  r.step = n;
  r.log_norm = log_norm;
  r.band_k = log_norm ? (band ? band : band_index(*log_norm, P)) : std::nullopt;
  return r;
}

}  // namespace

TEST_CASE("iterate") {
  const auto z = iterate(T, SparseVec{}, 100);
  REQUIRE(z.size() == 1);
  CHECK(z[0].is_zero());

  const auto e1 = iterate(T, SparseVec::basis(1, LogScalar::one()), 1);
  REQUIRE(e1.size() == 2);
  CHECK(*e1[0].log_norm == 0.0);
  CHECK(std::exp(*e1[1].log_norm) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(e1[1].support_min == 2);
  CHECK_FALSE(e1[0].band_k.has_value());

  const auto one = iterate(T, SparseVec::basis(3, LogScalar::positive(-20)), 0);
  CHECK(one.size() == 1);

  // sink and vector forms agree, and the run ends at the first zero
  const auto x0 = SparseVec::basis(1, LogScalar::positive(-257 * lnM));
  std::vector<TrajectoryRecord> streamed;
  const auto last = iterate(T, x0, 50000, [&](const TrajectoryRecord& r) { streamed.push_back(r); });
  const auto stored = iterate(T, x0, 50000);
  REQUIRE(streamed.size() == stored.size());
  CHECK(last.is_zero());
  CHECK(stored.back().is_zero());
  for (std::size_t i = 0; i + 1 < stored.size(); ++i) CHECK_FALSE(stored[i].is_zero());
}

TEST_CASE("stability_index") {
  CHECK(stability_index(-257 * lnM, P) == 7);
  CHECK(stability_index(P.threshold(3), P) == 1);
  CHECK(stability_index(P.threshold(2) - 1e-9, P) == 1);
  CHECK_FALSE(stability_index(P.threshold(2), P).has_value());
  CHECK_FALSE(stability_index(1.0, P).has_value());
}

TEST_CASE("check_stability") {
  const auto traj = iterate(T, SparseVec::basis(1, LogScalar::positive(-257 * lnM)), 20000);
  const auto r = check_stability(traj, 7, P);
  CHECK(r.passed());
  CHECK(*r.metric("band_bound") == P.threshold(7));
  CHECK(*r.metric("max_log_norm") < -128 * lnM);

  CHECK(check_stability(iterate(T, SparseVec{}, 10), 3, P).passed());
  CHECK(check_stability(traj, 8, P).status == Status::not_applicable);
  CHECK_THROWS_AS(check_stability(traj, 0, P), std::invalid_argument);

  const std::vector bad = {rec(0, -300 * lnM), rec(1, -200 * lnM), rec(2, -100 * lnM)};
  const auto f = check_stability(bad, 7, P);
  CHECK(f.failed());
  REQUIRE(f.witness.has_value());
  CHECK(f.witness->at == 2);

  // the quarter-power bound alone
  const std::vector q = {rec(0, -300 * lnM), rec(1, -74 * lnM)};
  const auto fq = check_stability(q, 5, P);
  CHECK(fq.failed());
  CHECK(fq.witness->what.find("1/4") != std::string::npos);
}

TEST_CASE("check_growth_cap") {
  const std::vector ok = {rec(0, -10.0), rec(1, -10.0 + lnM), rec(2, -20.0), rec(3, std::nullopt)};
  CHECK(check_growth_cap(ok, P).passed());
  const std::vector jump = {rec(0, -10.0), rec(1, -10.0 + lnM + 1e-9)};
  const auto f = check_growth_cap(jump, P);
  CHECK(f.failed());
  CHECK(f.witness->at == 1);
  const std::vector revive = {rec(0, std::nullopt), rec(1, -3.0)};
  CHECK(check_growth_cap(revive, P).failed());
}

TEST_CASE("check_exponential") {
  const std::vector far = {rec(0, -2 * lnM)};
  CHECK(check_exponential(far, P).status == Status::not_applicable);
  CHECK(check_exponential(iterate(T, SparseVec{}, 3), P).passed());

  const double l0 = -64 * lnM;
  const std::vector ok = {rec(0, l0), rec(1, l0 / 8 - 0.5 * lnM), rec(2, std::nullopt)};
  CHECK(check_exponential(ok, P).passed());
  const std::vector bad = {rec(0, l0), rec(1, l0 / 8 - 0.5 * lnM + 2e-6)};
  const auto f = check_exponential(bad, P);
  CHECK(f.failed());
  CHECK(f.witness->at == 1);
}

TEST_CASE("blockwise majorant") {
  for (int k = 0; k <= 10; ++k) {
    // blocks built by hand: 2^k steps at 2^k, 2^(k+1) steps at 2^(k+1), ...
    std::vector<double> a;
    for (int j = 0; a.size() < 5000; ++j)
      for (std::uint64_t i = 0; i < (std::uint64_t{1} << (k + j)); ++i) a.push_back(std::ldexp(1.0, k + j));
    for (std::uint64_t n = 0; n < 5000; ++n) {
      CHECK(blockwise_exponent(n, k) == a[n]);
      // a_n >= (n + 2^k)/2 + 1/2 with steps counted from 0, equality at block ends
      CHECK(a[n] - (double(n) + std::ldexp(1.0, k)) / 2 >= 0.5);
      if (n + 1 < a.size() && a[n + 1] != a[n]) CHECK(a[n] - (double(n) + std::ldexp(1.0, k)) / 2 == 0.5);
    }
  }
  for (int k = 1; k <= 12; ++k) {
    const auto maj = blockwise_majorant(k, 20000, P);
    CHECK(maj.size() == 20000);
    CHECK(check_exponential(maj, P, P.threshold(k + 2)).passed());
  }
}

TEST_CASE("band dwell and exits") {
  // band 3 for 8 steps then zero is allowed; 8 steps then anything else is not
  std::vector<TrajectoryRecord> t;
  for (int n = 0; n < 8; ++n) t.push_back(rec(n, -10 * lnM - 0.01 * n));
  auto z = t;
  z.push_back(rec(8, std::nullopt));
  CHECK(check_band_dwell(z, P).passed());
  auto s = t;
  s.push_back(rec(8, -17 * lnM));
  CHECK(check_band_dwell(s, P).failed());
  auto shorter = std::vector(t.begin(), t.end() - 1);
  shorter.push_back(rec(7, -17 * lnM));
  CHECK(check_band_dwell(shorter, P).passed());
  auto same = t;
  same.push_back(rec(8, -10.5 * lnM));
  CHECK(check_band_dwell(same, P).failed());

  // exits: from index 2 (norm in [M^-16, M^-8)) the norm must drop below M^-16 within 4 steps
  std::vector<TrajectoryRecord> e = {rec(0, -10 * lnM), rec(1, -12 * lnM), rec(2, -17 * lnM),
                                     rec(3, -40 * lnM), rec(4, std::nullopt)};
  const auto ok = check_band_exits(e, P);
  CHECK(ok.passed());
  CHECK(*ok.metric("descents") == 3);
  std::vector<TrajectoryRecord> slow;
  for (int n = 0; n < 6; ++n) slow.push_back(rec(n, -10 * lnM));
  CHECK(check_band_exits(slow, P).failed());
  CHECK(check_band_exits(std::vector{rec(0, -lnM)}, P).status == Status::not_applicable);
}

TEST_CASE("trajectory certificates on random orbits") {
  std::mt19937_64 rng(51);
  for (int band = 3; band <= 9; ++band) {
    for (int i = 0; i < 3; ++i) {
      const auto x0 = random_initial_vector(rng, band, P);
      CHECK(band_index(x0.norm().log_mag, P) == band);
      CHECK(x0.support_size() <= 16);
      CHECK(x0.support_max() <= 64);
      const auto traj = iterate(T, x0, 20000);
      CHECK(check_stability(traj, band - 1, P).passed());
      CHECK(check_exponential(traj, P).passed());
      CHECK(check_growth_cap(traj, P).passed());
      CHECK(check_band_dwell(traj, P).passed());
      CHECK(check_band_exits(traj, P).passed());
    }
  }
}

TEST_CASE("check_ratio_band") {
  const auto r = check_ratio_band(T, 3, -10 * lnM, 50, 1);
  CHECK(r.passed());
  CHECK(std::exp(*r.metric("log_eps_k")) == doctest::Approx(5.0 / 9).epsilon(1e-14));
  CHECK(*r.metric("canonical_rel_error") <= 1e-12);
  CHECK(check_ratio_band(T, 10, 0.5 * (P.threshold(10) + P.threshold(11)), 200, 2).passed());
  CHECK(check_ratio_band(T, 30, 0.5 * (P.threshold(30) + P.threshold(31)), 50, 3).passed());
  CHECK_THROWS_AS(check_ratio_band(T, 2, -5 * lnM, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(check_ratio_band(T, 3, -7 * lnM, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(check_ratio_band(T, 3, P.threshold(3), 1, 1), std::invalid_argument);
}

TEST_CASE("check_loglog_bound") {
  // k0 = 23 from a 50-digit evaluation of both sides at the band midpoints
  const auto r = check_loglog_bound(T, 1.2, 1.8, 3, 40);
  CHECK(r.passed());
  CHECK(*r.metric("k0") == 23);
  CHECK(*check_loglog_bound(T, 1.2, 1.8, 10, 40).metric("k0") == 23);
  CHECK(check_loglog_bound(T, 1.2, 1.8, 3, 20).failed());
  CHECK_THROWS_AS(check_loglog_bound(T, 1.585, 1.585, 3, 40), std::invalid_argument);
  CHECK_THROWS_AS(check_loglog_bound(T, 2.0, 2.5, 3, 40), std::invalid_argument);
  CHECK_THROWS_AS(check_loglog_bound(T, 1.2, 1.8, 2, 40), std::invalid_argument);
}

TEST_CASE("derivative certificates") {
  const auto fd = fd_derivative_check(T, FdSpec{});
  CHECK(fd.passed());
  CHECK(*fd.metric("points") == 20);

  const auto dn = check_dn_bounds(T, 3, 12, 16, 7);
  CHECK(dn.passed());
  CHECK_THROWS_AS(check_dn_bounds(T, 2, 12, 16, 7), std::invalid_argument);

  for (int k = 3; k <= 30; ++k) {
    std::mt19937_64 rng(k);
    const double log_t = 0.5 * (P.threshold(k) + P.threshold(k + 1));
    const auto cap = dn_norm_cap(log_t, P);
    CHECK(cap.log_mag <= std::log(12.0) + epsilon(static_cast<std::uint64_t>(k - 2), P).log_mag);
    const auto x = SparseVec::basis(Index{1} << (k - 3), LogScalar::positive(log_t));
    CHECK(compare(dn_norm_estimate(T, x, 8, rng), cap) <= 0);
  }
  std::mt19937_64 rng(1);
  CHECK(dn_norm_estimate(T, SparseVec{}, 4, rng).is_zero());
}

TEST_CASE("linear part") {
  const auto lin = linear_instability_demo(P, 12);
  CHECK(lin.passed());
  CHECK(*lin.metric("root_p2") == doctest::Approx(3.4668063717531733).epsilon(1e-13));
  CHECK(*lin.metric("root_p12") == doctest::Approx(1.6720409407146404).epsilon(1e-12));
  CHECK_THROWS_AS(linear_instability_demo(P, 2), std::invalid_argument);

  CHECK(check_spectral_radius(P, 40, 1e-9).passed());
  CHECK(check_spectral_radius(P, 20, 1e-9).failed());
  CHECK(check_norm_identities(P, 6, 1e-12).passed());
  CHECK(check_nilpotency(P, 8, 512).passed());
}

TEST_CASE("merge_reports") {
  CertificateReport a{"x", Status::pass, 0.1, {}, {}, ""};
  CertificateReport b{"x", Status::not_applicable, 0.1, {}, {}, "n/a"};
  CertificateReport c{"x", Status::fail, 0.1, Witness{5, "boom", {}}, {}, ""};
  std::vector all_ok{a, b};
  CHECK(merge_reports("m", all_ok).passed());
  std::vector na{b, b};
  CHECK(merge_reports("m", na).status == Status::not_applicable);
  std::vector mixed{a, c, b};
  const auto m = merge_reports("m", mixed);
  CHECK(m.failed());
  CHECK(m.witness->at == 5);
  CHECK(*m.metric("failing_item") == 1);
  CHECK(std::string(to_string(Status::not_applicable)) == "not_applicable");
}
