#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "kakutani/shift.hpp"
#include "oracles.hpp"

using namespace kakutani;

namespace {

const Params P;
const ShiftSpec W = ShiftSpec::from_profile(WeightProfile::full(P));

ShiftSpec complement(std::uint64_t m, const Params& p = P) {
  return ShiftSpec::from_profile(WeightProfile::complement(p, m));
}

std::vector<double> log_weights(const ShiftSpec& op, std::size_t last) {
  std::vector<double> w(last + 1, -INFINITY);
  for (Index n = 1; n <= last; ++n) {
    const auto v = op.weight(n);
    w[n] = v.is_zero() ? -INFINITY : v.log_mag;
  }
  return w;
}

}  // namespace

TEST_CASE("apply") {
  const auto y = apply(W, SparseVec::basis(1, LogScalar::one()));
  CHECK(y.support_size() == 1);
  CHECK(y.at(2).to_real() == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(apply(complement(1), SparseVec::basis(1, LogScalar::one())).is_zero());
  CHECK(apply(W, SparseVec{}).is_zero());
}

TEST_CASE("apply: support moves by one and masked positions vanish") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 300; ++i) {
    std::vector<SparseVec::Entry> e;
    for (int j = 0; j < 12; ++j) e.push_back({1 + rng() % 100, LogScalar::positive(-double(rng() % 50))});
    const auto x = SparseVec::from_entries(e);
    const auto m = 1 + rng() % 4;
    const auto y = apply(complement(m), x);
    std::size_t expected = 0;
    for (const auto& en : x.entries()) {
      if (lm_hits(m, en.index)) {
        CHECK(y.at(en.index + 1).is_zero());
      } else {
        ++expected;
        CHECK(identical(y.at(en.index + 1), mul(alpha(en.index, P), en.value)));
      }
    }
    CHECK(y.support_size() == expected);
  }
}

TEST_CASE("op_norm_power") {
  CHECK(op_norm_power(W, 1, 64).to_real() == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(op_norm_power(W, 3, 1000).to_real() == doctest::Approx(125.0 / 3).epsilon(1e-14));
  for (std::uint64_t m = 1; m <= 8; ++m) {
    const std::uint64_t k = std::uint64_t{1} << m;
    CHECK(op_norm_power(complement(m), k, 4 * k).is_zero());
    CHECK_FALSE(op_norm_power(complement(m), k - 1, 4 * k).is_zero());
  }
  CHECK_THROWS_AS(op_norm_power(W, 5, 4), std::invalid_argument);
  CHECK_THROWS_AS(op_norm_power(W, 0, 4), std::invalid_argument);
}

TEST_CASE("op_norm_power: sliding window against recomputed windows") {
  std::mt19937_64 rng(22);
  const std::vector<ShiftSpec> ops = {W, complement(1), complement(3),
                                      ShiftSpec::from_profile(WeightProfile::single_level(P, 2)),
                                      ShiftSpec::from_profile(WeightProfile::full(Params(7, 2)))};
  for (int i = 0; i < 200; ++i) {
    const auto& op = ops[rng() % ops.size()];
    const std::size_t k = 1 + rng() % 40;
    const std::size_t horizon = k + rng() % 300;
    const auto lw = log_weights(op, horizon + k);
    const double ref = oracle::brute_window_max(lw, k, horizon);
    const auto got = op_norm_power(op, k, horizon);
    if (std::isinf(ref)) {
      CHECK(got.is_zero());
    } else {
      REQUIRE_FALSE(got.is_zero());
      CHECK(got.log_mag == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("wn_norm_closed") {
  CHECK(wn_norm_closed(1, P).to_real() == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(wn_norm_closed(2, P).to_real() == doctest::Approx(125.0 / 3).epsilon(1e-14));
  CHECK_THROWS_AS(wn_norm_closed(0, P), std::invalid_argument);
  for (int p = 1; p <= 6; ++p) {
    const std::uint64_t n = (std::uint64_t{1} << p) - 1;
    const double closed = wn_norm_closed(p, P).log_mag;
    const double windowed = op_norm_power(W, n, 512).log_mag;
    CHECK(std::fabs(closed - windowed) <= 1e-12 * std::fabs(closed));
  }
}

TEST_CASE("norm of W^n is the prefix product") {
  for (const Params q : {P, Params(7, 2), Params(2, 1.5)}) {
    const auto op = ShiftSpec::from_profile(WeightProfile::full(q));
    const auto lw = log_weights(op, 4096 + 64);
    double prefix = 0;
    for (std::uint64_t n = 1; n <= 64; ++n) {
      prefix += lw[n];
      const double windowed = op_norm_power(op, n, 4096).log_mag;
      CHECK(windowed == doctest::Approx(prefix).epsilon(1e-12));
      CHECK(windowed == doctest::Approx(oracle::brute_window_max(lw, n, 4096)).epsilon(1e-12));
    }
  }
}

TEST_CASE("norms of the truncations") {
  const double w = op_norm_power(W, 1, 1 << 21).log_mag;
  for (std::uint64_t m = 1; m <= 20; ++m) {
    const std::uint64_t period = std::uint64_t{1} << m;
    CHECK(op_norm_power(complement(m), 1, 2 * period).log_mag <= w);
    const auto lm = ShiftSpec::from_profile(WeightProfile::single_level(P, m));
    CHECK(identical(op_norm_power(lm, 1, 2 * period), epsilon(m, P)));
  }
}

TEST_CASE("rho_estimate") {
  CHECK(rho_estimate(1, P) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(rho_estimate(2, P) == doctest::Approx(3.4668063717531733).epsilon(1e-14));
  CHECK(std::fabs(rho_estimate(40, P) - 5.0 / 3) <= 1e-9);
  // 50-digit reference: rho(40) - 5/3 = 6.6612137057809470e-11
  CHECK(std::fabs(rho_estimate(40, P) - 5.0 / 3 - 6.6612137057809470e-11) <= 1e-15);
  CHECK_THROWS_AS(rho_estimate(0, P), std::invalid_argument);

  for (const Params q : {P, Params(7, 2), Params(1.5, 1.2)}) {
    double prev = INFINITY;
    for (int p = 1; p <= 50; ++p) {
      // direct sum in extended precision
      long double series = 0;
      for (int j = 1; j <= p; ++j)
        series += (logl(q.M()) - (j - 1) * logl(q.K())) / ldexpl(1.0L, j);
      const long double two_p = ldexpl(1.0L, p);
      const double direct = static_cast<double>(two_p / (two_p - 1) * series);
      CHECK(log_rho_estimate(p, q) == doctest::Approx(direct).epsilon(1e-13));

      // the gap to ln(M/K) is exactly p ln K / (2^p - 1)
      const double gap = log_rho_estimate(p, q) - std::log(q.M() / q.K());
      const double exact = p * q.log_K() / std::expm1(p * std::log(2.0));
      CHECK(std::fabs(gap - exact) <= 1e-14);

      const double r = rho_estimate(p, q);
      CHECK(r <= prev);
      prev = r;
    }
  }
}

TEST_CASE("verify_nilpotent_set") {
  const std::vector<ShiftSpec> two(2, complement(1));
  CHECK(verify_nilpotent_set(two, 1, 1, 64).annihilates);

  // 8 different members of Omega_3: zero on the level-3 mask, arbitrary elsewhere
  std::vector<ShiftSpec> mixed;
  for (int j = 0; j < 8; ++j) {
    mixed.push_back({[j](Index n) {
                       if (lm_hits(3, n)) return LogScalar::zero();
                       return LogScalar{(n + j) % 3 ? 1 : -1, std::sin(double(n * (j + 1)))};
                     },
                     "mixed" + std::to_string(j)});
  }
  CHECK(verify_nilpotent_set(mixed, 3, 1, 64).annihilates);

  for (int k = 1; k <= 8; ++k) {
    std::vector<ShiftSpec> ops((std::size_t{1} << k) - 1, complement(static_cast<std::uint64_t>(k)));
    const auto r = verify_nilpotent_set(ops, k, 1, 512);
    CHECK_FALSE(r.annihilates);
    CHECK(r.survivor.has_value());
    ops.push_back(complement(static_cast<std::uint64_t>(k)));
    CHECK(verify_nilpotent_set(ops, k, 1, 512).annihilates);
  }

  std::vector<ShiftSpec> bad = {complement(2), W, complement(2), complement(2)};
  try {
    verify_nilpotent_set(bad, 2, 1, 64);
    FAIL("expected a certification error");
  } catch (const OmegaCertificationError& e) {
    CHECK(e.op_index() == 1);
  }
  CHECK_THROWS_AS(verify_nilpotent_set(two, 1, 0, 64), std::invalid_argument);
}
