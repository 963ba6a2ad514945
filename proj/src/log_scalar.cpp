#include "kakutani/log_scalar.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace kakutani {

namespace {

std::atomic<std::uint64_t> g_cancellations{0};

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

LogScalar LogScalar::from_log(int sign, double log_mag) {
  if (sign == 0) return zero();
  if (!std::isfinite(log_mag)) {
    if (log_mag == -HUGE_VAL) return zero();
    throw std::domain_error("LogScalar: non-finite log magnitude");
  }
  return {sign > 0 ? 1 : -1, log_mag};
}

LogScalar LogScalar::from_real(double value) {
  if (std::isnan(value) || std::isinf(value))
    throw std::domain_error("LogScalar: non-finite real value");
  if (value == 0.0) return zero();
  return {sign_of(value), std::log(std::fabs(value))};
}

double LogScalar::to_real() const {
  if (sign == 0) return 0.0;
  return sign * std::exp(log_mag);
}

bool identical(LogScalar a, LogScalar b) {
  if (a.sign != b.sign) return false;
  return a.sign == 0 || a.log_mag == b.log_mag;
}

LogScalar mul(LogScalar a, LogScalar b) {
  if (a.sign == 0 || b.sign == 0) return LogScalar::zero();
  return {a.sign * b.sign, a.log_mag + b.log_mag};
}

LogScalar div(LogScalar a, LogScalar b) {
  if (b.sign == 0) throw std::domain_error("LogScalar: division by zero");
  if (a.sign == 0) return LogScalar::zero();
  return {a.sign * b.sign, a.log_mag - b.log_mag};
}

LogScalar add(LogScalar a, LogScalar b) {
  if (a.sign == 0) return b;
  if (b.sign == 0) return a;
  const LogScalar& hi = a.log_mag >= b.log_mag ? a : b;
  const LogScalar& lo = a.log_mag >= b.log_mag ? b : a;
  const double delta = lo.log_mag - hi.log_mag;  // <= 0
  if (hi.sign == lo.sign) return {hi.sign, hi.log_mag + std::log1p(std::exp(delta))};

  if (hi.log_mag == lo.log_mag) return LogScalar::zero();
  if (std::nextafter(lo.log_mag, hi.log_mag) == hi.log_mag)
    g_cancellations.fetch_add(1, std::memory_order_relaxed);
  // -expm1 keeps 1 - e^delta exact-ish when delta is a few ulps from zero
  return {hi.sign, hi.log_mag + std::log(-std::expm1(delta))};
}

LogScalar pow_abs(LogScalar a, double exponent) {
  if (a.sign == 0) {
    if (exponent > 0.0) return LogScalar::zero();
    throw std::domain_error("LogScalar: non-positive power of zero");
  }
  return {1, a.log_mag * exponent};
}

int compare(LogScalar a, LogScalar b) {
  if (a.sign != b.sign) return a.sign < b.sign ? -1 : 1;
  if (a.sign == 0 || a.log_mag == b.log_mag) return 0;
  const int by_mag = a.log_mag < b.log_mag ? -1 : 1;
  return a.sign > 0 ? by_mag : -by_mag;
}

int compare_magnitude(LogScalar a, LogScalar b) { return compare(a.abs(), b.abs()); }

LogScalar log_sum_exp_sq(std::span<const LogScalar> terms) {
  std::vector<double> mags;
  mags.reserve(terms.size());
  for (const auto& t : terms)
    if (t.sign != 0) mags.push_back(t.log_mag);
  if (mags.empty()) return LogScalar::zero();
  if (mags.size() == 1) return LogScalar::positive(mags.front());

  std::sort(mags.begin(), mags.end(), std::greater<>());
  const double top = mags.front();
  double rest = 0.0;
  for (std::size_t i = 1; i < mags.size(); ++i) rest += std::exp(2.0 * (mags[i] - top));
  return LogScalar::positive(top + 0.5 * std::log1p(rest));
}

std::uint64_t cancellation_events() { return g_cancellations.load(std::memory_order_relaxed); }
void reset_cancellation_events() { g_cancellations.store(0, std::memory_order_relaxed); }

std::string to_string(LogScalar a) {
  if (a.sign == 0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%cexp(%.17g)", a.sign > 0 ? '+' : '-', a.log_mag);
  return buf;
}

}  // namespace kakutani
