#include "kakutani/sparse_vec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

namespace kakutani {

namespace {

LogScalar norm_of(std::span<const SparseVec::Entry> entries) {
  std::vector<LogScalar> terms;
  terms.reserve(entries.size());
  for (const auto& e : entries) terms.push_back(e.value);
  return log_sum_exp_sq(terms);
}

auto index_less = [](const SparseVec::Entry& e, Index i) { return e.index < i; };

}  // namespace

SparseVec SparseVec::basis(Index i, LogScalar c) {
  if (i == 0) throw std::invalid_argument("basis: index must be >= 1");
  SparseVec v;
  if (!c.is_zero()) {
    v.entries_.push_back({i, c});
    v.norm_ = c.abs();
  }
  return v;
}

SparseVec SparseVec::from_entries(std::vector<Entry> entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.index < b.index; });
  SparseVec v;
  for (const auto& e : entries) {
    if (e.index == 0) throw std::invalid_argument("SparseVec: index must be >= 1");
    if (!v.entries_.empty() && v.entries_.back().index == e.index)
      v.entries_.back().value = add(v.entries_.back().value, e.value);
    else
      v.entries_.push_back(e);
  }
  std::erase_if(v.entries_, [](const Entry& e) { return e.value.is_zero(); });
  v.norm_ = norm_of(v.entries_);
  return v;
}

LogScalar SparseVec::at(Index i) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), i, index_less);
  return (it != entries_.end() && it->index == i) ? it->value : LogScalar::zero();
}

void SparseVec::set(Index i, LogScalar value) {
  if (i == 0) throw std::invalid_argument("SparseVec: index must be >= 1");
  norm_.reset();
  auto it = std::lower_bound(entries_.begin(), entries_.end(), i, index_less);
  const bool present = it != entries_.end() && it->index == i;
  if (value.is_zero()) {
    if (present) entries_.erase(it);
  } else if (present) {
    it->value = value;
  } else {
    entries_.insert(it, {i, value});
  }
}

LogScalar SparseVec::norm() const { return norm_ ? *norm_ : norm_of(entries_); }

void SparseVec::refresh_norm() { norm_ = norm_of(entries_); }

void SparseVecBuilder::push(Index i, LogScalar value) {
  if (i == 0) throw std::invalid_argument("SparseVec: index must be >= 1");
  if (!entries_.empty() && entries_.back().index >= i)
    throw std::logic_error("SparseVecBuilder: indices must be strictly increasing");
  if (!value.is_zero()) entries_.push_back({i, value});
}

SparseVec SparseVecBuilder::build() && {
  SparseVec v;
  v.entries_ = std::move(entries_);
  v.norm_ = norm_of(v.entries_);
  return v;
}

LogScalar norm(const SparseVec& x) { return x.norm(); }

SparseVec scale(LogScalar c, const SparseVec& x) {
  SparseVecBuilder b;
  if (c.is_zero()) return std::move(b).build();
  b.reserve(x.support_size());
  for (const auto& e : x.entries()) b.push(e.index, mul(c, e.value));
  return std::move(b).build();
}

SparseVec axpy(LogScalar a, const SparseVec& x, const SparseVec& y) {
  SparseVecBuilder b;
  b.reserve(x.support_size() + y.support_size());
  auto xs = x.entries();
  auto ys = y.entries();
  std::size_t i = 0, j = 0;
  while (i < xs.size() || j < ys.size()) {
    if (j == ys.size() || (i < xs.size() && xs[i].index < ys[j].index)) {
      b.push(xs[i].index, mul(a, xs[i].value));
      ++i;
    } else if (i == xs.size() || ys[j].index < xs[i].index) {
      b.push(ys[j].index, ys[j].value);
      ++j;
    } else {
      b.push(xs[i].index, add(mul(a, xs[i].value), ys[j].value));
      ++i;
      ++j;
    }
  }
  return std::move(b).build();
}

LogScalar inner(const SparseVec& x, const SparseVec& y) {
  std::vector<LogScalar> products;
  auto xs = x.entries();
  auto ys = y.entries();
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    if (xs[i].index < ys[j].index) {
      ++i;
    } else if (ys[j].index < xs[i].index) {
      ++j;
    } else {
      products.push_back(mul(xs[i].value, ys[j].value));
      ++i;
      ++j;
    }
  }
  std::sort(products.begin(), products.end(),
            [](LogScalar a, LogScalar b) { return a.log_mag > b.log_mag; });
  LogScalar sum = LogScalar::zero();
  for (const auto& p : products) sum = add(sum, p);
  return sum;
}

std::string serialize(const SparseVec& x) {
  std::string out;
  char buf[96];
  for (const auto& e : x.entries()) {
    std::snprintf(buf, sizeof buf, "%llu:%+d:%.17g\n",
                  static_cast<unsigned long long>(e.index), e.value.sign, e.value.log_mag);
    out += buf;
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

SparseVec::Entry parse_line(std::string_view line, std::size_t lineno) {
  auto fail = [&](const std::string& why) {
    return ParseError("line " + std::to_string(lineno) + ": " + why);
  };
  const auto c1 = line.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : line.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw fail("expected index:sign:log_mag");

  const auto idx_tok = trim(line.substr(0, c1));
  const auto sign_tok = trim(line.substr(c1 + 1, c2 - c1 - 1));
  const auto mag_tok = std::string(trim(line.substr(c2 + 1)));

  Index index = 0;
  auto [p, ec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), index);
  if (ec != std::errc{} || p != idx_tok.data() + idx_tok.size() || index == 0)
    throw fail("index must be a positive integer");

  int sign;
  if (sign_tok == "+1" || sign_tok == "1" || sign_tok == "+")
    sign = 1;
  else if (sign_tok == "-1" || sign_tok == "-")
    sign = -1;
  else if (sign_tok == "0")
    sign = 0;
  else
    throw fail("sign must be +1, -1 or 0");

  std::size_t used = 0;
  double mag = 0.0;
  try {
    mag = std::stod(mag_tok, &used);
  } catch (const std::exception&) {
    throw fail("log_mag is not a number");
  }
  if (used != mag_tok.size() || !std::isfinite(mag)) throw fail("log_mag must be finite");
  return {index, sign == 0 ? LogScalar::zero() : LogScalar{sign, mag}};
}

}  // namespace

SparseVec parse_sparse_vec(std::istream& in) {
  std::vector<SparseVec::Entry> entries;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    entries.push_back(parse_line(line, lineno));
  }
  return SparseVec::from_entries(std::move(entries));
}

SparseVec parse_sparse_vec(const std::string& text) {
  std::istringstream in(text);
  return parse_sparse_vec(in);
}

}  // namespace kakutani
