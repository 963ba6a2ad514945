// Finitely supported vectors in l^2 over the Hilbert basis (e_n), n >= 1, with
// log-domain coefficients.

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kakutani/log_scalar.hpp"
#include "kakutani/weights.hpp"

namespace kakutani {

class SparseVec {
 public:
  struct Entry {
    Index index;
    LogScalar value;
  };

  SparseVec() : norm_(LogScalar::zero()) {}

  /// c * e_i. Throws on i == 0; zero c gives the zero vector.
  static SparseVec basis(Index i, LogScalar c);
  /// Sorts, merges duplicate indices by log-domain addition and prunes zeros.
  static SparseVec from_entries(std::vector<Entry> entries);

  bool is_zero() const { return entries_.empty(); }
  std::size_t support_size() const { return entries_.size(); }
  Index support_min() const { return entries_.front().index; }
  Index support_max() const { return entries_.back().index; }
  std::span<const Entry> entries() const { return entries_; }

  /// Coefficient at index i (exact zero off the support).
  LogScalar at(Index i) const;
  /// Overwrites the coefficient at i; a zero value removes the entry.
  void set(Index i, LogScalar value);

  /// l^2 norm. Served from the cache when present, recomputed otherwise.
  LogScalar norm() const;
  const std::optional<LogScalar>& cached_norm() const { return norm_; }
  void refresh_norm();

 private:
  friend class SparseVecBuilder;
  std::vector<Entry> entries_;  // strictly increasing index, no zero values
  std::optional<LogScalar> norm_;
};

/// Appends entries in strictly increasing index order; zeros are dropped.
class SparseVecBuilder {
 public:
  void reserve(std::size_t n) { entries_.reserve(n); }
  void push(Index i, LogScalar value);
  SparseVec build() &&;

 private:
  std::vector<SparseVec::Entry> entries_;
};

LogScalar norm(const SparseVec& x);
SparseVec scale(LogScalar c, const SparseVec& x);
/// a*x + y
SparseVec axpy(LogScalar a, const SparseVec& x, const SparseVec& y);
/// Signed products summed by magnitude, largest first.
LogScalar inner(const SparseVec& x, const SparseVec& y);

/// Text form: one "index:sign:log_mag" triple per line, sign being +1 or -1.
/// Blank lines and lines starting with '#' are ignored on input.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
std::string serialize(const SparseVec& x);
SparseVec parse_sparse_vec(std::istream& in);
SparseVec parse_sparse_vec(const std::string& text);

}  // namespace kakutani
