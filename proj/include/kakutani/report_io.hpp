// Machine-readable output: certificate reports as JSON, trajectories as CSV.

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>

#include "kakutani/certificates.hpp"

namespace kakutani {

/// One JSON document:
///   {"suite", "pass", "certificates": [{certificate, params, seed, pass, status,
///     witness, tolerance, runtime_ms, metrics, note}, ...]}
/// Certificates are sorted by id. runtime_ms is null unless given, so that
/// equal inputs give byte-identical output.
std::string reports_to_json(const std::string& suite, std::span<const CertificateReport> reports,
                            const Params& p, std::uint64_t seed,
                            std::span<const std::optional<double>> runtime_ms = {});

/// Columns: n, log10_norm, support_min, support_max, band_k, bound_32_log10,
/// bound_38_log10. Zero states print ZERO; missing values print NA. The two
/// bound columns are ||x_0||^(1/4) and M^(-n/2) ||x_0||^(1/8), only where
/// ||x_0|| < M^-4.
class TrajectoryCsvWriter {
 public:
  TrajectoryCsvWriter(std::ostream& out, const Params& p);

  void header();
  void row(const TrajectoryRecord& rec);

 private:
  std::ostream& out_;
  Params params_;
  std::optional<double> log_x0_;
  bool first_ = true;
};

/// %.17g, or NA for a missing value.
std::string format_number(std::optional<double> v);

}  // namespace kakutani
