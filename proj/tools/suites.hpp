#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kakutani/certificates.hpp"

namespace kakutani::cli {

struct SuiteOptions {
  Params params;
  std::uint64_t seed = 7;
  std::uint64_t steps = 20000;
  double c1 = 1.2;
  double c2 = 1.8;
  bool timing = false;
};

struct SuiteResult {
  std::vector<CertificateReport> reports;
  std::vector<std::optional<double>> runtime_ms;

  bool passed() const;
};

const std::vector<std::string>& suite_names();
bool is_suite(const std::string& name);

/// Runs one named suite ("all" runs every suite, sharing trajectories).
SuiteResult run_suite(const std::string& name, const SuiteOptions& opt);

}  // namespace kakutani::cli
