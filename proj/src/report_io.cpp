#include "kakutani/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "json.hpp"

namespace kakutani {

namespace {

using nlohmann::ordered_json;

ordered_json number_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

ordered_json metrics_json(const std::vector<Metric>& metrics) {
  ordered_json out = ordered_json::object();
  for (const auto& m : metrics) out[m.name] = number_or_null(m.value);
  return out;
}

ordered_json report_json(const CertificateReport& r, const Params& p, std::uint64_t seed,
                         std::optional<double> runtime_ms) {
  ordered_json j;
  j["certificate"] = r.id;
  j["params"] = {{"M", p.M()}, {"K", p.K()}};
  j["seed"] = seed;
  j["pass"] = !r.failed();
  j["status"] = to_string(r.status);
  if (r.witness) {
    j["witness"] = {{"at", r.witness->at},
                    {"what", r.witness->what},
                    {"values", metrics_json(r.witness->values)}};
  } else {
    j["witness"] = nullptr;
  }
  j["tolerance"] = number_or_null(r.tolerance);
  j["runtime_ms"] = runtime_ms ? ordered_json(*runtime_ms) : ordered_json(nullptr);
  j["metrics"] = metrics_json(r.metrics);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

}  // namespace

std::string reports_to_json(const std::string& suite, std::span<const CertificateReport> reports,
                            const Params& p, std::uint64_t seed,
                            std::span<const std::optional<double>> runtime_ms) {
  std::vector<std::size_t> order(reports.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return reports[a].id < reports[b].id; });

  ordered_json doc;
  doc["suite"] = suite;
  doc["pass"] = std::none_of(reports.begin(), reports.end(),
                             [](const CertificateReport& r) { return r.failed(); });
  doc["certificates"] = ordered_json::array();
  for (const auto i : order) {
    const auto t = i < runtime_ms.size() ? runtime_ms[i] : std::nullopt;
    doc["certificates"].push_back(report_json(reports[i], p, seed, t));
  }
  return doc.dump(2) + "\n";
}

std::string format_number(std::optional<double> v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

TrajectoryCsvWriter::TrajectoryCsvWriter(std::ostream& out, const Params& p)
    : out_(out), params_(p) {}

void TrajectoryCsvWriter::header() {
  out_ << "n,log10_norm,support_min,support_max,band_k,bound_32_log10,bound_38_log10\n";
}

void TrajectoryCsvWriter::row(const TrajectoryRecord& rec) {
  if (first_) {
    first_ = false;
    if (rec.log_norm && *rec.log_norm < params_.threshold(2)) log_x0_ = rec.log_norm;
  }
  const double ln10 = std::log(10.0);
  std::optional<double> quarter, decay;
  if (log_x0_) {
    quarter = *log_x0_ / 4.0 / ln10;
    decay = (-0.5 * static_cast<double>(rec.step) * params_.log_M() + *log_x0_ / 8.0) / ln10;
  }
  auto index = [](std::optional<Index> i) { return i ? std::to_string(*i) : std::string("NA"); };

  out_ << rec.step << ',';
  if (rec.is_zero())
    out_ << "ZERO";
  else
    out_ << format_number(*rec.log_norm / ln10);
  out_ << ',' << index(rec.support_min) << ',' << index(rec.support_max) << ','
       << (rec.band_k ? std::to_string(*rec.band_k) : std::string("NA")) << ','
       << format_number(quarter) << ',' << format_number(decay) << '\n';
}

}  // namespace kakutani
