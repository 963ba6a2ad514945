#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "kakutani/report_io.hpp"

using namespace kakutani;
using nlohmann::json;

namespace {

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

std::vector<CertificateReport> sample_reports() {
  CertificateReport b{"b_check", Status::fail, 1e-6, Witness{12, "too big", {{"log_norm", -3.5}}},
                      {{"worst", std::numeric_limits<double>::infinity()}}, ""};
  CertificateReport a{"a_check", Status::pass, 0.0, {}, {{"count", 4}}, "fine"};
  CertificateReport c{"c_check", Status::not_applicable, 0.0, {}, {}, "no hypotheses"};
  return {b, a, c};
}

}  // namespace

TEST_CASE("report json schema") {
  const auto reports = sample_reports();
  const auto doc = json::parse(reports_to_json("unit", reports, Params{}, 42));
  CHECK(doc["suite"] == "unit");
  CHECK(doc["pass"] == false);
  const auto& certs = doc["certificates"];
  REQUIRE(certs.size() == 3);
  CHECK(certs[0]["certificate"] == "a_check");
  CHECK(certs[1]["certificate"] == "b_check");
  CHECK(certs[2]["certificate"] == "c_check");
  for (const auto& c : certs) {
    for (const char* key : {"certificate", "params", "seed", "pass", "witness", "tolerance", "runtime_ms"})
      CHECK(c.contains(key));
    CHECK(c["seed"] == 42);
    CHECK(c["params"]["M"] == 5.0);
    CHECK(c["params"]["K"] == 3.0);
    CHECK(c["runtime_ms"].is_null());
  }
  CHECK(certs[0]["pass"] == true);
  CHECK(certs[0]["witness"].is_null());
  CHECK(certs[0]["note"] == "fine");
  CHECK(certs[1]["pass"] == false);
  CHECK(certs[1]["witness"]["at"] == 12);
  CHECK(certs[1]["witness"]["what"] == "too big");
  CHECK(certs[1]["metrics"]["worst"].is_null());
  CHECK(certs[2]["status"] == "not_applicable");
  CHECK(certs[2]["pass"] == true);
  CHECK_FALSE(certs[1].contains("note"));
}

TEST_CASE("report json is deterministic and takes runtimes") {
  auto r1 = sample_reports();
  auto r2 = sample_reports();
  std::swap(r2[0], r2[2]);
  CHECK(reports_to_json("s", r1, Params{}, 1) == reports_to_json("s", r1, Params{}, 1));
  CHECK(reports_to_json("s", r1, Params{}, 1) == reports_to_json("s", r2, Params{}, 1));

  const std::vector<std::optional<double>> t = {2.5, std::nullopt, 0.25};
  const auto doc = json::parse(reports_to_json("s", r1, Params{}, 1, t));
  CHECK(doc["certificates"][1]["runtime_ms"] == 2.5);  // b_check
  CHECK(doc["certificates"][0]["runtime_ms"].is_null());
  CHECK(doc["certificates"][2]["runtime_ms"] == 0.25);

  std::vector<CertificateReport> ok = {r1[1]};
  CHECK(json::parse(reports_to_json("s", ok, Params{}, 1))["pass"] == true);
}

TEST_CASE("trajectory csv") {
  const Params P;
  const StabilizedMap T(P);
  const double lnM = std::log(5.0);
  std::ostringstream out;
  TrajectoryCsvWriter w(out, P);
  w.header();
  const auto traj = iterate(T, SparseVec::basis(1, LogScalar::positive(-257 * lnM)), 20000);
  for (const auto& r : traj) w.row(r);

  const auto ls = lines(out.str());
  REQUIRE(ls.size() == traj.size() + 1);
  CHECK(ls[0] == "n,log10_norm,support_min,support_max,band_k,bound_32_log10,bound_38_log10");
  const auto r0 = fields(ls[1]);
  REQUIRE(r0.size() == 7);
  CHECK(r0[0] == "0");
  CHECK(std::stod(r0[1]) == doctest::Approx(-257 * std::log10(5.0)).epsilon(1e-14));
  CHECK(r0[2] == "1");
  CHECK(r0[3] == "1");
  CHECK(r0[4] == "8");
  CHECK(std::stod(r0[5]) == doctest::Approx(-257 * std::log10(5.0) / 4).epsilon(1e-14));
  CHECK(std::stod(r0[6]) == doctest::Approx(-257 * std::log10(5.0) / 8).epsilon(1e-14));

  const auto last = fields(ls.back());
  REQUIRE(last.size() == 7);
  CHECK(last[1] == "ZERO");
  CHECK(last[2] == "NA");
  CHECK(last[4] == "NA");
  CHECK(last[5] != "NA");

  // n on row i+1 is i; bound_38 falls by ln M / 2 per step
  for (std::size_t i = 1; i + 1 < ls.size(); ++i) {
    const auto f = fields(ls[i + 1]);
    CHECK(std::stoull(f[0]) == i);
    CHECK(std::stod(f[6]) == doctest::Approx(std::stod(r0[6]) - 0.5 * i * std::log10(5.0)).epsilon(1e-12));
  }
}

TEST_CASE("trajectory csv without decay bounds") {
  const Params P;
  std::ostringstream out;
  TrajectoryCsvWriter w(out, P);
  TrajectoryRecord big;
  big.log_norm = -2.0;
  big.support_min = big.support_max = 3;
  big.band_k = band_index(-2.0, P);
  w.row(big);
  const auto f = fields(lines(out.str())[0]);
  CHECK(f[4] == "0");
  CHECK(f[5] == "NA");
  CHECK(f[6] == "NA");

  std::ostringstream z;
  TrajectoryCsvWriter wz(z, P);
  wz.row(TrajectoryRecord{});
  CHECK(z.str() == "0,ZERO,NA,NA,NA,NA,NA\n");
}

TEST_CASE("format_number") {
  CHECK(format_number(std::nullopt) == "NA");
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_number(-1.0 / 3)) == -1.0 / 3);
}
