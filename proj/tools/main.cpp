// kakutani: simulate and certify the stabilized Kakutani map from the shell.
//
// Exit codes: 0 pass, 1 certificate violation, 2 usage or configuration error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "kakutani/certificates.hpp"
#include "kakutani/report_io.hpp"
#include "suites.hpp"

using namespace kakutani;

namespace {

constexpr int kPass = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  double M = 5.0;
  double K = 3.0;
  std::uint64_t seed = 7;
  std::uint64_t steps = 20000;
  std::uint64_t horizon = 64;
  std::string format;
  std::string out;
};

Params make_params(const RunConfig& cfg) {
  try {
    return Params(cfg.M, cfg.K);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw UsageError("cannot open output file " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string format_or(const RunConfig& cfg, const std::string& fallback) {
  return cfg.format.empty() ? fallback : cfg.format;
}

int cmd_weights(const RunConfig& cfg) {
  const Params p = make_params(cfg);
  if (cfg.horizon == 0) throw UsageError("--horizon must be >= 1 for weights");
  Output out(cfg.out);
  auto& os = out.stream();
  os << "n,dyadic_valuation,log_alpha,log10_alpha\n";
  for (Index n = 1; n <= cfg.horizon; ++n) {
    const double la = alpha(n, p).log_mag;
    os << n << ',' << dyadic_valuation(n) << ',' << format_number(la) << ','
       << format_number(la / std::log(10.0)) << '\n';
  }
  return kPass;
}

int cmd_spectral_radius(const RunConfig& cfg, int p_max) {
  const Params p = make_params(cfg);
  if (p_max < 1) throw UsageError("--p must be >= 1");
  const double limit = p.M() / p.K();
  Output out(cfg.out);
  auto& os = out.stream();
  const auto fmt = format_or(cfg, "csv");
  if (fmt == "csv") {
    os << "p,rho_estimate,limit,abs_error\n";
    for (int q = 1; q <= p_max; ++q) {
      const double r = rho_estimate(q, p);
      os << q << ',' << format_number(r) << ',' << format_number(limit) << ','
         << format_number(std::fabs(r - limit)) << '\n';
    }
  } else {
    os << "{\n  \"params\": {\"M\": " << format_number(p.M()) << ", \"K\": " << format_number(p.K())
       << "},\n  \"limit\": " << format_number(limit) << ",\n  \"rho_estimate\": [";
    for (int q = 1; q <= p_max; ++q) os << (q > 1 ? ", " : "") << format_number(rho_estimate(q, p));
    os << "]\n}\n";
  }
  return kPass;
}

void write_reports(const RunConfig& cfg, const std::string& suite, const cli::SuiteResult& res,
                   const Params& p) {
  Output out(cfg.out);
  auto& os = out.stream();
  if (format_or(cfg, "json") == "json") {
    os << reports_to_json(suite, res.reports, p, cfg.seed, res.runtime_ms);
    return;
  }
  os << "certificate,pass,status,tolerance\n";
  std::vector<const CertificateReport*> sorted;
  for (const auto& r : res.reports) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto a, auto b) { return a->id < b->id; });
  for (const auto* r : sorted)
    os << r->id << ',' << (r->failed() ? "false" : "true") << ',' << to_string(r->status) << ','
       << format_number(r->tolerance) << '\n';
}

int cmd_nilpotency(const RunConfig& cfg, int m_max, Index last) {
  const Params p = make_params(cfg);
  if (m_max < 1 || m_max > 20) throw UsageError("--m must be in 1..20");
  if (last < 1) throw UsageError("--last must be >= 1");
  cli::SuiteResult res;
  res.reports.push_back(check_nilpotency(p, m_max, last));
  res.runtime_ms.push_back(std::nullopt);
  write_reports(cfg, "nilpotency", res, p);
  return res.passed() ? kPass : kViolation;
}

SparseVec read_initial_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  try {
    return parse_sparse_vec(in);
  } catch (const ParseError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

int cmd_trajectory(const RunConfig& cfg, const std::string& init, Index basis, double lognorm_pow) {
  const Params p = make_params(cfg);
  if (format_or(cfg, "csv") != "csv") throw UsageError("trajectory output is CSV only");
  SparseVec x0;
  if (!init.empty()) {
    x0 = read_initial_vector(init);
  } else {
    if (basis == 0) throw UsageError("--basis must be >= 1");
    if (!std::isfinite(lognorm_pow)) throw UsageError("--lognorm-pow must be finite");
    x0 = SparseVec::basis(basis, LogScalar::positive(-lognorm_pow * p.log_M()));
  }

  Output out(cfg.out);
  TrajectoryCsvWriter writer(out.stream(), p);
  writer.header();
  bool violated = false;
  std::optional<TrajectoryRecord> prev;
  iterate(StabilizedMap(p), x0, cfg.steps, [&](const TrajectoryRecord& rec) {
    writer.row(rec);
    if (prev && !prev->is_zero() && !rec.is_zero() &&
        *rec.log_norm - *prev->log_norm > p.log_M() + growth_cap_slack(*prev->log_norm, p)) {
      if (!violated)
        std::cerr << "growth cap violated at step " << rec.step << '\n';
      violated = true;
    }
    prev = rec;
  });
  return violated ? kViolation : kPass;
}

int cmd_verify(const RunConfig& cfg, const std::string& suite, double c1, double c2, bool timing) {
  const Params p = make_params(cfg);
  if (!cli::is_suite(suite)) throw UsageError("unknown suite: " + suite);
  if (suite == "bounds" || suite == "all") {
    const double critical = p.log_K() / std::log(2.0);
    if (!(0.0 < c1 && c1 < critical && critical < c2)) {
      std::ostringstream msg;
      msg << "need 0 < c1 < ln K / ln 2 = " << critical << " < c2 (got c1 = " << c1
          << ", c2 = " << c2 << ")";
      throw UsageError(msg.str());
    }
  }
  cli::SuiteOptions opt{p, cfg.seed, cfg.steps, c1, c2, timing};
  const auto res = cli::run_suite(suite, opt);
  write_reports(cfg, suite, res, p);
  return res.passed() ? kPass : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and certify the stabilized Kakutani weighted-shift map."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value file (keys: M, K, seed, steps, horizon, format, out)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  RunConfig cfg;
  app.add_option("--M", cfg.M, "M > K > 1")->capture_default_str();
  app.add_option("--K", cfg.K, "K > 1")->capture_default_str();
  app.add_option("--seed", cfg.seed)->capture_default_str();
  app.add_option("--steps", cfg.steps, "trajectory length")->capture_default_str();
  app.add_option("--horizon", cfg.horizon, "number of weights listed")->capture_default_str();
  app.add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", cfg.out, "output file (default: stdout)");

  auto* weights = app.add_subcommand("weights", "list alpha_n for n = 1..horizon");

  int p_max = 0;
  auto* spectral = app.add_subcommand("spectral-radius", "series estimates of the spectral radius");
  spectral->add_option("--p", p_max, "number of series terms")->required();

  int m_max = 8;
  Index basis_last = 512;
  auto* nilpotency = app.add_subcommand("nilpotency", "(W - L_m)^(2^m) annihilation check");
  nilpotency->add_option("--m", m_max, "largest level")->capture_default_str();
  nilpotency->add_option("--last", basis_last, "largest basis index")->capture_default_str();

  std::string init;
  Index basis = 1;
  double lognorm_pow = 0.0;
  auto* trajectory = app.add_subcommand("trajectory", "iterate T and print one CSV row per step");
  auto* init_opt = trajectory->add_option("--init", init, "initial vector file (index:sign:log_mag)");
  trajectory->add_option("--basis", basis, "initial vector e_i")->excludes(init_opt);
  trajectory->add_option("--lognorm-pow", lognorm_pow, "||x_0|| = M^-value")->excludes(init_opt);

  std::string suite;
  double c1 = 1.2, c2 = 1.8;
  bool timing = false;
  auto* verify = app.add_subcommand("verify", "run a certificate suite and print the report");
  verify->add_option("--suite", suite, "stability, exponential, bounds, nilpotency, derivative, "
                                       "linear-instability or all")->required();
  verify->add_option("--c1", c1, "lower log-log exponent")->capture_default_str();
  verify->add_option("--c2", c2, "upper log-log exponent")->capture_default_str();
  verify->add_flag("--timing", timing, "record runtime_ms (output no longer reproducible)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*weights) return cmd_weights(cfg);
    if (*spectral) return cmd_spectral_radius(cfg, p_max);
    if (*nilpotency) return cmd_nilpotency(cfg, m_max, basis_last);
    if (*trajectory) return cmd_trajectory(cfg, init, basis, lognorm_pow);
    if (*verify) return cmd_verify(cfg, suite, c1, c2, timing);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
