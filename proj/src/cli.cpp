#include "unext/cli.hpp"

#include "unext/bounds.hpp"
#include "unext/extendibility.hpp"
#include "unext/hypothesis_testing.hpp"
#include "unext/state_io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace unext {
namespace {

using nlohmann::json;

constexpr const char* kCsvVersion = "#unext-bounds v1";

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

ChannelKind parse_channel(const std::string& s) {
  if (s == "depolarizing") return ChannelKind::Depolarizing;
  if (s == "erasure") return ChannelKind::Erasure;
  throw std::invalid_argument("unknown channel '" + s + "'");
}

int parse_int(const std::string& s, const char* what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw std::invalid_argument(std::string("invalid ") + what + " '" + s + "'");
  return v;
}

std::vector<int> parse_n_values(const std::optional<int>& n, const std::string& range) {
  if (range.empty()) {
    const int v = n.value_or(1);
    if (v < 1) throw std::invalid_argument("--n must be >= 1");
    return {v};
  }
  const auto colon = range.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("--n-range expects LO:HI");
  const int lo = parse_int(range.substr(0, colon), "--n-range bound");
  const int hi = parse_int(range.substr(colon + 1), "--n-range bound");
  if (lo < 1 || hi < lo) throw std::invalid_argument("--n-range needs 1 <= LO <= HI");
  std::vector<int> out;
  for (int v = lo; v <= hi; ++v) out.push_back(v);
  return out;
}

unsigned sweep_threads(std::size_t jobs) {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("UNEXT_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) cap = static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return static_cast<unsigned>(std::min<std::size_t>(cap, std::max<std::size_t>(jobs, 1)));
}

// Evaluates fn(i) for i in [0, count) on a small worker pool; results keep index order.
template <class T>
std::vector<T> parallel_map(std::size_t count, const std::function<T(std::size_t)>& fn) {
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = sweep_threads(count);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// Sends text to --output when given, else to `out`.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot open output file '" + path + "'");
  f << text;
}

// ---- bound ----------------------------------------------------------------

struct BoundOptions {
  std::string channel;
  double p = 0.0;
  double eps = 0.05;
  std::optional<int> n;
  std::string n_range;
  std::string k = "2";
  int k_max = 5;
  std::optional<double> sigma_param;
  bool per_use = false;
  bool interleaved = false;
  std::string format = "csv";
  std::string output;
};

BoundResult evaluate_bound(const BoundOptions& o, int n) {
  const ChannelSpec channel(parse_channel(o.channel), o.p);
  if (o.k == "opt") {
    if (o.sigma_param) throw std::invalid_argument("--sigma-param cannot be combined with --k opt");
    if (o.interleaved) throw std::invalid_argument("--interleaved needs a fixed --k");
    return optimize_k(channel, n, o.eps, o.k_max);
  }
  const ExtensionOrder k = o.k == "inf" ? ExtensionOrder::infinite() : ExtensionOrder::finite(parse_int(o.k, "--k"));
  const BoundQuery q{channel, n, o.eps, k, o.sigma_param};
  if (o.interleaved) {
    if (o.sigma_param) throw std::invalid_argument("--sigma-param is not used by --interleaved");
    return interleaved_bound(q);
  }
  return channel_bound(q);
}

std::string render_bounds(const BoundOptions& o, const std::vector<BoundResult>& rows) {
  auto rate = [&](const BoundResult& r) { return o.per_use ? r.rate_bound : r.rate_bound * r.n; };
  if (o.format == "json") {
    json j;
    j["channel"] = o.channel;
    j["p"] = o.p;
    j["eps"] = o.eps;
    j["per_use"] = o.per_use;
    j["rows"] = json::array();
    for (const auto& r : rows) {
      j["rows"].push_back({{"n", r.n},
                           {"rate_bound", number_or_null(rate(r))},
                           {"vacuous", r.vacuous()},
                           {"k_used", r.k_used.to_string()},
                           {"sigma_param_used", r.sigma_param_used},
                           {"method", std::string(to_string(r.method))},
                           {"divergence", number_or_null(r.divergence)},
                           {"sigma_provenance", std::string(to_string(r.provenance))}});
    }
    return j.dump(2) + "\n";
  }
  std::ostringstream s;
  s << kCsvVersion << "\n";
  s << "n,rate_bound,k_used,sigma_param_used,method,divergence,sigma_provenance\n";
  for (const auto& r : rows)
    s << r.n << ',' << format_number(rate(r)) << ',' << r.k_used.to_string() << ','
      << format_number(r.sigma_param_used) << ',' << to_string(r.method) << ',' << format_number(r.divergence)
      << ',' << to_string(r.provenance) << "\n";
  return s.str();
}

int run_bound(const BoundOptions& o, std::ostream& out) {
  const auto ns = parse_n_values(o.n, o.n_range);
  parse_channel(o.channel);
  const auto rows =
      parallel_map<BoundResult>(ns.size(), [&](std::size_t i) { return evaluate_bound(o, ns[i]); });
  emit(render_bounds(o, rows), o.output, out);
  return kExitOk;
}

// ---- figure ---------------------------------------------------------------

struct FigureOptions {
  std::string channel;
  double p = 0.0;
  double eps = 0.05;
  int n_max = 50;
  int k_max = 5;
  std::string format = "csv";
  std::string output;
};

struct FigureRow {
  int n;
  BoundResult primary;
  BoundResult limit;
};

int run_figure(const FigureOptions& o, std::ostream& out) {
  if (o.n_max < 1) throw std::invalid_argument("--n-max must be >= 1");
  const ChannelSpec channel(parse_channel(o.channel), o.p);
  const auto rows = parallel_map<FigureRow>(static_cast<std::size_t>(o.n_max), [&](std::size_t i) {
    const int n = static_cast<int>(i) + 1;
    FigureRow row{n, optimize_k(channel, n, o.eps, o.k_max),
                  channel_bound({channel, n, o.eps, ExtensionOrder::infinite(), std::nullopt})};
    // optimize_k resolves round-off ties toward finite k; a row must never sit above its limit.
    if (row.limit.rate_bound < row.primary.rate_bound) row.primary = row.limit;
    return row;
  });

  std::string text;
  if (o.format == "json") {
    json j;
    j["channel"] = o.channel;
    j["p"] = o.p;
    j["eps"] = o.eps;
    j["rows"] = json::array();
    for (const auto& r : rows)
      j["rows"].push_back({{"n", r.n},
                           {"rate_primary", number_or_null(r.primary.rate_bound)},
                           {"rate_limit", number_or_null(r.limit.rate_bound)},
                           {"vacuous", r.primary.vacuous()},
                           {"k_used", r.primary.k_used.to_string()},
                           {"method", std::string(to_string(r.primary.method))}});
    text = j.dump(2) + "\n";
  } else {
    std::ostringstream s;
    s << kCsvVersion << "\n" << "n,rate_primary,rate_limit,k_used,method\n";
    for (const auto& r : rows)
      s << r.n << ',' << format_number(r.primary.rate_bound) << ',' << format_number(r.limit.rate_bound) << ','
        << r.primary.k_used.to_string() << ',' << to_string(r.primary.method) << "\n";
    text = s.str();
  }
  emit(text, o.output, out);
  return kExitOk;
}

// ---- np -------------------------------------------------------------------

struct NpOptions {
  double p = 0.0;
  double t = 0.0;
  int n = 1;
  double eps = 0.05;
  std::string engine = "log";
};

int run_np(const NpOptions& o, std::ostream& out) {
  const BinaryHypothesisPair hyp(o.p, o.t, o.n);
  const NPResult r = o.engine == "exact" ? np_divergence_exact(hyp, o.eps) : np_divergence(hyp, o.eps);
  json j{{"D", number_or_null(r.divergence())},
         {"beta", r.beta()},
         {"threshold_weight", r.threshold_weight},
         {"gamma", r.gamma},
         {"infinite", r.infinite()}};
  out << j.dump() << "\n";
  return kExitOk;
}

// ---- check ----------------------------------------------------------------

struct CheckOptions {
  std::string state;
  int k = 2;
  double tol = 1e-7;
  int max_iter = 50000;
};

DensityMatrixd load_state(const std::string& spec) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(spec, ec)) {
    std::ifstream f(spec);
    json j;
    try {
      f >> j;
    } catch (const json::exception& e) {
      throw std::invalid_argument("cannot parse JSON state file: " + std::string(e.what()));
    }
    return state_from_json(j);
  }
  return parse_named_state(spec);
}

int run_check(const CheckOptions& o, std::ostream& out) {
  const ExtendibilityVerdict v = check_k_extendible({load_state(o.state), o.k, o.tol, o.max_iter});
  json j{{"status", std::string(to_string(v.status))}, {"residual", v.residual}, {"iterations", v.iterations}};
  out << j.dump() << "\n";
  switch (v.status) {
    case ExtendibilityStatus::Feasible:
      return kExitOk;
    case ExtendibilityStatus::InfeasibleSignal:
      return kExitInfeasible;
    case ExtendibilityStatus::Inconclusive:
      return kExitInconclusive;
  }
  return kExitInconclusive;
}

// ---- selftest -------------------------------------------------------------

class Report {
 public:
  explicit Report(std::ostream& out) : out_(out) {}

  void record(const std::string& suite, bool ok, const std::string& detail) {
    out_ << (ok ? "PASS " : "FAIL ") << suite << ": " << detail << "\n";
    failures_ += ok ? 0 : 1;
    ++suites_;
  }
  int failures() const { return failures_; }
  int suites() const { return suites_; }

 private:
  std::ostream& out_;
  int failures_ = 0;
  int suites_ = 0;
};

void selftest_oracle(Report& report) {
  const double grid[] = {0.05, 0.25, 0.5, 0.75, 0.95};
  const double epss[] = {0.0, 0.05, 0.3};
  int cases = 0;
  double worst = 0.0;
  for (double p : grid)
    for (double t : grid)
      for (double eps : epss)
        for (int n = 1; n <= 8; ++n) {
          const BinaryHypothesisPair hyp(p, t, n);
          worst = std::max(worst, std::abs(np_divergence(hyp, eps).log2_beta - np_oracle(hyp, eps)));
          ++cases;
        }
  report.record("np-oracle-grid", worst <= 1e-12,
                std::to_string(cases) + " cases, max |dlog2 beta| = " + format_number(worst));
}

void selftest_identical(Report& report) {
  double worst = 0.0;
  int cases = 0;
  for (double p : {0.1, 0.3, 0.5, 0.8})
    for (int n : {1, 4, 9, 20, 50}) {
      const double eps = 0.01 * (n % 7) + 0.02;
      const double d = np_divergence({p, p, n}, eps).divergence();
      worst = std::max(worst, std::abs(d - std::log2(1.0 / (1.0 - eps))));
      ++cases;
    }
  report.record("identical-hypotheses", worst <= 1e-12,
                std::to_string(cases) + " cases, max error = " + format_number(worst));
}

void selftest_engines(Report& report) {
  double worst = 0.0;
  for (int n : {50, 100, 200}) {
    const BinaryHypothesisPair hyp(0.875, 0.75, n);
    const double a = np_divergence(hyp, 0.05).beta();
    const double b = np_divergence_exact(hyp, 0.05).beta();
    worst = std::max(worst, std::abs(a - b) / b);
  }
  report.record("log-vs-exact", worst <= 1e-9, "max relative beta gap = " + format_number(worst));
}

void selftest_commuting(Report& report) {
  double worst = 0.0;
  const double p = 0.15, t = 0.75, eps = 0.05;
  for (int n = 1; n <= 4; ++n) {
    const double a = commuting_dh_tensor_power(depolarizing_choi(p), isotropic(t, 2), n, eps);
    worst = std::max(worst, std::abs(a - np_divergence({1.0 - p, t, n}, eps).divergence()));
  }
  for (int n = 1; n <= 4; ++n) {
    const double a = commuting_dh_tensor_power(erasure_output(0.35), erasure_family(0.5), n, eps);
    worst = std::max(worst, std::abs(a - np_divergence({0.65, 0.5, n}, eps).divergence()));
  }
  report.record("commuting-reduction", worst <= 1e-9, "max |dD| = " + format_number(worst));
}

void selftest_certificates(Report& report) {
  double worst = 0.0;
  for (int k = 2; k <= 4; ++k)
    worst = std::max(worst, certificate_residuals(erasure_certificate(k), erasure_family(1.0 - 1.0 / k), k).worst());
  const auto v = check_k_extendible({erasure_family(0.5), 2});
  report.record("erasure-certificates", worst <= 1e-10 && v.feasible(),
                "k=2..4 worst residual = " + format_number(worst) + ", erasure:0.5 k=2 " +
                    std::string(to_string(v.status)));
}

void selftest_cross_module(Report& report, const ThresholdTable& table) {
  double worst = 0.0;
  const double p = 0.15;
  const BellSpectrum choi{1.0 - p, p / 3, p / 3, p / 3};
  for (int n : {1, 5, 20})
    for (double eps : {0.0, 0.05})
      for (int k : {2, 3, 5}) {
        const auto order = ExtensionOrder::finite(k);
        const auto a = distillation_bound_bell_diagonal(choi, n, eps, order, table);
        const auto b = depolarizing_bound({{ChannelKind::Depolarizing, p}, n, eps, order, std::nullopt}, table);
        const double gap = (a.vacuous() && b.vacuous()) ? 0.0 : std::abs(a.rate_bound - b.rate_bound);
        worst = std::max(worst, std::isnan(gap) ? 1.0 : gap);
      }
  report.record("distillation-vs-depolarizing", worst <= 1e-12, "max rate gap = " + format_number(worst));
}

void selftest_fixture(Report& report, const ThresholdTable& table) {
  for (int k : {2, 3}) {
    const auto order = ExtensionOrder::finite(k);
    const double t = table.value(order);
    const auto at_fixture = check_k_extendible({isotropic(t, 2), k});
    const auto bracket =
        threshold_bisect([](double x) { return isotropic(x, 2); }, k, 0.5, 1.0, BisectOptions{0.01, 1e-7, 50000});
    const bool ok = at_fixture.feasible() && std::abs(bracket.estimate() - t) <= 0.01;
    report.record("fixture-threshold-k" + std::to_string(k), ok,
                  "fixture t = " + format_number(t) + " (" + std::string(to_string(at_fixture.status)) +
                      "), bisection estimate = " + format_number(bracket.estimate()));
  }
}

struct SelftestOptions {
  std::string perturb;  // "K:DELTA" shifts one fixture entry, for sensitivity checks
};

ThresholdTable selftest_table(const SelftestOptions& o) {
  auto values = ThresholdTable::fixture().values();
  if (o.perturb.empty()) return ThresholdTable(values);
  const auto colon = o.perturb.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("--perturb-threshold expects K:DELTA");
  const int k = parse_int(o.perturb.substr(0, colon), "--perturb-threshold order");
  if (k < ThresholdTable::kFirstOrder || k > ThresholdTable::kLastOrder)
    throw std::invalid_argument("--perturb-threshold order must lie in 2..5");
  values[static_cast<std::size_t>(k - ThresholdTable::kFirstOrder)] += std::stod(o.perturb.substr(colon + 1));
  return ThresholdTable(values);
}

int run_selftest(const SelftestOptions& o, std::ostream& out) {
  const ThresholdTable table = selftest_table(o);
  Report report(out);
  selftest_oracle(report);
  selftest_identical(report);
  selftest_engines(report);
  selftest_commuting(report);
  selftest_certificates(report);
  selftest_cross_module(report, table);
  selftest_fixture(report, table);
  out << (report.failures() == 0 ? "selftest passed" : "selftest FAILED") << " (" << report.suites() - report.failures()
      << "/" << report.suites() << " suites)\n";
  return report.failures() == 0 ? kExitOk : kExitNumerical;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Converse bounds from k-extendibility", "unext"};
  app.require_subcommand(1);

  BoundOptions bound;
  auto* bound_cmd = app.add_subcommand("bound", "rate bound for a channel at one or more block lengths");
  bound_cmd->add_option("--channel", bound.channel, "depolarizing | erasure")->required();
  bound_cmd->add_option("--p", bound.p, "channel parameter")->required();
  bound_cmd->add_option("--eps", bound.eps, "error tolerance");
  auto* n_opt = bound_cmd->add_option("--n", bound.n, "number of channel uses");
  auto* range_opt = bound_cmd->add_option("--n-range", bound.n_range, "LO:HI");
  n_opt->excludes(range_opt);
  bound_cmd->add_option("--k", bound.k, "extension order: integer >= 2, inf or opt");
  bound_cmd->add_option("--k-max", bound.k_max, "largest k considered by --k opt");
  bound_cmd->add_option("--sigma-param", bound.sigma_param, "override t (depolarizing) or q (erasure)");
  bound_cmd->add_flag("--per-use", bound.per_use, "report log2(M)/n instead of log2(M)");
  bound_cmd->add_flag("--interleaved", bound.interleaved, "bound for protocols interleaved with k-extendible channels");
  bound_cmd->add_option("--format", bound.format)->check(CLI::IsMember({"csv", "json"}));
  bound_cmd->add_option("--output", bound.output, "write to this file instead of stdout");

  FigureOptions figure;
  auto* figure_cmd = app.add_subcommand("figure", "per-use rate curve: optimized k against the k -> inf limit");
  figure_cmd->add_option("--channel", figure.channel)->required();
  figure_cmd->add_option("--p", figure.p)->required();
  figure_cmd->add_option("--eps", figure.eps);
  figure_cmd->add_option("--n-max", figure.n_max);
  figure_cmd->add_option("--k-max", figure.k_max);
  figure_cmd->add_option("--format", figure.format)->check(CLI::IsMember({"csv", "json"}));
  figure_cmd->add_option("--output", figure.output);

  NpOptions np;
  auto* np_cmd = app.add_subcommand("np", "hypothesis-testing divergence of n Bernoulli copies");
  np_cmd->add_option("--p", np.p, "success probability under the null")->required();
  np_cmd->add_option("--t", np.t, "success probability under the alternative")->required();
  np_cmd->add_option("--n", np.n);
  np_cmd->add_option("--eps", np.eps);
  np_cmd->add_option("--engine", np.engine)->check(CLI::IsMember({"log", "exact"}));

  CheckOptions check;
  auto* check_cmd = app.add_subcommand("check", "k-extendibility of a named state or JSON matrix file");
  check_cmd->add_option("state", check.state, "named state or path to a JSON matrix")->required();
  check_cmd->add_option("--k", check.k);
  check_cmd->add_option("--tol", check.tol);
  check_cmd->add_option("--max-iter", check.max_iter);

  SelftestOptions selftest;
  auto* selftest_cmd = app.add_subcommand("selftest", "oracle, certificate and fixture checks");
  selftest_cmd->add_option("--perturb-threshold", selftest.perturb, "K:DELTA added to the fixture t*(K)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*bound_cmd) return run_bound(bound, out);
    if (*figure_cmd) return run_figure(figure, out);
    if (*np_cmd) return run_np(np, out);
    if (*check_cmd) return run_check(check, out);
    if (*selftest_cmd) return run_selftest(selftest, out);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace unext
