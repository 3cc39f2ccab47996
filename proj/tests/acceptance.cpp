// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "unext/bounds.hpp"
#include "unext/extendibility.hpp"
#include "unext/hypothesis_testing.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace unext;
using Eigen::MatrixXcd;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* format, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, x);
  return buf;
}

Outcome oracle_agreement() {
  const double grid[] = {0.05, 0.25, 0.5, 0.75, 0.95};
  double worst = 0;
  int cases = 0;
  for (double p : grid)
    for (double t : grid)
      for (double eps : {0.0, 0.05, 0.3})
        for (int n = 1; n <= 8; ++n, ++cases) {
          const BinaryHypothesisPair hyp(p, t, n);
          worst = std::max(worst, std::abs(np_divergence(hyp, eps).log2_beta - np_oracle(hyp, eps)));
        }
  return {cases == 600 && worst <= 1e-12, std::to_string(cases) + " cases, max |dlog2 beta| " + fmt("%.3g", worst)};
}

Outcome identical_hypotheses() {
  double worst = 0;
  int cases = 0;
  for (double p : {0.05, 0.3, 0.5, 0.85, 1.0})
    for (int n : {1, 10, 100, 1000}) {
      const double eps = 0.05 * (cases % 5) + 0.01;
      worst = std::max(worst, std::abs(np_divergence({p, p, n}, eps).divergence() - std::log2(1 / (1 - eps))));
      ++cases;
    }
  return {cases == 20 && worst <= 1e-12, std::to_string(cases) + " cases, max error " + fmt("%.3g", worst)};
}

Outcome commuting_reduction() {
  double worst = 0;
  for (int n = 1; n <= 6; ++n) {
    const double a = commuting_dh_tensor_power(depolarizing_choi(0.15), isotropic(0.75, 2), n, 0.05);
    worst = std::max(worst, std::abs(a - np_divergence({0.85, 0.75, n}, 0.05).divergence()));
  }
  for (int n = 1; n <= 4; ++n) {
    const double a = commuting_dh_tensor_power(erasure_output(0.35), erasure_family(0.5), n, 0.05);
    worst = std::max(worst, std::abs(a - np_divergence({0.65, 0.5, n}, 0.05).divergence()));
  }
  // The same reduction through full tensor-power matrices at small n.
  for (int n = 1; n <= 2; ++n) {
    const double a = commuting_dh(tensor_power(depolarizing_choi(0.15), n), tensor_power(isotropic(0.75, 2), n), 0.05);
    worst = std::max(worst, std::abs(a - np_divergence({0.85, 0.75, n}, 0.05).divergence()));
    const double b = commuting_dh(tensor_power(erasure_output(0.35), n), tensor_power(erasure_family(0.5), n), 0.05);
    worst = std::max(worst, std::abs(b - np_divergence({0.65, 0.5, n}, 0.05).divergence()));
  }
  return {worst <= 1e-9, "depolarizing n<=6, erasure n<=4, max |dD| " + fmt("%.3g", worst)};
}

Outcome certificate_soundness() {
  double worst = 0;
  for (int k = 2; k <= 4; ++k)
    worst = std::max(worst, certificate_residuals(erasure_certificate(k), erasure_family(1.0 - 1.0 / k), k).worst());
  const auto v = check_k_extendible({erasure_family(0.5), 2});
  return {worst <= 1e-10 && v.feasible(),
          "worst residual " + fmt("%.3g", worst) + ", erasure:0.5 k=2 " + std::string(to_string(v.status))};
}

Outcome threshold_consistency() {
  const auto table = ThresholdTable::fixture();
  const auto iso = [](double t) { return isotropic(t, 2); };
  bool ok = true;
  std::string detail;
  double estimate[2] = {0, 0};
  for (int k : {2, 3}) {
    const auto b = threshold_bisect(iso, k, 0.5, 1.0);
    const double fixture = table.value(ExtensionOrder::finite(k));
    const double est = b.estimate();
    estimate[k - 2] = est;
    const bool inside = check_k_extendible({isotropic(est - 0.05, 2), k}).feasible();
    const bool outside = check_k_extendible({isotropic(est + 0.05, 2), k}).status == ExtendibilityStatus::InfeasibleSignal;
    ok = ok && std::abs(est - fixture) <= 0.01 && inside && outside;
    detail += "t*(" + std::to_string(k) + ") " + fmt("%.4f", est) + " vs fixture " + fmt("%.4f", fixture) +
              (inside && outside ? " (margins agree); " : " (margin check failed); ");
  }
  ok = ok && estimate[1] < estimate[0] && estimate[0] < 1.0;
  return {ok, detail + "t*(3) < t*(2) < 1"};
}

Outcome local_channels() {
  MatrixXcd u2(2, 2);
  u2 << 1, 1, 1, -1;
  u2 /= std::sqrt(2.0);
  MatrixXcd u3 = MatrixXcd::Identity(3, 3);
  u3.topLeftCorner(2, 2) = u2;
  MatrixXcd keep = MatrixXcd::Zero(3, 3), e0 = MatrixXcd::Zero(3, 3), e1 = MatrixXcd::Zero(3, 3);
  keep(0, 0) = keep(1, 1) = std::sqrt(0.75);
  keep(2, 2) = 1;
  e0(2, 0) = e1(2, 1) = 0.5;

  struct Case {
    DensityMatrixd input;
    std::vector<MatrixXcd> kraus;
    int k;
  };
  const std::vector<Case> cases{
      {isotropic(0.7, 2), depolarizing_kraus(0.2), 2},
      {isotropic(0.7, 2), erasure_kraus(0.3), 2},
      {isotropic(0.6, 2), {u2}, 3},
      {erasure_family(0.5), flag_preserving(depolarizing_kraus(0.1)), 2},
      {erasure_family(0.5), {keep, e0, e1}, 2},
      {erasure_family(0.5), {u3}, 2},
  };
  int feasible = 0;
  for (const auto& c : cases)
    if (check_k_extendible({c.input, c.k}).feasible() &&
        check_k_extendible({apply_local_channel(c.input, c.kraus, 1), c.k}).feasible())
      ++feasible;
  return {feasible == 6, std::to_string(feasible) + "/6 (state, channel, k) outputs Feasible"};
}

Outcome dominance(ChannelKind kind, double p) {
  const ChannelSpec channel(kind, p);
  double best_margin = 0, worst_excess = -INFINITY;
  for (int n = 1; n <= 50; ++n) {
    const double primary = optimize_k(channel, n, 0.05, 5).rate_bound;
    const double limit = channel_bound({channel, n, 0.05, ExtensionOrder::infinite(), std::nullopt}).rate_bound;
    worst_excess = std::max(worst_excess, primary - limit);
    best_margin = std::max(best_margin, limit - primary);
  }
  // 1e-12 absorbs the n = 1 case, where both sides are algebraically equal.
  return {worst_excess <= 1e-12 && best_margin >= 1e-3,
          "max(primary - limit) " + fmt("%.3g", worst_excess) + ", best margin " + fmt("%.4g", best_margin)};
}

Outcome spot_values() {
  const double anti = antidegradable_bound(1, 0.05).rate_bound;
  const double d = np_divergence({0.85, 0.75, 1}, 0.05).divergence();
  const double chain = max_log_dimension(d, ExtensionOrder::finite(2));
  const double via_bound =
      depolarizing_bound({{ChannelKind::Depolarizing, 0.15}, 1, 0.05, ExtensionOrder::finite(2), 0.75}).rate_bound;
  const double e1 = std::abs(anti - std::log2(1 / 0.9));
  const double e2 = std::max(std::abs(chain - std::log2(1.2)), std::abs(via_bound - std::log2(1.2)));
  return {e1 <= 1e-12 && e2 <= 1e-9,
          "antidegradable error " + fmt("%.3g", e1) + ", log2(1.2) chain error " + fmt("%.3g", e2)};
}

Outcome engine_cross_validation() {
  double worst = 0;
  for (int n : {50, 100, 200})
    for (const auto& [p, t] : {std::pair{0.875, 0.75}, std::pair{0.65, 0.5}, std::pair{0.25, 0.625}})
      for (double eps : {0.0, 0.05}) {
        const double a = np_divergence({p, t, n}, eps).beta();
        const double b = np_divergence_exact({p, t, n}, eps).beta();
        worst = std::max(worst, std::abs(a - b) / b);
      }
  return {worst <= 1e-9, "max relative beta gap " + fmt("%.3g", worst)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0: no stated budget
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "oracle agreement", 10, oracle_agreement},
      {2, "identical-hypotheses law", 0, identical_hypotheses},
      {3, "commuting reduction", 0, commuting_reduction},
      {4, "certificate soundness", 0, certificate_soundness},
      {5, "threshold consistency", 120, threshold_consistency},
      {6, "local channels preserve extendibility", 0, local_channels},
      {7, "depolarizing dominance (p=0.15, eps=0.05)", 60, [] { return dominance(ChannelKind::Depolarizing, 0.15); }},
      {8, "erasure dominance (p=0.35, eps=0.05)", 60, [] { return dominance(ChannelKind::Erasure, 0.35); }},
      {9, "closed-form spot values", 0, spot_values},
      {10, "log vs exact engines", 0, engine_cross_validation},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = c.budget_s == 0 || secs <= c.budget_s;
    const bool pass = o.pass && in_budget;
    failures += pass ? 0 : 1;
    std::printf("%s [%d] %s: %s (%.2fs%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                in_budget ? "" : ", over budget");
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
