#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "unext/bounds.hpp"

#include <cmath>
#include <limits>

using namespace unext;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest log₂M with −log₂[1/M + 1/k − 1/(Mk)] ≤ D, found by bisection on the
// inequality itself rather than its closed-form inverse.
double invert_by_bisection(double d, int k) {
  auto lhs = [&](double log_m) {
    const double m = std::exp2(log_m);
    return -std::log2(1 / m + 1.0 / k - 1 / (m * k));
  };
  if (lhs(200.0) <= d) return kInf;
  double lo = 0, hi = 200;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (lhs(mid) <= d ? lo : hi) = mid;
  }
  return lo;
}

BoundQuery depolarizing(double p, int n, double eps, ExtensionOrder k, std::optional<double> sigma = std::nullopt) {
  return {{ChannelKind::Depolarizing, p}, n, eps, k, sigma};
}

BoundQuery erasure(double p, int n, double eps, ExtensionOrder k, std::optional<double> sigma = std::nullopt) {
  return {{ChannelKind::Erasure, p}, n, eps, k, sigma};
}

const auto k2 = ExtensionOrder::finite(2);
const auto kinf = ExtensionOrder::infinite();

}  // namespace

TEST_CASE("extension orders") {
  CHECK(ExtensionOrder::finite(3).value() == 3);
  CHECK(kinf.is_infinite());
  CHECK(kinf.to_string() == "inf");
  CHECK_THROWS_AS(ExtensionOrder::finite(1), std::invalid_argument);
  CHECK_THROWS(kinf.value());
}

TEST_CASE("inversion of the extendible-assistance inequality") {
  for (int k : {2, 3, 10}) CHECK(max_log_dimension(0.0, ExtensionOrder::finite(k)) == 0.0);
  CHECK(max_log_dimension(1.0, k2) == kInf);      // 2^{-1} = 1/2
  CHECK(max_log_dimension(3.0, k2) == kInf);
  CHECK(max_log_dimension(0.7, kinf) == 0.7);
  CHECK(max_log_dimension(-std::log2(0.75 + 0.25 * 2 / 3), k2) == doctest::Approx(std::log2(1.2)).epsilon(1e-12));
  CHECK_THROWS_AS(max_log_dimension(-0.1, k2), std::invalid_argument);

  for (int k : {2, 3, 5, 17})
    for (double d : {0.01, 0.1, 0.3, 0.6, 0.9, 1.5}) {
      const double closed = max_log_dimension(d, ExtensionOrder::finite(k));
      const double oracle = invert_by_bisection(d, k);
      if (std::isinf(oracle))
        CHECK(std::isinf(closed));
      else
        CHECK(closed == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("fixture thresholds") {
  const auto table = ThresholdTable::fixture();
  double prev = 1.0;
  for (int k = 2; k <= 12; ++k) {
    const double t = table.value(ExtensionOrder::finite(k));
    CHECK(t < prev);
    CHECK(t > 0.5);
    prev = t;
  }
  CHECK(table.value(ExtensionOrder::finite(2)) == doctest::Approx(0.75).epsilon(1e-3));
  CHECK(table.provenance(ExtensionOrder::finite(5)) == SigmaProvenance::Fixture);
  CHECK(table.provenance(ExtensionOrder::finite(6)) == SigmaProvenance::Interpolated);
  CHECK(table.value(kinf) == 0.5);
  CHECK_THROWS_AS(ThresholdTable({0.7, 0.75, 0.6, 0.55}), std::invalid_argument);
}

TEST_CASE("depolarizing bound spot values") {
  const auto r = depolarizing_bound(depolarizing(0.15, 1, 0.05, k2, 0.75));
  CHECK(r.rate_bound == doctest::Approx(std::log2(1.2)).epsilon(1e-9));
  CHECK(r.method == BoundMethod::PostProcessing);
  CHECK(r.provenance == SigmaProvenance::Override);

  const auto lim = depolarizing_bound(depolarizing(0.15, 1, 0.05, kinf));
  CHECK(lim.sigma_param_used == 0.5);
  CHECK(lim.method == BoundMethod::LimitKInf);
  // n = 1, 0.85 vs 0.5: success class fully accepted, failure class with γ = 2/3.
  CHECK(lim.rate_bound == doctest::Approx(-std::log2(0.5 + 0.5 * 2 / 3)).epsilon(1e-12));

  const auto perfect = depolarizing_bound(depolarizing(0.0, 1, 0.0, ExtensionOrder::finite(3)));
  CHECK(std::isfinite(perfect.rate_bound));
  CHECK(perfect.rate_bound > 0);

  // Extendible Choi state: σ = τ is admissible and gives the smallest D.
  for (int k : {2, 3, 4}) {
    const auto order = ExtensionOrder::finite(k);
    const double t = ThresholdTable::fixture().value(order);
    const double p = 1.0 - t + 0.01;
    const double floor = max_log_dimension(std::log2(1 / 0.95), order) / 3;
    const auto tau = depolarizing_bound(depolarizing(p, 3, 0.05, order, 1.0 - p));
    CHECK(tau.rate_bound == doctest::Approx(floor).epsilon(1e-12));
    CHECK(depolarizing_bound(depolarizing(p, 3, 0.05, order)).rate_bound >= floor - 1e-12);
  }

  CHECK_THROWS_AS(depolarizing_bound(depolarizing(0.15, 1, 0.05, k2, 0.8)), std::invalid_argument);
  CHECK_THROWS_AS(depolarizing_bound(depolarizing(0.15, 0, 0.05, k2)), std::invalid_argument);
  CHECK_THROWS_AS(depolarizing_bound(erasure(0.15, 1, 0.05, k2)), std::invalid_argument);
}

TEST_CASE("erasure bound spot values") {
  const auto equal = erasure_bound(erasure(0.5, 1, 0.05, k2));
  CHECK(equal.divergence == doctest::Approx(std::log2(1 / 0.95)).epsilon(1e-12));
  CHECK(equal.rate_bound == doctest::Approx(std::log2(0.5 / 0.45)).epsilon(1e-12));
  CHECK(equal.provenance == SigmaProvenance::Certificate);

  const auto r = erasure_bound(erasure(0.35, 1, 0.05, k2));
  CHECK(r.divergence == doctest::Approx(np_divergence({0.65, 0.5, 1}, 0.05).divergence()).epsilon(1e-14));
  CHECK(r.rate_bound == doctest::Approx(invert_by_bisection(r.divergence, 2)).epsilon(1e-9));

  // Full erasure: P puts all mass on failures, Q has success 1/k.
  const auto full = erasure_bound(erasure(1.0, 2, 0.05, ExtensionOrder::finite(3)));
  CHECK(full.divergence == doctest::Approx(np_divergence({0.0, 1.0 / 3, 2}, 0.05).divergence()).epsilon(1e-14));
  CHECK(full.rate_bound == doctest::Approx(max_log_dimension(full.divergence, ExtensionOrder::finite(3)) / 2));

  // k → ∞: σ has no success mass, so τ's success outcomes are free to accept.
  CHECK(erasure_bound(erasure(0.35, 1, 0.05, kinf)).rate_bound < kInf);
  CHECK(erasure_bound(erasure(0.35, 3, 0.05, kinf)).vacuous());

  CHECK_THROWS_AS(erasure_bound(erasure(0.35, 1, 0.05, k2, 0.4)), std::invalid_argument);
  CHECK(erasure_bound(erasure(0.35, 1, 0.05, k2, 0.6)).sigma_param_used == 0.6);
}

TEST_CASE("consistency with the binary divergence") {
  for (int n : {1, 3, 10, 40})
    for (double eps : {0.0, 0.05, 0.2}) {
      const auto r = depolarizing_bound(depolarizing(0.2, n, eps, kinf, 0.5));
      CHECK(r.rate_bound == np_divergence({0.8, 0.5, n}, eps).divergence() / n);
    }
}

TEST_CASE("finite bounds satisfy the inversion validity condition") {
  for (int n = 1; n <= 60; n += 3)
    for (int k = 2; k <= 7; ++k) {
      const auto r = channel_bound(depolarizing(0.1, n, 0.05, ExtensionOrder::finite(k)));
      if (!r.vacuous()) CHECK(std::exp2(-r.divergence) > 1.0 / k);
      CHECK(r.rate_bound >= 0.0);
    }
}

TEST_CASE("vacuity is monotone in n") {
  for (double p : {0.05, 0.15, 0.3})
    for (int k : {2, 3, 5}) {
      bool seen = false;
      for (int n = 1; n <= 120; ++n) {
        const bool vac = depolarizing_bound(depolarizing(p, n, 0.05, ExtensionOrder::finite(k))).vacuous();
        if (seen) CHECK(vac);
        seen = seen || vac;
      }
    }
}

TEST_CASE("distillation bound") {
  for (int n : {1, 4, 15})
    for (double eps : {0.0, 0.05, 0.3})
      for (int k : {2, 3, 5, 8}) {
        const double p = 0.15;
        const auto order = ExtensionOrder::finite(k);
        const auto a = distillation_bound_bell_diagonal({1 - p, p / 3, p / 3, p / 3}, n, eps, order);
        const auto b = depolarizing_bound(depolarizing(p, n, eps, order));
        if (b.vacuous())
          CHECK(a.vacuous());
        else
          CHECK(a.rate_bound == b.rate_bound);
      }

  const double t = ThresholdTable::fixture().value(k2);
  const auto at_threshold = distillation_bound_bell_diagonal({t, (1 - t) / 3, (1 - t) / 3, (1 - t) / 3}, 1, 0.05, k2);
  CHECK(at_threshold.divergence == doctest::Approx(std::log2(1 / 0.95)).epsilon(1e-12));

  const auto pure = distillation_bound_bell_diagonal({1, 0, 0, 0}, 1, 0.0, k2, ThresholdTable({0.75, 0.6, 0.58, 0.55}));
  CHECK(pure.divergence == doctest::Approx(-std::log2(0.75)).epsilon(1e-12));
  CHECK(pure.rate_bound == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(distillation_bound_bell_diagonal({0.5, 0.5, 0.5, -0.5}, 1, 0.05, k2), std::invalid_argument);
}

TEST_CASE("non-isotropic Bell-diagonal states use the full type-class problem") {
  // bell_diagonal_dh against a direct multinomial enumeration for n = 2.
  const BellSpectrum w{0.7, 0.2, 0.06, 0.04};
  const double t = 0.75, rest = 0.25 / 3;
  std::vector<JointOutcome> outcomes;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      outcomes.push_back({w[i] * w[j], (i == 0 ? t : rest) * (j == 0 ? t : rest)});
  for (double eps : {0.0, 0.05, 0.3})
    CHECK(bell_diagonal_dh(w, t, 2, eps) == doctest::Approx(-np_oracle_outcomes(outcomes, eps)).epsilon(1e-12));

  // Lumping to the Φ-count can only lower D, so the type-class value dominates.
  for (int n : {1, 3, 8}) CHECK(bell_diagonal_dh(w, t, n, 0.05) >= np_divergence({0.7, t, n}, 0.05).divergence() - 1e-12);
}

TEST_CASE("interleaved bound") {
  const auto r = interleaved_bound(depolarizing(0.15, 1, 0.05, k2));
  CHECK(r.method == BoundMethod::Interleaved);
  CHECK(r.sigma_param_used == doctest::Approx(ThresholdTable::fixture().value(k2)));
  const double e_max = std::log2(0.85 / ThresholdTable::fixture().value(k2));
  CHECK(e_max == doctest::Approx(0.1805).epsilon(1e-3));
  CHECK(r.divergence == doctest::Approx(e_max + std::log2(1 / 0.95)).epsilon(1e-12));

  // 1 − p ≤ t*(k): the Choi state itself is admissible and Ẽ = 0.
  for (int n : {1, 5}) {
    const auto z = interleaved_bound(depolarizing(0.3, n, 0.05, k2));
    CHECK(z.divergence == doctest::Approx(std::log2(1 / 0.95)).epsilon(1e-12));
    CHECK(z.rate_bound == doctest::Approx(max_log_dimension(std::log2(1 / 0.95), k2) / n).epsilon(1e-12));
  }

  // k → ∞: the per-use rate decreases monotonically toward Ẽ.
  const double e_inf = std::log2(0.85 / 0.5);
  double prev = kInf;
  for (int n = 1; n <= 100; ++n) {
    const double rate = interleaved_bound(depolarizing(0.15, n, 0.05, kinf)).rate_bound;
    CHECK(rate >= 0.0);
    CHECK(rate < prev);
    CHECK(rate > e_inf);
    prev = rate;
  }
  CHECK(prev - e_inf < 1e-3);

  CHECK_THROWS_AS(interleaved_bound(erasure(0.15, 1, 0.05, k2)), std::invalid_argument);
}

TEST_CASE("antidegradable bound") {
  for (int n : {1, 7}) CHECK(antidegradable_bound(n, 0.0).rate_bound == 0.0);
  CHECK(antidegradable_bound(1, 0.05).rate_bound == doctest::Approx(std::log2(1 / 0.9)).epsilon(1e-14));
  CHECK(antidegradable_bound(10, 0.25).rate_bound == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(antidegradable_bound(1, 0.05).method == BoundMethod::Antidegradable);
  CHECK_THROWS_AS(antidegradable_bound(1, 0.5), std::invalid_argument);
}

TEST_CASE("optimize_k") {
  for (auto kind : {ChannelKind::Depolarizing, ChannelKind::Erasure}) {
    const ChannelSpec channel(kind, kind == ChannelKind::Depolarizing ? 0.15 : 0.35);
    for (int n : {1, 2, 5, 20, 45}) {
      const auto best = optimize_k(channel, n, 0.05, 5);
      const auto limit = channel_bound({channel, n, 0.05, kinf, std::nullopt});
      // Candidates within round-off of each other count as ties (n = 1 is an exact tie).
      CHECK(best.rate_bound <= limit.rate_bound + 1e-12);
      for (int k = 2; k <= 5; ++k)
        CHECK(best.rate_bound <=
              channel_bound({channel, n, 0.05, ExtensionOrder::finite(k), std::nullopt}).rate_bound + 1e-12);
      double prev = kInf;
      for (int k_max : {2, 3, 5, 8, 16, 40}) {
        const double rate = optimize_k(channel, n, 0.05, k_max).rate_bound;
        CHECK(rate <= prev + 1e-12);
        prev = rate;
      }
    }
  }
  // n = 1 ties the limit exactly; the smaller k wins the tie.
  const auto one = optimize_k({ChannelKind::Depolarizing, 0.15}, 1, 0.05, 5);
  CHECK_FALSE(one.k_used.is_infinite());
  CHECK(one.k_used.value() == 2);
  CHECK_THROWS_AS(optimize_k({ChannelKind::Depolarizing, 0.15}, 1, 0.05, 1), std::invalid_argument);

  // Large k_max switches to the grid search and still returns a valid candidate.
  const auto wide = optimize_k({ChannelKind::Depolarizing, 0.15}, 30, 0.05, 1000);
  CHECK(wide.rate_bound <= optimize_k({ChannelKind::Depolarizing, 0.15}, 30, 0.05, 2).rate_bound);
}
