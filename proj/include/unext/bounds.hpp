#pragma once

// Converse bounds on entanglement transmission and distillation assisted by
// k-extendible channels. For a (1, M, ε) protocol and any k-extendible σ,
//
//   −log₂[1/M + 1/k − 1/(Mk)] ≤ D_h^ε(τ‖σ),
//
// which is inverted for log₂M. The depolarizing and erasure channels reduce to
// binary Neyman–Pearson problems on n copies.

#include "unext/hypothesis_testing.hpp"
#include "unext/states.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace unext {

/// Extension order k ≥ 2, or the k → ∞ limit.
class ExtensionOrder {
 public:
  static ExtensionOrder finite(int k);
  static ExtensionOrder infinite() { return ExtensionOrder(0); }

  bool is_infinite() const { return k_ == 0; }
  int value() const;  // throws for the infinite order
  std::string to_string() const;

  friend bool operator==(ExtensionOrder, ExtensionOrder) = default;

 private:
  explicit ExtensionOrder(int k) : k_(k) {}
  int k_;
};

enum class BoundMethod { PostProcessing, Interleaved, LimitKInf, Antidegradable };

/// Output tags: "Thm2", "Thm3", "LimitKInf", "Antidegradable".
std::string_view to_string(BoundMethod m);

/// Where the σ parameter of a bound came from.
enum class SigmaProvenance {
  Fixture,       // bisected isotropic threshold with a solver certificate
  Interpolated,  // k beyond the fixture table; admissibility not verified
  Certificate,   // constructive extension (erasure family)
  Limit,         // k → ∞
  Override,      // user supplied, validated against the admissible range
  None,
};

std::string_view to_string(SigmaProvenance s);

/// Largest isotropic parameter t with isotropic(t, 2) k-extendible, per k.
class ThresholdTable {
 public:
  static constexpr int kFirstOrder = 2;
  static constexpr int kLastOrder = 5;

  /// Values recorded from threshold_bisect runs (tools/gen_thresholds).
  static ThresholdTable fixture();

  explicit ThresholdTable(std::array<double, kLastOrder - kFirstOrder + 1> values);

  /// t*(k); beyond the table, 1/2 + (t*(5) − 1/2)·5/k.
  double value(ExtensionOrder k) const;
  SigmaProvenance provenance(ExtensionOrder k) const;
  const std::array<double, kLastOrder - kFirstOrder + 1>& values() const { return values_; }

 private:
  std::array<double, kLastOrder - kFirstOrder + 1> values_;
};

struct BoundQuery {
  ChannelSpec channel;
  int n = 1;
  double eps = 0.05;
  ExtensionOrder k = ExtensionOrder::finite(2);
  std::optional<double> sigma_param;  // t (depolarizing) or q (erasure)
};

struct BoundResult {
  double rate_bound = 0.0;  // (1/n) log₂M ceiling; +∞ when vacuous
  ExtensionOrder k_used = ExtensionOrder::finite(2);
  double sigma_param_used = 0.0;
  BoundMethod method = BoundMethod::PostProcessing;
  double divergence = 0.0;  // the D value fed to the inversion
  SigmaProvenance provenance = SigmaProvenance::None;
  int n = 1;

  bool vacuous() const;
};

/// Largest log₂M allowed by −log₂[1/M + 1/k − 1/(Mk)] ≤ D:
/// log₂((1 − 1/k)/(2^{−D} − 1/k)), or +∞ once 2^{−D} ≤ 1/k. For k → ∞ it is D.
double max_log_dimension(double divergence, ExtensionOrder k);

/// σ = isotropic(t, 2)^{⊗n} with t = t*(k) unless overridden.
BoundResult depolarizing_bound(const BoundQuery& q, const ThresholdTable& table = ThresholdTable::fixture());

/// σ = erasure_family(1 − 1/k)^{⊗n} unless overridden.
BoundResult erasure_bound(const BoundQuery& q);

/// Dispatches on the channel kind.
BoundResult channel_bound(const BoundQuery& q, const ThresholdTable& table = ThresholdTable::fixture());

/// Bell-diagonal spectrum in the order (Φ+, Φ−, Ψ+, Ψ−).
using BellSpectrum = std::array<double, 4>;

/// D_h^ε(ρ^{⊗n} ‖ isotropic(t,2)^{⊗n}) for Bell-diagonal ρ, solved on multinomial
/// type classes. Valid for any Bell-diagonal spectrum.
double bell_diagonal_dh(const BellSpectrum& spectrum, double t, int n, double eps);

/// Distillation bound for n copies of a Bell-diagonal state against isotropic σ.
/// Equal non-Φ weights reduce to the binary problem; others use bell_diagonal_dh.
BoundResult distillation_bound_bell_diagonal(const BellSpectrum& spectrum, int n, double eps, ExtensionOrder k,
                                             const ThresholdTable& table = ThresholdTable::fixture());

/// Bound for protocols interleaved with k-extendible channels, using the
/// isotropic-restricted max-relative entropy of the depolarizing Choi state:
/// log₂M ≤ inversion of n·Ẽ + log₂(1/(1−ε)).
BoundResult interleaved_bound(const BoundQuery& q, const ThresholdTable& table = ThresholdTable::fixture());

/// (1/n) log₂(1/(1−2ε)) for antidegradable channels, ε ∈ [0, 1/2).
BoundResult antidegradable_bound(int n, double eps);

/// Minimum rate over k ∈ {2..k_max} ∪ {∞}. Every k is tried up to k_max = 256;
/// beyond that a doubling grid is refined around its best point. Ties go to the
/// smaller k.
BoundResult optimize_k(const ChannelSpec& channel, int n, double eps, int k_max,
                       const ThresholdTable& table = ThresholdTable::fixture());

}  // namespace unext
