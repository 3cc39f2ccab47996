#include "unext/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace unext {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAdmissibleSlack = 1e-12;
// Below this k_max every order is scanned, so the optimum is non-increasing in k_max.
constexpr int kExhaustiveOrders = 256;

void require_query(const BoundQuery& q) {
  if (q.n < 1) throw std::invalid_argument("bound: n must be >= 1");
  if (!(q.eps >= 0.0 && q.eps < 1.0)) throw std::invalid_argument("bound: eps must lie in [0, 1)");
}

BoundResult finish(double divergence, const BoundQuery& q, double sigma, SigmaProvenance prov) {
  BoundResult r;
  r.divergence = divergence;
  r.rate_bound = max_log_dimension(divergence, q.k) / q.n;
  r.k_used = q.k;
  r.sigma_param_used = sigma;
  r.method = q.k.is_infinite() ? BoundMethod::LimitKInf : BoundMethod::PostProcessing;
  r.provenance = prov;
  r.n = q.n;
  return r;
}

double isotropic_parameter(const ExtensionOrder& k, const ThresholdTable& table) {
  return k.is_infinite() ? 0.5 : table.value(k);
}

}  // namespace

ExtensionOrder ExtensionOrder::finite(int k) {
  if (k < 2) throw std::invalid_argument("extension order k must be >= 2");
  return ExtensionOrder(k);
}

int ExtensionOrder::value() const {
  if (is_infinite()) throw std::logic_error("ExtensionOrder: infinite order has no integer value");
  return k_;
}

std::string ExtensionOrder::to_string() const { return is_infinite() ? "inf" : std::to_string(k_); }

std::string_view to_string(BoundMethod m) {
  switch (m) {
    case BoundMethod::PostProcessing:
      return "Thm2";
    case BoundMethod::Interleaved:
      return "Thm3";
    case BoundMethod::LimitKInf:
      return "LimitKInf";
    case BoundMethod::Antidegradable:
      return "Antidegradable";
  }
  return "Thm2";
}

std::string_view to_string(SigmaProvenance s) {
  switch (s) {
    case SigmaProvenance::Fixture:
      return "fixture";
    case SigmaProvenance::Interpolated:
      return "interpolated";
    case SigmaProvenance::Certificate:
      return "certificate";
    case SigmaProvenance::Limit:
      return "limit";
    case SigmaProvenance::Override:
      return "override";
    case SigmaProvenance::None:
      return "none";
  }
  return "none";
}

ThresholdTable ThresholdTable::fixture() {
  // Feasible end of threshold_bisect brackets at resolution 1e-4 (tol 1e-7):
  // each value carries a solver certificate.
  return ThresholdTable({0.75, 0.6666259765625, 0.625, 0.5999755859375});
}

ThresholdTable::ThresholdTable(std::array<double, kLastOrder - kFirstOrder + 1> values) : values_(values) {
  double prev = 1.0;
  for (double v : values_) {
    if (!(v > 0.5 && v < prev)) throw std::invalid_argument("ThresholdTable: values must decrease strictly within (1/2, 1)");
    prev = v;
  }
}

double ThresholdTable::value(ExtensionOrder k) const {
  if (k.is_infinite()) return 0.5;
  const int order = k.value();
  if (order <= kLastOrder) return values_[static_cast<std::size_t>(order - kFirstOrder)];
  const double last = values_.back();
  return 0.5 + (last - 0.5) * kLastOrder / order;
}

SigmaProvenance ThresholdTable::provenance(ExtensionOrder k) const {
  if (k.is_infinite()) return SigmaProvenance::Limit;
  return k.value() <= kLastOrder ? SigmaProvenance::Fixture : SigmaProvenance::Interpolated;
}

bool BoundResult::vacuous() const { return std::isinf(rate_bound); }

double max_log_dimension(double divergence, ExtensionOrder k) {
  if (std::isnan(divergence) || divergence < 0.0) throw std::invalid_argument("max_log_dimension: D must be >= 0");
  if (k.is_infinite()) return divergence;
  const double inv_k = 1.0 / k.value();
  const double f = std::exp2(-divergence);
  if (f <= inv_k) return kInf;
  return std::max(0.0, std::log2((1.0 - inv_k) / (f - inv_k)));
}

BoundResult depolarizing_bound(const BoundQuery& q, const ThresholdTable& table) {
  require_query(q);
  if (q.channel.kind != ChannelKind::Depolarizing) throw std::invalid_argument("depolarizing_bound: wrong channel kind");
  const double t_max = isotropic_parameter(q.k, table);
  double t = t_max;
  SigmaProvenance prov = table.provenance(q.k);
  if (q.sigma_param) {
    t = *q.sigma_param;
    if (!(t >= 0.0 && t <= t_max + kAdmissibleSlack))
      throw std::invalid_argument("depolarizing_bound: sigma parameter t exceeds the k-extendible threshold");
    prov = SigmaProvenance::Override;
  }
  const auto np = np_divergence({1.0 - q.channel.p, t, q.n}, q.eps);
  return finish(np.divergence(), q, t, prov);
}

BoundResult erasure_bound(const BoundQuery& q) {
  require_query(q);
  if (q.channel.kind != ChannelKind::Erasure) throw std::invalid_argument("erasure_bound: wrong channel kind");
  const double q_min = q.k.is_infinite() ? 1.0 : 1.0 - 1.0 / q.k.value();
  double mix = q_min;
  SigmaProvenance prov = q.k.is_infinite() ? SigmaProvenance::Limit : SigmaProvenance::Certificate;
  if (q.sigma_param) {
    mix = *q.sigma_param;
    if (!(mix >= q_min - kAdmissibleSlack && mix <= 1.0))
      throw std::invalid_argument("erasure_bound: sigma parameter q below 1 - 1/k is not k-extendible");
    prov = SigmaProvenance::Override;
  }
  const auto np = np_divergence({1.0 - q.channel.p, std::max(0.0, 1.0 - mix), q.n}, q.eps);
  return finish(np.divergence(), q, mix, prov);
}

BoundResult channel_bound(const BoundQuery& q, const ThresholdTable& table) {
  return q.channel.kind == ChannelKind::Depolarizing ? depolarizing_bound(q, table) : erasure_bound(q);
}

double bell_diagonal_dh(const BellSpectrum& spectrum, double t, int n, double eps) {
  if (n < 1) throw std::invalid_argument("bell_diagonal_dh: n must be >= 1");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("bell_diagonal_dh: t must lie in [0,1]");
  auto wlog = [](int count, double x) { return count == 0 ? 0.0 : count * std::log(x); };
  const double rest = (1.0 - t) / 3.0;
  std::vector<LogOutcome> classes;
  int label = 0;
  for (int a = 0; a <= n; ++a)
    for (int b = 0; a + b <= n; ++b)
      for (int c = 0; a + b + c <= n; ++c) {
        const int d = n - a - b - c;
        const double log_multinomial =
            std::lgamma(n + 1.0) - std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(c + 1.0) - std::lgamma(d + 1.0);
        const double lp = log_multinomial + wlog(a, spectrum[0]) + wlog(b, spectrum[1]) + wlog(c, spectrum[2]) +
                          wlog(d, spectrum[3]);
        const double lq = log_multinomial + wlog(a, t) + wlog(n - a, rest);
        classes.push_back({lp, lq, label++});
      }
  return neyman_pearson_fill(std::move(classes), eps).divergence();
}

BoundResult distillation_bound_bell_diagonal(const BellSpectrum& spectrum, int n, double eps, ExtensionOrder k,
                                             const ThresholdTable& table) {
  double total = 0.0;
  for (double x : spectrum) {
    if (!(x >= 0.0)) throw std::invalid_argument("distillation bound: negative Bell weight");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("distillation bound: Bell weights must sum to 1");

  const double t = isotropic_parameter(k, table);
  const bool isotropic_type = std::abs(spectrum[1] - spectrum[2]) <= 1e-12 && std::abs(spectrum[2] - spectrum[3]) <= 1e-12;
  const BoundQuery q{ChannelSpec(ChannelKind::Depolarizing, 1.0 - spectrum[0]), n, eps, k, std::nullopt};
  require_query(q);
  const double divergence = isotropic_type ? np_divergence({spectrum[0], t, n}, eps).divergence()
                                           : bell_diagonal_dh(spectrum, t, n, eps);
  return finish(divergence, q, t, table.provenance(k));
}

BoundResult interleaved_bound(const BoundQuery& q, const ThresholdTable& table) {
  require_query(q);
  if (q.channel.kind != ChannelKind::Depolarizing)
    throw std::invalid_argument("interleaved_bound: only the depolarizing channel is supported");
  const double p = q.channel.p;
  // max(log₂((1−p)/t), log₂(p/(1−t))) is minimized over t ≤ t* at min(t*, 1−p).
  const double t = std::min(isotropic_parameter(q.k, table), 1.0 - p);
  const double e_max = std::max(0.0, d_max_commuting(depolarizing_choi(p), isotropic(t, 2)));
  const double divergence = q.n * e_max + std::log2(1.0 / (1.0 - q.eps));
  BoundResult r = finish(divergence, q, t, table.provenance(q.k));
  r.method = BoundMethod::Interleaved;
  return r;
}

BoundResult antidegradable_bound(int n, double eps) {
  if (n < 1) throw std::invalid_argument("antidegradable_bound: n must be >= 1");
  if (!(eps >= 0.0 && eps < 0.5)) throw std::invalid_argument("antidegradable_bound: eps must lie in [0, 1/2)");
  BoundResult r;
  r.rate_bound = std::log2(1.0 / (1.0 - 2.0 * eps)) / n;
  r.k_used = ExtensionOrder::finite(2);
  r.method = BoundMethod::Antidegradable;
  r.divergence = std::log2(1.0 / (1.0 - eps));
  r.n = n;
  return r;
}

BoundResult optimize_k(const ChannelSpec& channel, int n, double eps, int k_max, const ThresholdTable& table) {
  if (k_max < 2) throw std::invalid_argument("optimize_k: k_max must be >= 2");
  auto evaluate = [&](ExtensionOrder k) { return channel_bound({channel, n, eps, k, std::nullopt}, table); };

  std::set<int> candidates;
  if (k_max <= kExhaustiveOrders) {
    for (int k = 2; k <= k_max; ++k) candidates.insert(k);
  } else {
    std::set<int> grid;
    for (int k = 2; k <= k_max; k *= 2) grid.insert(k);
    grid.insert(k_max);
    int grid_best = 2;
    double grid_best_rate = kInf;
    for (int k : grid) {
      const double rate = evaluate(ExtensionOrder::finite(k)).rate_bound;
      if (rate < grid_best_rate) grid_best = k, grid_best_rate = rate;
    }
    candidates = grid;
    for (int k = std::max(2, grid_best / 2); k <= std::min(k_max, 2 * grid_best); ++k) candidates.insert(k);
  }

  // Ascending k, ∞ last; a later candidate must win by more than round-off.
  BoundResult best = evaluate(ExtensionOrder::finite(*candidates.begin()));
  auto consider = [&](const BoundResult& r) {
    if (r.rate_bound < best.rate_bound - 1e-12 * std::max(1.0, std::abs(best.rate_bound)) ||
        (std::isinf(best.rate_bound) && !std::isinf(r.rate_bound)))
      best = r;
  };
  for (int k : candidates) consider(evaluate(ExtensionOrder::finite(k)));
  consider(evaluate(ExtensionOrder::infinite()));
  return best;
}

}  // namespace unext
