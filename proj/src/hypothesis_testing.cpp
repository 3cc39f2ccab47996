#include "unext/hypothesis_testing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace unext {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_eps(double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in [0, 1)");
}

// Neumaier variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

double log_ratio(const LogOutcome& o) { return o.log_q == -kInf ? kInf : o.log_p - o.log_q; }

bool same_ratio(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
}

// w·log(x) with the convention 0·log 0 = 0.
double weighted_log(int w, double x) { return w == 0 ? 0.0 : w * std::log(x); }

}  // namespace

BinaryHypothesisPair::BinaryHypothesisPair(double p, double t, int copies) : p_success(p), t_success(t), n(copies) {
  if (!(p >= 0.0 && p <= 1.0) || !(t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("BinaryHypothesisPair: probabilities must lie in [0,1]");
  if (copies < 1) throw std::invalid_argument("BinaryHypothesisPair: n must be >= 1");
}

double NPResult::beta() const { return std::exp2(log2_beta); }
bool NPResult::infinite() const { return log2_beta == -kInf; }

NPResult neyman_pearson_fill(std::vector<LogOutcome> outcomes, double eps) {
  require_eps(eps);
  std::erase_if(outcomes, [](const LogOutcome& o) { return o.log_p == -kInf; });
  if (outcomes.empty()) throw std::invalid_argument("neyman_pearson_fill: P has no mass");
  std::stable_sort(outcomes.begin(), outcomes.end(), [](const LogOutcome& a, const LogOutcome& b) {
    const double ra = log_ratio(a), rb = log_ratio(b);
    if (ra != rb) return ra > rb;
    return a.label < b.label;
  });

  std::vector<LogOutcome> classes;
  for (const auto& o : outcomes) {
    if (!classes.empty() && same_ratio(log_ratio(classes.back()), log_ratio(o))) {
      auto& c = classes.back();
      c.log_p = log_add(c.log_p, o.log_p);
      c.log_q = log_add(c.log_q, o.log_q);
      c.label = std::min(c.label, o.label);
    } else {
      classes.push_back(o);
    }
  }

  // tail[i] = P-mass of classes i.. . Filling is decided on the tail (mass
  // still rejectable minus ε) so that ε = 0 accepts every class exactly.
  std::vector<double> tail(classes.size() + 1, 0.0);
  CompensatedSum from_end;
  for (std::size_t i = classes.size(); i-- > 0;) {
    from_end.add(std::exp(classes[i].log_p));
    tail[i] = from_end.value();
  }

  double log_beta = -kInf;
  NPResult out;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto& c = classes[i];
    const double mass = tail[i] - tail[i + 1];
    if (tail[i + 1] > eps) {
      log_beta = log_add(log_beta, c.log_q);
      continue;
    }
    const double gamma = std::clamp((tail[i] - eps) / mass, 0.0, 1.0);
    if (gamma > 0.0) log_beta = log_add(log_beta, std::log(gamma) + c.log_q);
    out.threshold_weight = c.label;
    out.gamma = gamma;
    out.achieved_type1 = std::max(0.0, tail[i + 1] + (1.0 - gamma) * mass);
    break;
  }
  out.log2_beta = log_beta == -kInf ? -kInf : std::min(0.0, log_beta / std::numbers::ln2);
  return out;
}

NPResult np_divergence(const BinaryHypothesisPair& hyp, double eps) {
  require_eps(eps);
  const int n = hyp.n;
  const double p = hyp.p_success, t = hyp.t_success;
  std::vector<LogOutcome> classes;
  classes.reserve(static_cast<std::size_t>(n) + 1);
  double log_binom = 0.0;  // log C(n, w) by additive recurrence
  for (int w = 0; w <= n; ++w) {
    if (w > 0) log_binom += std::log(static_cast<double>(n - w + 1)) - std::log(static_cast<double>(w));
    const double lp = log_binom + weighted_log(w, p) + weighted_log(n - w, 1.0 - p);
    const double lq = log_binom + weighted_log(w, t) + weighted_log(n - w, 1.0 - t);
    classes.push_back({lp, lq, w});
  }
  // Both distributions sum to 1 exactly; dividing out the computed totals removes
  // the drift the recurrence shares between P and Q.
  CompensatedSum total_p, total_q;
  for (const auto& c : classes) total_p.add(std::exp(c.log_p)), total_q.add(std::exp(c.log_q));
  const double log_total_p = std::log(total_p.value()), log_total_q = std::log(total_q.value());
  for (auto& c : classes) c.log_p -= log_total_p, c.log_q -= log_total_q;
  return neyman_pearson_fill(std::move(classes), eps);
}

double np_oracle_outcomes(const std::vector<JointOutcome>& outcomes, double eps) {
  require_eps(eps);
  const std::size_t m = outcomes.size();
  if (m == 0 || m > 16) throw std::invalid_argument("np_oracle_outcomes: supports 1..16 outcomes");
  double best = kInf;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    // P-mass left outside the fully accepted set, summed directly.
    double q_sum = 0.0, rest_p = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (1u << i))
        q_sum += outcomes[i].q;
      else
        rest_p += outcomes[i].p;
    }
    if (rest_p <= eps) {
      best = std::min(best, q_sum);
      continue;
    }
    for (std::size_t j = 0; j < m; ++j) {
      if ((mask & (1u << j)) || outcomes[j].p <= 0.0) continue;
      const double gamma = (rest_p - eps) / outcomes[j].p;
      if (gamma <= 1.0) best = std::min(best, q_sum + gamma * outcomes[j].q);
    }
  }
  if (best == kInf) throw std::logic_error("np_oracle_outcomes: no feasible test");
  return best <= 0.0 ? -kInf : std::log2(best);
}

double np_oracle(const BinaryHypothesisPair& hyp, double eps) {
  if (hyp.n > 10) throw std::invalid_argument("np_oracle: n must be <= 10");
  std::vector<JointOutcome> classes;
  double binom = 1.0;
  for (int w = 0; w <= hyp.n; ++w) {
    if (w > 0) binom = binom * (hyp.n - w + 1) / w;
    classes.push_back({binom * std::pow(hyp.p_success, w) * std::pow(1.0 - hyp.p_success, hyp.n - w),
                       binom * std::pow(hyp.t_success, w) * std::pow(1.0 - hyp.t_success, hyp.n - w)});
  }
  return np_oracle_outcomes(classes, eps);
}

std::vector<JointOutcome> joint_spectrum(const DensityMatrixd& rho, const DensityMatrixd& sigma,
                                         const Tolerances& tol) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("joint_spectrum: dimension mismatch");
  const Eigen::MatrixXcd& r = rho.matrix();
  const Eigen::MatrixXcd& s = sigma.matrix();
  if (max_abs_entry(r * s - s * r) > tol.commutation)
    throw std::invalid_argument("joint_spectrum: states do not commute");

  const auto er = eig_hermitian(r, tol);
  const Eigen::Index n = r.rows();
  std::vector<JointOutcome> out;
  out.reserve(static_cast<std::size_t>(n));
  auto clean = [&](double x) { return x <= tol.zero_eigenvalue ? 0.0 : x; };
  // σ is block diagonal on the eigenspaces of ρ; diagonalize each block.
  for (Eigen::Index begin = 0; begin < n;) {
    Eigen::Index end = begin + 1;
    while (end < n && er.eigenvalues(end) - er.eigenvalues(end - 1) <= 1e-10) ++end;
    const Eigen::MatrixXcd v = er.eigenvectors.middleCols(begin, end - begin);
    const auto es = eig_hermitian(hermitize(v.adjoint() * s * v), tol);
    const Eigen::MatrixXcd joint = v * es.eigenvectors;
    for (Eigen::Index i = 0; i < joint.cols(); ++i) {
      const double pi = std::real(joint.col(i).dot(r * joint.col(i)));
      out.push_back({clean(pi), clean(es.eigenvalues(i))});
    }
    begin = end;
  }
  return out;
}

std::vector<JointOutcome> tensor_power_spectrum(const std::vector<JointOutcome>& single, int n) {
  if (n < 1) throw std::invalid_argument("tensor_power_spectrum: n must be >= 1");
  if (std::pow(static_cast<double>(single.size()), n) > static_cast<double>(1u << 22))
    throw std::invalid_argument("tensor_power_spectrum: product spectrum too large");
  std::vector<JointOutcome> out{{1.0, 1.0}};
  for (int i = 0; i < n; ++i) {
    std::vector<JointOutcome> next;
    next.reserve(out.size() * single.size());
    for (const auto& a : out)
      for (const auto& b : single) next.push_back({a.p * b.p, a.q * b.q});
    out = std::move(next);
  }
  return out;
}

double dh_from_spectrum(const std::vector<JointOutcome>& outcomes, double eps) {
  std::vector<LogOutcome> logs;
  logs.reserve(outcomes.size());
  int label = 0;
  for (const auto& o : outcomes) {
    if (o.p < 0.0 || o.q < 0.0) throw std::invalid_argument("dh_from_spectrum: negative weight");
    logs.push_back({o.p > 0.0 ? std::log(o.p) : -kInf, o.q > 0.0 ? std::log(o.q) : -kInf, label++});
  }
  return neyman_pearson_fill(std::move(logs), eps).divergence();
}

double commuting_dh(const DensityMatrixd& rho, const DensityMatrixd& sigma, double eps) {
  return dh_from_spectrum(joint_spectrum(rho, sigma), eps);
}

double commuting_dh_tensor_power(const DensityMatrixd& rho, const DensityMatrixd& sigma, int n, double eps) {
  return dh_from_spectrum(tensor_power_spectrum(joint_spectrum(rho, sigma), n), eps);
}

double d_max_commuting(const DensityMatrixd& rho, const DensityMatrixd& sigma) {
  double out = -kInf;
  for (const auto& o : joint_spectrum(rho, sigma)) {
    if (o.p <= 0.0) continue;
    if (o.q <= 0.0) return kInf;
    out = std::max(out, std::log2(o.p / o.q));
  }
  return out;
}

}  // namespace unext
