#include "unext/extendibility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace unext {
namespace {

using Index = Eigen::Index;

// Index maps for permutations of the B copies, with A fixed in slot 0.
class ExtensionSpace {
 public:
  ExtensionSpace(int d_a, int d_b, int k) : d_a_(d_a), d_b_(d_b), k_(k), dims_(SubsystemDims::extension(d_a, d_b, k)) {
    if (k < 1) throw std::invalid_argument("extension order must be >= 1");
  }

  const SubsystemDims& dims() const { return dims_; }
  Index dim() const { return dims_.total(); }
  int k() const { return k_; }
  int d_a() const { return d_a_; }
  int d_b() const { return d_b_; }

  std::vector<Index> map_for(const std::vector<int>& b_perm) const {
    std::vector<int> full(b_perm.size() + 1);
    full[0] = 0;
    for (std::size_t j = 0; j < b_perm.size(); ++j) full[j + 1] = b_perm[j] + 1;
    return detail::permutation_index_map(dims_, full);
  }

  std::vector<Index> transposition(int i, int j) const {
    std::vector<int> p(static_cast<std::size_t>(k_));
    std::iota(p.begin(), p.end(), 0);
    std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    return map_for(p);
  }

  const std::vector<std::vector<Index>>& group_maps() const {
    if (group_.empty()) {
      std::vector<int> p(static_cast<std::size_t>(k_));
      std::iota(p.begin(), p.end(), 0);
      do group_.push_back(map_for(p));
      while (std::next_permutation(p.begin(), p.end()));
    }
    return group_;
  }

  // Transpositions (j l) for j < l, grouped by l, for the coset recursion.
  const std::vector<std::vector<std::vector<Index>>>& coset_maps() const {
    if (cosets_.empty()) {
      for (int l = 1; l < k_; ++l) {
        std::vector<std::vector<Index>> level;
        for (int j = 0; j < l; ++j) level.push_back(transposition(j, l));
        cosets_.push_back(std::move(level));
      }
    }
    return cosets_;
  }

 private:
  int d_a_, d_b_, k_;
  SubsystemDims dims_;
  mutable std::vector<std::vector<Index>> group_;
  mutable std::vector<std::vector<std::vector<Index>>> cosets_;
};

void accumulate_conjugated(const Eigen::MatrixXcd& m, const std::vector<Index>& map, Eigen::MatrixXcd& out) {
  const Index n = m.rows();
  for (Index c = 0; c < n; ++c)
    for (Index r = 0; r < n; ++r) out(map[r], map[c]) += m(r, c);
}

Eigen::MatrixXcd average_full(const ExtensionSpace& space, const Eigen::MatrixXcd& m) {
  const auto& maps = space.group_maps();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m.rows(), m.cols());
  for (const auto& map : maps) accumulate_conjugated(m, map, out);
  return out / static_cast<double>(maps.size());
}

Eigen::MatrixXcd average_cosets(const ExtensionSpace& space, const Eigen::MatrixXcd& m) {
  Eigen::MatrixXcd cur = m;
  for (const auto& level : space.coset_maps()) {
    Eigen::MatrixXcd next = cur;  // identity coset representative
    for (const auto& map : level) accumulate_conjugated(cur, map, next);
    cur = next / static_cast<double>(level.size() + 1);
  }
  return cur;
}

Eigen::MatrixXcd average(const ExtensionSpace& space, const Eigen::MatrixXcd& m) {
  return space.k() <= 4 ? average_full(space, m) : average_cosets(space, m);
}

void require_shape(const Eigen::MatrixXcd& omega, const ExtensionSpace& space) {
  if (omega.rows() != space.dim() || omega.cols() != space.dim())
    throw std::invalid_argument("extension matrix does not match dims [d_A, d_B^k]");
}

std::pair<int, int> bipartite_dims(const DensityMatrixd& rho) {
  if (rho.dims().size() != 2) throw std::invalid_argument("expected a bipartite state with dims [d_A, d_B]");
  return {rho.dims()[0], rho.dims()[1]};
}

Eigen::MatrixXcd marginal_ab1(const ExtensionSpace& space, const Eigen::MatrixXcd& omega) {
  return partial_trace(omega, space.dims(), {0, 1});
}

Eigen::MatrixXcd affine_project_in(const ExtensionSpace& space, const Eigen::MatrixXcd& omega,
                                   const Eigen::MatrixXcd& rho) {
  const int k = space.k();
  const int d_b = space.d_b();
  const auto rest = static_cast<Index>(std::pow(d_b, k - 1));
  const SubsystemDims ab{space.d_a(), d_b};
  const Eigen::MatrixXcd eye_b = Eigen::MatrixXcd::Identity(d_b, d_b);
  const Eigen::MatrixXcd eye_rest = Eigen::MatrixXcd::Identity(rest, rest);

  Eigen::MatrixXcd out = hermitize(omega);
  for (int pass = 0; pass < 5; ++pass) {
    out = average(space, out);
    const Eigen::MatrixXcd delta = rho - marginal_ab1(space, out);
    const Eigen::MatrixXcd delta_a = partial_trace(delta, ab, {0});
    // Solves Tr_{B2..Bk} Sym(Y ⊗ I) = Δ, i.e. (1/k)[d^{k-1} Y + (k-1) d^{k-2} Tr_B(Y) ⊗ I] = Δ.
    const Eigen::MatrixXcd y =
        (static_cast<double>(k) * delta - (static_cast<double>(k - 1) / d_b) * kron(delta_a, eye_b)) /
        static_cast<double>(rest);
    out = hermitize(out + average(space, kron(y, eye_rest)));

    const double marginal_err = max_abs_entry(marginal_ab1(space, out) - rho);
    const double sym_err = max_abs_entry(average(space, out) - out);
    if (std::max(marginal_err, sym_err) <= 1e-12) return out;
  }
  throw NumericalError("affine_project: correction did not reach 1e-12");
}

}  // namespace

std::string_view to_string(ExtendibilityStatus s) {
  switch (s) {
    case ExtendibilityStatus::Feasible:
      return "Feasible";
    case ExtendibilityStatus::InfeasibleSignal:
      return "InfeasibleSignal";
    case ExtendibilityStatus::Inconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

Eigen::MatrixXcd symmetrize(const Eigen::MatrixXcd& omega, int d_a, int d_b, int k) {
  const ExtensionSpace space(d_a, d_b, k);
  require_shape(omega, space);
  return average(space, omega);
}

Eigen::MatrixXcd symmetrize_full_group(const Eigen::MatrixXcd& omega, int d_a, int d_b, int k) {
  const ExtensionSpace space(d_a, d_b, k);
  require_shape(omega, space);
  return average_full(space, omega);
}

Eigen::MatrixXcd symmetrize_cosets(const Eigen::MatrixXcd& omega, int d_a, int d_b, int k) {
  const ExtensionSpace space(d_a, d_b, k);
  require_shape(omega, space);
  return average_cosets(space, omega);
}

Eigen::MatrixXcd affine_project(const Eigen::MatrixXcd& omega, const DensityMatrixd& rho, int k) {
  const auto [d_a, d_b] = bipartite_dims(rho);
  const ExtensionSpace space(d_a, d_b, k);
  require_shape(omega, space);
  return affine_project_in(space, omega, rho.matrix());
}

double CertificateResiduals::worst() const {
  return std::max({negative_part, asymmetry, marginal_error, trace_error});
}

CertificateResiduals certificate_residuals(const Eigen::MatrixXcd& omega, const DensityMatrixd& rho, int k) {
  const auto [d_a, d_b] = bipartite_dims(rho);
  const ExtensionSpace space(d_a, d_b, k);
  require_shape(omega, space);
  CertificateResiduals out;
  const auto e = eig_hermitian(hermitize(omega));
  out.negative_part = negative_part_norm(e);
  out.min_eigenvalue = e.eigenvalues(0);
  // Adjacent transpositions generate S_k, so checking them suffices.
  for (int i = 0; i + 1 < k; ++i) {
    const Eigen::MatrixXcd moved = permute_subsystems(omega, space.dims(), [&] {
      std::vector<int> p(static_cast<std::size_t>(k) + 1);
      std::iota(p.begin(), p.end(), 0);
      std::swap(p[static_cast<std::size_t>(i) + 1], p[static_cast<std::size_t>(i) + 2]);
      return p;
    }());
    out.asymmetry = std::max(out.asymmetry, max_abs_entry(moved - omega));
  }
  out.marginal_error = max_abs_entry(partial_trace(omega, space.dims(), {0, 1}) - rho.matrix());
  out.trace_error = std::abs(omega.trace() - std::complex<double>(1.0));
  return out;
}

ExtendibilityVerdict check_k_extendible(const ExtensionProblem& problem) {
  const auto [d_a, d_b] = bipartite_dims(problem.rho);
  if (problem.k < 2) throw std::invalid_argument("check_k_extendible: k must be >= 2");
  if (!(problem.tol > 0.0)) throw std::invalid_argument("check_k_extendible: tol must be positive");
  if (problem.max_iter < 1) throw std::invalid_argument("check_k_extendible: max_iter must be >= 1");
  const double size = static_cast<double>(d_a) * std::pow(static_cast<double>(d_b), problem.k);
  if (size > static_cast<double>(kMaxExtensionDim))
    throw std::invalid_argument("check_k_extendible: d_A * d_B^k exceeds the solver scale guard (4096)");

  const ExtensionSpace space(d_a, d_b, problem.k);
  const Eigen::MatrixXcd& rho = problem.rho.matrix();
  const auto rest = static_cast<Index>(std::pow(d_b, problem.k - 1));
  const Eigen::MatrixXcd start = kron(rho, Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(rest, rest) / double(rest)));

  constexpr int kStableWindow = 200;
  constexpr double kStableRelChange = 1e-6;
  constexpr int kExactResidualEvery = 25;

  ExtendibilityVerdict verdict;
  Eigen::MatrixXcd x = affine_project_in(space, start, rho);
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(x.rows(), x.cols());  // PSD-step correction
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(x.rows(), x.cols());  // affine-step correction

  auto finish_feasible = [&](double residual, int iter) {
    verdict.status = ExtendibilityStatus::Feasible;
    verdict.certificate = x;
    verdict.residual = residual;
    verdict.iterations = iter;
    return verdict;
  };

  {
    const double r0 = negative_part_norm(eig_hermitian(x));
    if (r0 <= problem.tol) return finish_feasible(r0, 0);
  }

  double prev_dist = -1.0;
  int stable = 0;
  for (int iter = 1; iter <= problem.max_iter; ++iter) {
    const Eigen::MatrixXcd y = psd_project(x + p);
    p = x + p - y;
    const Eigen::MatrixXcd x_next = affine_project_in(space, y + q, rho);
    q = y + q - x_next;
    x = x_next;

    // y is PSD, so ‖x − y‖ bounds the distance of x from the PSD cone.
    const double dist = (x - y).norm();
    verdict.residual = dist;
    verdict.iterations = iter;
    if (dist <= problem.tol) return finish_feasible(dist, iter);
    if (iter % kExactResidualEvery == 0) {
      const double r = negative_part_norm(eig_hermitian(x));
      if (r <= problem.tol) return finish_feasible(r, iter);
    }

    if (prev_dist > 0.0 && dist > 10.0 * problem.tol && std::abs(dist - prev_dist) <= kStableRelChange * dist)
      ++stable;
    else
      stable = 0;
    prev_dist = dist;
    if (stable >= kStableWindow) {
      verdict.status = ExtendibilityStatus::InfeasibleSignal;
      return verdict;
    }
  }
  verdict.status = ExtendibilityStatus::Inconclusive;
  return verdict;
}

ThresholdBracket threshold_bisect(const std::function<DensityMatrixd(double)>& family, int k, double feasible_end,
                                  double infeasible_end, const BisectOptions& options) {
  if (!(options.resolution > 0.0)) throw std::invalid_argument("threshold_bisect: resolution must be positive");
  auto verdict_at = [&](double param) {
    return check_k_extendible({family(param), k, options.tol, options.max_iter}).status;
  };
  if (verdict_at(feasible_end) != ExtendibilityStatus::Feasible)
    throw std::invalid_argument("threshold_bisect: feasible endpoint is not Feasible");
  if (verdict_at(infeasible_end) != ExtendibilityStatus::InfeasibleSignal)
    throw std::invalid_argument("threshold_bisect: infeasible endpoint is not InfeasibleSignal");

  ThresholdBracket b{feasible_end, infeasible_end};
  while (std::abs(b.infeasible - b.feasible) > options.resolution) {
    const double mid = 0.5 * (b.feasible + b.infeasible);
    if (verdict_at(mid) == ExtendibilityStatus::Feasible)
      b.feasible = mid;
    else
      b.infeasible = mid;
  }
  return b;
}

Eigen::MatrixXcd erasure_certificate(int k) {
  if (k < 2) throw std::invalid_argument("erasure_certificate: k must be >= 2");
  const auto dims = SubsystemDims::extension(2, 3, k);
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(6);
  phi(0) = phi(4) = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd flag = Eigen::MatrixXcd::Zero(3, 3);
  flag(2, 2) = 1.0;
  // Φ on A B_1, flags on B_2..B_k.
  Eigen::MatrixXcd base = projector(phi);
  for (int i = 1; i < k; ++i) base = kron(base, flag);

  Eigen::MatrixXcd out = base;
  for (int i = 2; i <= k; ++i) {
    std::vector<int> swap_1i(static_cast<std::size_t>(k) + 1);
    std::iota(swap_1i.begin(), swap_1i.end(), 0);
    std::swap(swap_1i[1], swap_1i[static_cast<std::size_t>(i)]);
    out += permute_subsystems(base, dims, swap_1i);
  }
  return out / static_cast<double>(k);
}

DensityMatrixd twirl_uu(const DensityMatrixd& rho) {
  const auto& dims = rho.dims();
  if (dims.size() != 2 || dims[0] != dims[1]) throw std::invalid_argument("twirl_uu: needs dims [d, d]");
  return isotropic(std::clamp(entanglement_fidelity(rho), 0.0, 1.0), dims[0]);
}

}  // namespace unext
