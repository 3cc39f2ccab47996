#pragma once

// k-extendibility of bipartite states ρ_AB: a k-extension is a state ω on
// A B_1 ... B_k that is invariant under permutations of the B copies and whose
// A B_1 marginal is ρ. Feasibility is decided by Dykstra's alternating
// projections between the PSD cone and the affine set of symmetric extensions.

#include "unext/states.hpp"

#include <functional>
#include <optional>
#include <string_view>

namespace unext {

/// Largest d_A·d_B^k the solver accepts.
inline constexpr Eigen::Index kMaxExtensionDim = 4096;

struct ExtensionProblem {
  DensityMatrixd rho;  // dims [d_A, d_B]
  int k = 2;
  double tol = 1e-7;
  int max_iter = 50000;
};

enum class ExtendibilityStatus { Feasible, InfeasibleSignal, Inconclusive };

std::string_view to_string(ExtendibilityStatus s);

struct ExtendibilityVerdict {
  ExtendibilityStatus status = ExtendibilityStatus::Inconclusive;
  std::optional<Eigen::MatrixXcd> certificate;  // on dims [d_A, d_B, ..., d_B]
  double residual = 0.0;
  int iterations = 0;

  bool feasible() const { return status == ExtendibilityStatus::Feasible; }
};

/// Average of W_π ω W_π† over all permutations π of the k B factors. Uses the
/// full group for k <= 4 and the coset recursion for larger k.
Eigen::MatrixXcd symmetrize(const Eigen::MatrixXcd& omega, int d_a, int d_b, int k);

/// Group average as an explicit sum over all k! permutations.
Eigen::MatrixXcd symmetrize_full_group(const Eigen::MatrixXcd& omega, int d_a, int d_b, int k);

/// Group average via S_l = ∪_j (j l) S_{l-1}: k(k+1)/2 transpositions instead of k! terms.
Eigen::MatrixXcd symmetrize_cosets(const Eigen::MatrixXcd& omega, int d_a, int d_b, int k);

/// Frobenius projection onto {ω Hermitian : permutation invariant, Tr_{B2..Bk} ω = ρ}
/// (unit trace follows). Closed form: symmetrize, then add the minimum-norm
/// symmetric correction of the marginal.
Eigen::MatrixXcd affine_project(const Eigen::MatrixXcd& omega, const DensityMatrixd& rho, int k);

/// Independent constraint violations of a candidate extension.
struct CertificateResiduals {
  double negative_part = 0.0;    // ‖ω − psd(ω)‖_F
  double min_eigenvalue = 0.0;
  double asymmetry = 0.0;        // max over transpositions of max|W ω W† − ω|
  double marginal_error = 0.0;   // max|Tr_{B2..Bk} ω − ρ|
  double trace_error = 0.0;

  double worst() const;
};

CertificateResiduals certificate_residuals(const Eigen::MatrixXcd& omega, const DensityMatrixd& rho, int k);

ExtendibilityVerdict check_k_extendible(const ExtensionProblem& problem);

/// Result of bisecting a one-parameter family on extendibility verdicts.
struct ThresholdBracket {
  double feasible;    // last parameter with a Feasible verdict (certificate found)
  double infeasible;  // last parameter without one
  double estimate() const { return 0.5 * (feasible + infeasible); }
};

struct BisectOptions {
  double resolution = 0.01;  // final |feasible − infeasible|
  double tol = 1e-7;
  int max_iter = 50000;
};

/// Bisection between a Feasible endpoint and an InfeasibleSignal endpoint. The
/// endpoints may be given in either numeric order. Inconclusive verdicts count
/// as not feasible.
ThresholdBracket threshold_bisect(const std::function<DensityMatrixd(double)>& family, int k, double feasible_end,
                                  double infeasible_end, const BisectOptions& options = {});

/// ω = (1/k) Σ_i Φ_{A B_i} ⊗ |e><e| on every other B copy; a k-extension of
/// erasure_family(1 − 1/k).
Eigen::MatrixXcd erasure_certificate(int k);

/// U ⊗ U* twirl on dims [d, d]: the isotropic state with the same overlap with Φ_d.
DensityMatrixd twirl_uu(const DensityMatrixd& rho);

}  // namespace unext
