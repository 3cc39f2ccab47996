#pragma once

// ε-hypothesis-testing divergence D_h^ε(P‖Q) = −log₂ min{Q(Λ) : P(Λ) ≥ 1−ε}
// for i.i.d. Bernoulli hypotheses (solved exactly on Hamming-weight classes
// with the Neyman–Pearson test), for commuting density matrices, and the
// max-relative entropy of commuting pairs.

#include "unext/states.hpp"

#include <vector>

namespace unext {

/// n i.i.d. copies of Bernoulli(p_success) against Bernoulli(t_success).
struct BinaryHypothesisPair {
  double p_success;
  double t_success;
  int n;

  BinaryHypothesisPair(double p, double t, int copies);
};

struct NPResult {
  double log2_beta = 0.0;        // −∞ when the optimal type-II error vanishes
  int threshold_weight = 0;      // label of the randomized boundary class
  double gamma = 1.0;            // acceptance weight on that class
  double achieved_type1 = 0.0;

  double divergence() const { return -log2_beta; }  // +∞ when β = 0
  double beta() const;
  bool infinite() const;
};

/// Log-domain engine with compensated summation of the cumulative P-mass.
NPResult np_divergence(const BinaryHypothesisPair& hyp, double eps);

/// Same optimum in exact rational arithmetic; doubles are converted exactly.
NPResult np_divergence_exact(const BinaryHypothesisPair& hyp, double eps);

/// One outcome (or lumped class) of a finite classical problem, as natural logs.
struct LogOutcome {
  double log_p;
  double log_q;
  int label;
};

/// Neyman–Pearson sort-and-fill over an arbitrary outcome list: descending
/// likelihood ratio, equal ratios merged, fractional acceptance on the boundary.
NPResult neyman_pearson_fill(std::vector<LogOutcome> outcomes, double eps);

/// Joint eigenvalue pair of a commuting (ρ, σ).
struct JointOutcome {
  double p;
  double q;
};

/// Brute force over every test that fully accepts a subset of the outcomes and
/// partially accepts at most one more; returns log₂β. At most 16 outcomes.
double np_oracle_outcomes(const std::vector<JointOutcome>& outcomes, double eps);

/// np_oracle_outcomes on the n+1 weight classes (n <= 10), with probabilities
/// computed directly in linear arithmetic.
double np_oracle(const BinaryHypothesisPair& hyp, double eps);

/// Co-diagonalizes a commuting pair. Throws if ‖ρσ − σρ‖_max > tol.commutation.
std::vector<JointOutcome> joint_spectrum(const DensityMatrixd& rho, const DensityMatrixd& sigma,
                                         const Tolerances& tol = default_tolerances);

/// Joint spectrum of (ρ^{⊗n}, σ^{⊗n}) from that of (ρ, σ).
std::vector<JointOutcome> tensor_power_spectrum(const std::vector<JointOutcome>& single, int n);

/// D_h^ε of a classical pair given by its joint spectrum, in bits.
double dh_from_spectrum(const std::vector<JointOutcome>& outcomes, double eps);

/// D_h^ε(ρ‖σ) for commuting states (general D_h^ε needs an SDP and is not provided).
double commuting_dh(const DensityMatrixd& rho, const DensityMatrixd& sigma, double eps);

/// D_h^ε(ρ^{⊗n}‖σ^{⊗n}) for commuting single-copy states, via the product spectrum.
double commuting_dh_tensor_power(const DensityMatrixd& rho, const DensityMatrixd& sigma, int n, double eps);

/// D_max(ρ‖σ) = max log₂(r_i/s_i) over the joint spectrum; +∞ when supp ρ ⊄ supp σ.
double d_max_commuting(const DensityMatrixd& rho, const DensityMatrixd& sigma);

}  // namespace unext
