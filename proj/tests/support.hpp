#pragma once

#include "unext/linalg.hpp"

#include <random>

namespace unext::test {

using Rng = std::mt19937_64;

inline Eigen::MatrixXcd random_complex(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = {g(rng), g(rng)};
  return m;
}

inline Eigen::MatrixXcd random_hermitian(Rng& rng, Eigen::Index n) {
  const Eigen::MatrixXcd g = random_complex(rng, n, n);
  return 0.5 * (g + g.adjoint());
}

// G G† / Tr, a full-rank density matrix for generic G.
inline Eigen::MatrixXcd random_density(Rng& rng, Eigen::Index n) {
  const Eigen::MatrixXcd g = random_complex(rng, n, n);
  Eigen::MatrixXcd rho = g * g.adjoint();
  return rho / rho.trace().real();
}

// Random probability vector of length n.
inline std::vector<double> random_distribution(Rng& rng, int n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(static_cast<std::size_t>(n));
  double total = 0;
  for (auto& x : w) total += (x = u(rng));
  for (auto& x : w) x /= total;
  return w;
}

}  // namespace unext::test
