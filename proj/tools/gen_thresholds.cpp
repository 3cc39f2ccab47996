// Regenerates the t*(k) fixture table: bisects the isotropic family for
// k = 2..5 and prints the feasible end of each bracket.

#include "unext/extendibility.hpp"

#include <cstdio>
#include <cstdlib>

int main(int argc, char** argv) {
  const double resolution = argc > 1 ? std::atof(argv[1]) : 1e-4;
  const int k_last = argc > 2 ? std::atoi(argv[2]) : 5;
  for (int k = 2; k <= k_last; ++k) {
    const auto bracket = unext::threshold_bisect([](double t) { return unext::isotropic(t, 2); }, k, 0.5, 1.0,
                                                 unext::BisectOptions{resolution, 1e-7, 50000});
    std::printf("k=%d feasible=%.10f infeasible=%.10f\n", k, bracket.feasible, bracket.infeasible);
    std::fflush(stdout);
  }
  return 0;
}
