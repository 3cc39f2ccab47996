#include "unext/hypothesis_testing.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace unext {
namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

// Every finite double is a dyadic rational; this conversion is exact.
cpp_rational exact(double x) {
  int exponent = 0;
  const double mantissa = std::frexp(x, &exponent);
  const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
  cpp_rational out(scaled);
  const int shift = exponent - 53;
  if (shift >= 0)
    out *= cpp_rational(cpp_int(1) << shift);
  else
    out /= cpp_rational(cpp_int(1) << -shift);
  return out;
}

double log2_int(const cpp_int& x) {
  const auto bits = static_cast<long>(boost::multiprecision::msb(x));
  const long shift = std::max(0L, bits - 62);
  const cpp_int top = x >> shift;
  return std::log2(top.convert_to<double>()) + static_cast<double>(shift);
}

double log2_rational(const cpp_rational& x) {
  return log2_int(boost::multiprecision::numerator(x)) - log2_int(boost::multiprecision::denominator(x));
}

// base^0 .. base^n.
std::vector<cpp_rational> powers(const cpp_rational& base, int n) {
  std::vector<cpp_rational> out{cpp_rational(1)};
  for (int i = 0; i < n; ++i) out.push_back(out.back() * base);
  return out;
}

struct ExactClass {
  cpp_rational p, q;
  int label;
};

// a.p/a.q > b.p/b.q, with q = 0 read as an infinite ratio.
int compare_ratio(const ExactClass& a, const ExactClass& b) {
  const cpp_rational lhs = a.p * b.q, rhs = b.p * a.q;
  if (lhs == rhs) return 0;
  return lhs > rhs ? 1 : -1;
}

}  // namespace

NPResult np_divergence_exact(const BinaryHypothesisPair& hyp, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in [0, 1)");
  const int n = hyp.n;
  const cpp_rational p = exact(hyp.p_success), t = exact(hyp.t_success);
  const cpp_rational one(1);

  const auto pw = powers(p, n), pf = powers(one - p, n), tw = powers(t, n), tf = powers(one - t, n);
  std::vector<ExactClass> classes;
  cpp_int binom = 1;
  for (int w = 0; w <= n; ++w) {
    if (w > 0) binom = binom * (n - w + 1) / w;
    const auto uw = static_cast<std::size_t>(w), uf = static_cast<std::size_t>(n - w);
    ExactClass c{cpp_rational(binom) * pw[uw] * pf[uf], cpp_rational(binom) * tw[uw] * tf[uf], w};
    if (c.p != 0) classes.push_back(std::move(c));
  }
  std::stable_sort(classes.begin(), classes.end(), [](const ExactClass& a, const ExactClass& b) {
    const int cmp = compare_ratio(a, b);
    return cmp != 0 ? cmp > 0 : a.label < b.label;
  });
  std::vector<ExactClass> merged;
  for (auto& c : classes) {
    if (!merged.empty() && compare_ratio(merged.back(), c) == 0) {
      merged.back().p += c.p;
      merged.back().q += c.q;
      merged.back().label = std::min(merged.back().label, c.label);
    } else {
      merged.push_back(std::move(c));
    }
  }

  const cpp_rational target = one - exact(eps);
  cpp_rational accepted(0), beta(0);
  NPResult out;
  for (const auto& c : merged) {
    if (accepted + c.p < target) {
      accepted += c.p;
      beta += c.q;
      continue;
    }
    const cpp_rational gamma = (target - accepted) / c.p;
    accepted += gamma * c.p;
    beta += gamma * c.q;
    out.threshold_weight = c.label;
    out.gamma = gamma.convert_to<double>();
    break;
  }
  out.log2_beta = beta == 0 ? -std::numeric_limits<double>::infinity() : log2_rational(beta);
  out.achieved_type1 = cpp_rational(one - accepted).convert_to<double>();
  return out;
}

}  // namespace unext
