#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "riesz/core.hpp"

namespace riesz {

/// Legendre-Gauss rule on [-1, 1]. Nodes are strictly increasing and
/// symmetric about 0, weights positive with sum 2.
struct QuadratureRule {
  index_t order = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

/// Evaluates P_q(x) and P_q'(x) by the three-term recurrence.
inline void legendre_eval(index_t q, double x, double& p, double& dp) {
  double p0 = 1.0;
  double p1 = x;
  for (index_t j = 2; j <= q; ++j) {
    const double pj = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / static_cast<double>(j);
    p0 = p1;
    p1 = pj;
  }
  p = (q == 0) ? 1.0 : p1;
  dp = (q == 0) ? 0.0 : q * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace detail

/// Nodes are the roots of P_q found by Newton iteration from the initial
/// guess cos(pi*(k - 1/4)/(q + 1/2)); weights are 2 / ((1 - x^2) P_q'(x)^2).
/// The negative half is mirrored from the positive half so the symmetry
/// theta_k = -theta_{q+1-k}, w_k = w_{q+1-k} holds exactly.
inline QuadratureRule legendre_gauss(index_t q) {
  if (q == 0) { throw std::invalid_argument("legendre_gauss: order must be >= 1"); }
  QuadratureRule rule;
  rule.order = q;
  rule.nodes.assign(q, 0.0);
  rule.weights.assign(q, 0.0);
  const index_t half = q / 2;
  for (index_t k = 1; k <= half; ++k) {
    double x = std::cos(M_PI * (k - 0.25) / (q + 0.5));
    double p = 0.0;
    double dp = 1.0;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      detail::legendre_eval(q, x, p, dp);
      const double step = p / dp;
      x -= step;
      // |P| <= 1e-15 is reachable for moderate q; for large q the root is
      // converged once the Newton step is below one ulp of the node.
      if (std::abs(p) <= 1e-15 || std::abs(step) <= 1e-16 * (1.0 + std::abs(x))) {
        converged = true;
        break;
      }
    }
    if (!converged) { throw std::runtime_error("legendre_gauss: Newton did not converge"); }
    detail::legendre_eval(q, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // guess k = 1 is the largest root; store ascending
    rule.nodes[q - k] = x;
    rule.weights[q - k] = w;
    rule.nodes[k - 1] = -x;
    rule.weights[k - 1] = w;
  }
  if (q % 2 == 1) {
    // Center node is exactly zero by symmetry.
    double p = 0.0;
    double dp = 1.0;
    detail::legendre_eval(q, 0.0, p, dp);
    rule.nodes[half] = 0.0;
    rule.weights[half] = 2.0 / (dp * dp);
  }
  return rule;
}

}  // namespace riesz
