#pragma once

// Gauss-Hermite quadrature adapted to the standard normal weight:
// E[f(X)] with X ~ N(0,1) is approximated by sum_i w_i f(x_i) where the
// (x_i, w_i) come from the physicists' rule via Golub-Welsch and the
// change of variable x = sqrt(2) * xi, w = w_gh / sqrt(pi).

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "elphi/errors.hpp"

namespace elphi {

struct GaussHermiteRule {
  Eigen::VectorXd nodes;    // points on the N(0,1) scale, ascending
  Eigen::VectorXd weights;  // sum to 1

  explicit GaussHermiteRule(int order) {
    if (order < 1) throw DomainError("GaussHermiteRule: order >= 1 required");
    // Jacobi matrix of the Hermite recurrence: off-diagonal sqrt(k/2).
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
      double b = std::sqrt(0.5 * k);
      jacobi(k, k - 1) = b;
      jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    nodes = std::sqrt(2.0) * es.eigenvalues();
    weights.resize(order);
    for (int i = 0; i < order; ++i) {
      double v = es.eigenvectors()(0, i);
      weights[i] = v * v;  // already normalized: total mass 1
    }
  }

  // E[f(X)], X ~ N(0,1).
  template <typename F>
  double expect(F&& f) const {
    double acc = 0.0;
    for (int i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

}  // namespace elphi
