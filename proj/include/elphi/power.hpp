#pragma once

// Population quantities under a fixed alternative beta_star when testing
// beta = beta_null, for the intercept + standard-normal covariate design:
// the population multiplier tau, the moment vector m and matrix n of the
// asymptotic normality result, the population divergence D_phi(tau), the
// normal approximation to the power function, and the implied minimum
// sample size for a target power.
//
// Expectations integrate X by Gauss-Hermite quadrature and Y | X exactly
// over {0, 1}.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "elphi/divergence.hpp"
#include "elphi/errors.hpp"
#include "elphi/model.hpp"
#include "elphi/quadrature.hpp"
#include "elphi/special.hpp"

namespace elphi {

struct AlternativeSpec {
  BetaVector beta_null;
  BetaVector beta_star;

  AlternativeSpec(BetaVector null_value, BetaVector star_value)
      : beta_null(std::move(null_value)), beta_star(std::move(star_value)) {
    if (beta_null.size() != 2 || beta_star.size() != 2)
      throw std::invalid_argument(
          "AlternativeSpec: intercept + one covariate (q = 2) design");
  }

  bool degenerate() const { return beta_null == beta_star; }
};

// The printed asymptotic variance sandwiches the outer product of
// E[g/(1+tau'g)], which vanishes at the exact root; the second-moment mode
// replaces that middle factor by E[g g' / (1+tau'g)^2], the covariance the
// central limit theorem actually delivers.
enum class SigmaMode { second_moment, mean_outer };

struct PopulationMoments {
  Eigen::VectorXd tau;
  Eigen::VectorXd m_vec;
  Eigen::MatrixXd n_mat;
  double sigma_sq;
};

namespace detail {

// Precomputed quadrature view of the joint law of (X, Y) under beta_star,
// with score vectors evaluated at beta_null.
struct PopulationGrid {
  Eigen::VectorXd weight1;  // w_j * P(Y=1 | x_j)
  Eigen::VectorXd weight0;  // w_j * P(Y=0 | x_j)
  Eigen::MatrixXd g1;       // rows: g(x_j, 1, beta_null)'
  Eigen::MatrixXd g0;       // rows: g(x_j, 0, beta_null)'

  PopulationGrid(const AlternativeSpec& spec, int quad_order) {
    if (quad_order < 20)
      throw std::invalid_argument("population grid: quad_order >= 20 required");
    GaussHermiteRule rule(quad_order);
    const int m = quad_order;
    weight1.resize(m);
    weight0.resize(m);
    g1.resize(m, 2);
    g0.resize(m, 2);
    for (int j = 0; j < m; ++j) {
      double x = rule.nodes[j];
      double pstar = sigmoid(spec.beta_star[0] + spec.beta_star[1] * x);
      weight1[j] = rule.weights[j] * pstar;
      weight0[j] = rule.weights[j] * (1.0 - pstar);
      double pi0 = sigmoid(spec.beta_null[0] + spec.beta_null[1] * x);
      g1.row(j) << (1.0 - pi0), x * (1.0 - pi0);
      g0.row(j) << (0.0 - pi0), x * (0.0 - pi0);
    }
  }

  // E[f(g)] for a scalar/vector/matrix-valued f of the score row.
  template <typename F>
  auto expect(F&& f) const {
    auto acc = (weight1[0] * f(g1.row(0).transpose().eval()) +
                weight0[0] * f(g0.row(0).transpose().eval()))
                   .eval();
    for (int j = 1; j < g1.rows(); ++j) {
      acc += weight1[j] * f(g1.row(j).transpose().eval());
      acc += weight0[j] * f(g0.row(j).transpose().eval());
    }
    return acc;
  }

  double min_denominator(const Eigen::VectorXd& tau) const {
    return std::min((g1 * tau).minCoeff(), (g0 * tau).minCoeff()) + 1.0;
  }
};

}  // namespace detail

// E_{beta_star}[f(X, Y)] where f maps the augmented covariate vector (1, x)
// and the response to a scalar.
template <typename F>
double population_expectation(F&& f, const BetaVector& beta_star,
                              int quad_order = 40) {
  if (quad_order < 20)
    throw std::invalid_argument("population_expectation: quad_order >= 20");
  GaussHermiteRule rule(quad_order);
  double acc = 0.0;
  Eigen::VectorXd xv(2);
  for (int j = 0; j < quad_order; ++j) {
    xv << 1.0, rule.nodes[j];
    double pstar = sigmoid(beta_star[0] + beta_star[1] * rule.nodes[j]);
    acc += rule.weights[j] * (pstar * f(xv, 1.0) + (1.0 - pstar) * f(xv, 0.0));
  }
  return acc;
}

// Root of E_{beta_star}[ g(X,Y,beta_null) / (1 + tau'g) ] = 0 by damped
// Newton with the analytic derivative. Iterates are kept where every
// quadrature denominator stays positive; if no such progress is possible
// the expectation does not exist and NoRoot is thrown.
inline Eigen::VectorXd solve_tau(const AlternativeSpec& spec, int quad_order = 40,
                                 double tol = 1e-12) {
  detail::PopulationGrid grid(spec, quad_order);
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(2);
  auto system = [&](const Eigen::VectorXd& t) {
    return grid
        .expect([&](const Eigen::VectorXd& g) {
          return (g / (1.0 + t.dot(g))).eval();
        })
        .eval();
  };
  Eigen::VectorXd f = system(tau);
  double res = f.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < 200; ++it) {
    if (res <= tol) return tau;
    Eigen::MatrixXd jac = grid.expect([&](const Eigen::VectorXd& g) {
      double d = 1.0 + tau.dot(g);
      return (-(g * g.transpose()) / (d * d)).eval();
    });
    Eigen::LDLT<Eigen::MatrixXd> fac(-jac);
    if (fac.info() != Eigen::Success || !fac.isPositive())
      throw NoRoot("solve_tau: singular derivative", res);
    Eigen::VectorXd step = fac.solve(f);
    double alpha = 1.0;
    bool moved = false;
    for (int half = 0; half < 60; ++half) {
      Eigen::VectorXd cand = tau + alpha * step;
      if (grid.min_denominator(cand) > 1e-12) {
        Eigen::VectorXd fc = system(cand);
        double rc = fc.lpNorm<Eigen::Infinity>();
        if (rc < res) {
          tau = cand;
          f = fc;
          res = rc;
          moved = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!moved)
      throw NoRoot("solve_tau: expectation domain exhausted (alternative too extreme)",
                   res);
  }
  throw NoRoot("solve_tau: max iterations", res);
}

// Moment vector m = E[ psi(1+tau'g) g / (1+tau'g) ], matrix
// n = E[ -g g' / (1+tau'g)^2 ], and the assembled asymptotic variance.
inline PopulationMoments compute_moments(const AlternativeSpec& spec,
                                         const Eigen::VectorXd& tau,
                                         const PhiFamily& phi, int quad_order = 40,
                                         SigmaMode mode = SigmaMode::second_moment) {
  detail::PopulationGrid grid(spec, quad_order);
  if (grid.min_denominator(tau) <= 0.0)
    throw NoRoot("compute_moments: nonpositive denominator at a quadrature node",
                 std::numeric_limits<double>::infinity());
  PopulationMoments out;
  out.tau = tau;
  out.m_vec = grid.expect([&](const Eigen::VectorXd& g) {
    double d = 1.0 + tau.dot(g);
    return (g * (psi_transform(phi, d) / d)).eval();
  });
  out.n_mat = grid.expect([&](const Eigen::VectorXd& g) {
    double d = 1.0 + tau.dot(g);
    return (-(g * g.transpose()) / (d * d)).eval();
  });
  Eigen::FullPivLU<Eigen::MatrixXd> lu(out.n_mat);
  if (!lu.isInvertible())
    throw SingularMatrix("compute_moments: n matrix is rank deficient");
  Eigen::VectorXd ninv_m = lu.solve(out.m_vec);
  if (mode == SigmaMode::second_moment) {
    // middle factor E[g g'/(1+tau'g)^2] = -n_mat
    out.sigma_sq = -ninv_m.dot(out.m_vec);
  } else {
    Eigen::VectorXd mid = grid.expect([&](const Eigen::VectorXd& g) {
      return (g / (1.0 + tau.dot(g))).eval();
    });
    double s = mid.dot(ninv_m);
    out.sigma_sq = s * s;
  }
  return out;
}

// Population divergence D_phi(tau) = E[ phi(1+tau'g) / (1+tau'g) ].
inline double population_divergence(const AlternativeSpec& spec,
                                    const Eigen::VectorXd& tau,
                                    const PhiFamily& phi, int quad_order = 40) {
  detail::PopulationGrid grid(spec, quad_order);
  if (grid.min_denominator(tau) <= 0.0)
    throw NoRoot("population_divergence: nonpositive denominator",
                 std::numeric_limits<double>::infinity());
  return grid.expect([&](const Eigen::VectorXd& g) {
    double d = 1.0 + tau.dot(g);
    return phi.phi(d) / d;
  });
}

struct PowerResult {
  Eigen::VectorXd tau;
  double d_phi;
  double sigma_sq;
  double power;
};

// Normal approximation to the rejection probability at sample size n:
// 1 - Phi( sqrt(n / sigma^2) (crit phi''(1) / (2n) - D_phi(tau)) ),
// monotone increasing in n.
inline PowerResult power_approx(const AlternativeSpec& spec, int n, double level,
                                const PhiFamily& phi, int quad_order = 40,
                                SigmaMode mode = SigmaMode::second_moment) {
  if (spec.degenerate())
    throw DegenerateAlternative("power_approx: beta_star equals beta_null");
  if (n < 1) throw std::invalid_argument("power_approx: n >= 1 required");
  PowerResult out;
  out.tau = solve_tau(spec, quad_order);
  PopulationMoments mom = compute_moments(spec, out.tau, phi, quad_order, mode);
  out.sigma_sq = mom.sigma_sq;
  out.d_phi = population_divergence(spec, out.tau, phi, quad_order);
  if (!(out.sigma_sq > 0.0))
    throw DegenerateAlternative("power_approx: sigma^2 = 0");
  double crit = chi2_quantile(static_cast<int>(spec.beta_null.size()), level);
  double arg = std::sqrt(n / out.sigma_sq) *
               (crit * phi.d2phi(1.0) / (2.0 * n) - out.d_phi);
  out.power = 1.0 - normal_cdf(arg);
  return out;
}

struct SampleSizeResult {
  Eigen::VectorXd tau;
  double d_phi;
  double sigma_sq;
  double a_term;   // 2 crit phi''(1) D_phi(tau)
  double b_term;   // sigma^2 (Phi^{-1}(1 - target))^2
  double n_real;
  long n_star;     // floor(n_real) + 1
};

// Minimum sample size for target power at the given level: the positive
// root of the quadratic obtained by inverting the power approximation,
// rounded up to the next integer.
inline SampleSizeResult sample_size(const AlternativeSpec& spec, double level,
                                    double target_power, const PhiFamily& phi,
                                    int quad_order = 40,
                                    SigmaMode mode = SigmaMode::second_moment) {
  if (spec.degenerate())
    throw DegenerateAlternative("sample_size: beta_star equals beta_null");
  if (!(target_power > 0.0 && target_power < 1.0))
    throw std::invalid_argument("sample_size: target_power outside (0,1)");
  SampleSizeResult out;
  out.tau = solve_tau(spec, quad_order);
  PopulationMoments mom = compute_moments(spec, out.tau, phi, quad_order, mode);
  out.sigma_sq = mom.sigma_sq;
  out.d_phi = population_divergence(spec, out.tau, phi, quad_order);
  if (!(out.d_phi > 0.0) || !(out.sigma_sq > 0.0))
    throw DegenerateAlternative("sample_size: degenerate alternative");
  double crit = chi2_quantile(static_cast<int>(spec.beta_null.size()), level);
  double z = normal_quantile(1.0 - target_power);
  out.a_term = 2.0 * crit * phi.d2phi(1.0) * out.d_phi;
  out.b_term = out.sigma_sq * z * z;
  out.n_real = (out.a_term + 2.0 * out.b_term +
                2.0 * std::sqrt(out.b_term * (out.b_term + out.a_term))) /
               (4.0 * out.d_phi * out.d_phi);
  out.n_star = static_cast<long>(std::floor(out.n_real)) + 1;
  return out;
}

}  // namespace elphi
