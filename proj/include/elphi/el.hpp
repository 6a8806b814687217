#pragma once

// Inner empirical-likelihood machinery for a fixed parameter value: given
// the matrix of score rows g_i, decide feasibility (origin in the convex
// hull, positive definite Gram), bound the Lagrange multiplier by
// Fourier-Motzkin elimination, solve the nonlinear multiplier system
//   (1/n) sum_i g_i / (1 + t'g_i) = 0
// by damped Newton with the analytic Jacobian (dogleg fallback), and expose
// the implied probability weights and log-likelihood kernel.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "elphi/errors.hpp"
#include "elphi/model.hpp"

namespace elphi {

// Rows are the per-observation scores g(x_i, y_i, beta)' at a fixed beta.
inline Eigen::MatrixXd score_matrix(const Dataset& data, const BetaVector& beta) {
  if (beta.size() != data.q())
    throw std::invalid_argument("score_matrix: dimension mismatch");
  Eigen::MatrixXd G(data.n(), data.q());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    double pi = sigmoid(data.X.row(i).dot(beta));
    G.row(i) = data.X.row(i) * (data.y[i] - pi);
  }
  return G;
}

struct FeasibilityReport {
  bool hull_contains_origin;
  bool gram_positive_definite;
  double min_eigenvalue;
};

namespace detail {

// Phase-one simplex (Bland's rule) deciding whether convex weights mu >= 0
// with sum mu = 1 and G'mu = 0 exist.
inline bool origin_in_convex_hull(const Eigen::MatrixXd& G) {
  const int n = static_cast<int>(G.rows());
  const int m = static_cast<int>(G.cols()) + 1;  // q equality rows + sum row
  const int cols = n + m + 1;                    // structural + artificial + rhs
  Eigen::MatrixXd tab(m, cols);
  tab.setZero();
  tab.block(0, 0, m - 1, n) = G.transpose();
  tab.row(m - 1).head(n).setOnes();
  tab.block(0, n, m, m).setIdentity();
  tab(m - 1, cols - 1) = 1.0;
  // Flip rows with negative right-hand side so the artificial basis is valid.
  for (int i = 0; i < m; ++i) {
    if (tab(i, cols - 1) < 0.0) tab.row(i) = -tab.row(i);
  }
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;
  // Reduced-cost row for minimizing the artificial sum.
  Eigen::RowVectorXd obj = Eigen::RowVectorXd::Zero(cols);
  for (int j = 0; j < n; ++j) obj[j] = tab.col(j).sum();
  obj[cols - 1] = tab.col(cols - 1).sum();

  const double tol = 1e-10;
  const int max_pivots = 50 * (n + m);
  for (int pivot = 0; pivot < max_pivots; ++pivot) {
    int enter = -1;
    for (int j = 0; j < n; ++j) {  // Bland: smallest improving index
      if (obj[j] > tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < m; ++i) {
      if (tab(i, enter) > tol) {
        double ratio = tab(i, cols - 1) / tab(i, enter);
        if (leave < 0 || ratio < best_ratio - 1e-15 ||
            (std::fabs(ratio - best_ratio) <= 1e-15 && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave < 0) break;  // unbounded cannot happen in phase one
    tab.row(leave) /= tab(leave, enter);
    for (int i = 0; i < m; ++i) {
      if (i != leave && std::fabs(tab(i, enter)) > 0.0)
        tab.row(i) -= tab(i, enter) * tab.row(leave);
    }
    obj -= obj[enter] * tab.row(leave);
    basis[leave] = enter;
  }
  return obj[cols - 1] <= 1e-9;
}

}  // namespace detail

// Convex-hull membership of the origin (phase-one linear program) and
// positive definiteness of sum_i g_i g_i' (smallest eigenvalue).
inline FeasibilityReport feasibility_check(const Eigen::MatrixXd& G) {
  FeasibilityReport rep{};
  rep.hull_contains_origin = detail::origin_in_convex_hull(G);
  Eigen::MatrixXd gram = G.transpose() * G;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram,
                                                    Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  rep.gram_positive_definite = rep.min_eigenvalue > 0.0;
  return rep;
}

struct Interval {
  double lo;
  double hi;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

// Fourier-Motzkin description of the polyhedron {t : t'g_i >= 1/n - 1}.
// Exposes the projection interval of every coordinate and conditional
// intervals given a prefix of fixed coordinates, which drive the solver's
// multi-start grid.
class MultiplierBounds {
 public:
  explicit MultiplierBounds(const Eigen::MatrixXd& G)
      : q_(static_cast<int>(G.cols())) {
    if (G.rows() < 1 || q_ < 1)
      throw std::invalid_argument("MultiplierBounds: empty score matrix");
    const double c = 1.0 / static_cast<double>(G.rows()) - 1.0;
    Eigen::MatrixXd sys(G.rows(), q_ + 1);
    sys.leftCols(q_) = G;
    sys.col(q_).setConstant(c);
    levels_.resize(q_);
    levels_[q_ - 1] = sys;
    for (int m = q_ - 2; m >= 0; --m)
      levels_[m] = eliminate_last(levels_[m + 1]);
    box_.resize(q_);
    box_[0] = univariate_interval(levels_[0]);
    for (int k = 1; k < q_; ++k) {
      // Move coordinate k to the front, then eliminate everything else.
      Eigen::MatrixXd perm(sys.rows(), q_ + 1);
      perm.col(0) = sys.col(k);
      int at = 1;
      for (int j = 0; j < q_; ++j) {
        if (j != k) perm.col(at++) = sys.col(j);
      }
      perm.col(q_) = sys.col(q_);
      for (int remaining = q_; remaining > 1; --remaining)
        perm = eliminate_last(perm);
      box_[k] = univariate_interval(perm);
    }
  }

  int dim() const { return q_; }

  // Projection of the polyhedron onto coordinate k.
  const Interval& box(int k) const { return box_.at(k); }

  // Interval of coordinate prefix.size() when the first coordinates are
  // fixed to `prefix` (remaining coordinates eliminated).
  Interval conditional(const Eigen::VectorXd& prefix) const {
    const int m = static_cast<int>(prefix.size());
    if (m >= q_) throw std::invalid_argument("conditional: prefix too long");
    const Eigen::MatrixXd& sys = levels_[m];
    Eigen::MatrixXd reduced(sys.rows(), 2);
    reduced.col(0) = sys.col(m);
    reduced.col(1) = sys.col(m + 1);
    if (m > 0) reduced.col(1) -= sys.leftCols(m) * prefix;
    return univariate_interval(reduced);
  }

  // Multi-start layout: n_start points spread over the first coordinate's
  // interval, remaining coordinates at conditional-interval midpoints.
  std::vector<Eigen::VectorXd> start_points(int n_start) const {
    std::vector<Eigen::VectorXd> starts;
    starts.reserve(n_start);
    Interval first = clip(box_[0]);
    for (int j = 0; j < n_start; ++j) {
      Eigen::VectorXd t(q_);
      t[0] = first.lo + (j + 0.5) * (first.hi - first.lo) / n_start;
      bool ok = true;
      for (int k = 1; k < q_; ++k) {
        Interval iv;
        try {
          iv = clip(conditional(t.head(k)));
        } catch (const InfeasiblePolyhedron&) {
          ok = false;
          break;
        }
        t[k] = 0.5 * (iv.lo + iv.hi);
      }
      if (ok) starts.push_back(std::move(t));
    }
    return starts;
  }

 private:
  static Interval clip(Interval iv) {
    const double big = 1e3;
    return {std::max(iv.lo, -big), std::min(iv.hi, big)};
  }

  static double row_tol(const Eigen::RowVectorXd& row, int nv) {
    return 1e-12 * (1.0 + row.head(nv).cwiseAbs().maxCoeff());
  }

  // Eliminates the last variable of an inequality system a.t >= c stored as
  // rows [a_0..a_{v}, c], producing rows over the remaining variables.
  static Eigen::MatrixXd eliminate_last(const Eigen::MatrixXd& sys) {
    const int nv = static_cast<int>(sys.cols()) - 1;
    const int v = nv - 1;
    std::vector<int> pos, neg, zer;
    for (int i = 0; i < sys.rows(); ++i) {
      double a = sys(i, v);
      double tol = row_tol(sys.row(i), nv);
      if (a > tol) {
        pos.push_back(i);
      } else if (a < -tol) {
        neg.push_back(i);
      } else {
        zer.push_back(i);
      }
    }
    const std::size_t out_rows = zer.size() + pos.size() * neg.size();
    if (out_rows > 4000000)
      throw std::runtime_error("Fourier-Motzkin: projection blow-up");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(std::max<std::size_t>(out_rows, 1)),
                        nv);
    Eigen::Index r = 0;
    for (int i : zer) {
      out.row(r).head(v) = sys.row(i).head(v);
      out(r, v) = sys(i, nv);
      ++r;
    }
    for (int p : pos) {
      for (int g : neg) {
        // Cross-multiplied combination keeps the inequality direction and
        // cancels the eliminated coordinate exactly.
        double ap = sys(p, v), ag = sys(g, v);
        out.row(r).head(v) = ap * sys.row(g).head(v) - ag * sys.row(p).head(v);
        out(r, v) = ap * sys(g, nv) - ag * sys(p, nv);
        ++r;
      }
    }
    if (out_rows == 0) {
      // No constraints left: the projection is the whole line; encode as a
      // single vacuous row 0.t >= -1.
      out.setZero();
      out(0, v) = -1.0;
    }
    return out;
  }

  static Interval univariate_interval(const Eigen::MatrixXd& sys) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < sys.rows(); ++i) {
      double a = sys(i, 0), c = sys(i, 1);
      double tol = 1e-12 * (1.0 + std::fabs(a));
      if (a > tol) {
        lo = std::max(lo, c / a);
      } else if (a < -tol) {
        hi = std::min(hi, c / a);
      } else if (c > 1e-9) {
        throw InfeasiblePolyhedron("multiplier bounds: contradictory constraints");
      }
    }
    if (lo > hi)
      throw InfeasiblePolyhedron("multiplier bounds: empty interval");
    return {lo, hi};
  }

  int q_;
  std::vector<Eigen::MatrixXd> levels_;
  std::vector<Interval> box_;
};

struct SolverConfig {
  int n_start = 50;     // starting points along the first-coordinate interval
  double tol = 1e-10;   // inf-norm residual target for the multiplier system
  int max_iter = 100;   // Newton iterations per start
};

struct MultiplierSolution {
  Eigen::VectorXd t;
  double residual_norm;    // inf norm of (1/n) sum g_i / (1 + t'g_i)
  Eigen::VectorXd weights; // p_i = (1/n) / (1 + t'g_i)
  int iterations;          // Newton iterations spent by the winning start
  int start_index;         // 0 = origin start, k >= 1 = grid start k-1
};

// Probability weights implied by a multiplier value. Sums to one only when
// t solves the multiplier system.
inline Eigen::VectorXd el_weights(const Eigen::MatrixXd& G, const Eigen::VectorXd& t) {
  const double n = static_cast<double>(G.rows());
  Eigen::VectorXd d = (G * t).array() + 1.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] < 1.0 / n - 1e-12)
      throw ConstraintViolation("el_weights: 1 + t'g below 1/n", static_cast<int>(i));
  }
  return d.cwiseInverse() / n;
}

namespace detail {

inline Eigen::VectorXd el_system(const Eigen::MatrixXd& G, const Eigen::VectorXd& d) {
  return G.transpose() * d.cwiseInverse() / static_cast<double>(G.rows());
}

inline Eigen::MatrixXd el_system_jacobian(const Eigen::MatrixXd& G,
                                          const Eigen::VectorXd& d) {
  Eigen::ArrayXd w = d.array().square().inverse();
  return -(G.transpose() * (G.array().colwise() * w).matrix()) /
         static_cast<double>(G.rows());
}

struct NewtonResult {
  Eigen::VectorXd t;
  double residual;
  int iterations;
  bool converged;
};

// Damped Newton on the multiplier system with a strict feasibility guard
// (all 1 + t'g_i kept at or above 1/n + 1e-14) and a dogleg fallback when
// the full step cannot make progress.
inline NewtonResult el_newton(const Eigen::MatrixXd& G, const Eigen::VectorXd& t0,
                              const SolverConfig& cfg) {
  const double n = static_cast<double>(G.rows());
  const double floor_d = 1.0 / n + 1e-14;
  NewtonResult out{t0, std::numeric_limits<double>::infinity(), 0, false};
  Eigen::VectorXd t = t0;
  Eigen::VectorXd d = (G * t).array() + 1.0;
  if (d.minCoeff() < floor_d) return out;  // infeasible start
  Eigen::VectorXd f = el_system(G, d);
  double res = f.lpNorm<Eigen::Infinity>();
  auto record = [&](int iters) {
    out.t = t;
    out.residual = res;
    out.iterations = iters;
  };
  record(0);
  for (int it = 0; it < cfg.max_iter; ++it) {
    if (res <= cfg.tol) {
      record(it);
      out.converged = true;
      return out;
    }
    Eigen::MatrixXd j = el_system_jacobian(G, d);
    Eigen::LDLT<Eigen::MatrixXd> fac(-j);
    Eigen::VectorXd newton_step;
    bool have_newton = fac.info() == Eigen::Success && fac.isPositive() &&
                       fac.vectorD().minCoeff() > 0.0;
    if (have_newton) newton_step = fac.solve(f);  // - J^-1 f

    bool accepted = false;
    if (have_newton) {
      double alpha = 1.0;
      for (int half = 0; half < 60; ++half) {
        Eigen::VectorXd tc = t + alpha * newton_step;
        Eigen::VectorXd dc = (G * tc).array() + 1.0;
        if (dc.minCoeff() >= floor_d) {
          Eigen::VectorXd fc = el_system(G, dc);
          double rc = fc.lpNorm<Eigen::Infinity>();
          if (rc < res) {
            t = tc;
            d = dc;
            f = fc;
            res = rc;
            accepted = true;
            break;
          }
        }
        alpha *= 0.5;
      }
    }
    if (!accepted) {
      // Dogleg fallback on the least-squares merit 0.5 ||f||^2.
      Eigen::VectorXd grad = j * f;  // J' f, J symmetric
      double gnorm2 = grad.squaredNorm();
      if (gnorm2 == 0.0) break;
      Eigen::VectorXd jg = j * grad;
      double curv = jg.squaredNorm();
      Eigen::VectorXd cauchy = (curv > 0.0) ? (-(gnorm2 / curv) * grad).eval()
                                            : (-grad).eval();
      double merit = 0.5 * f.squaredNorm();
      double radius = have_newton ? 0.5 * newton_step.norm() : cauchy.norm();
      for (int shrink = 0; shrink < 20 && !accepted; ++shrink) {
        Eigen::VectorXd step;
        if (have_newton && newton_step.norm() <= radius) {
          step = newton_step;
        } else if (cauchy.norm() >= radius) {
          step = (radius / cauchy.norm()) * cauchy;
        } else if (have_newton) {
          Eigen::VectorXd dlt = newton_step - cauchy;
          double a = dlt.squaredNorm();
          double b = 2.0 * cauchy.dot(dlt);
          double c = cauchy.squaredNorm() - radius * radius;
          double disc = std::max(b * b - 4.0 * a * c, 0.0);
          double theta = (a > 0.0) ? (-b + std::sqrt(disc)) / (2.0 * a) : 0.0;
          step = cauchy + theta * dlt;
        } else {
          step = (radius / cauchy.norm()) * cauchy;
        }
        Eigen::VectorXd tc = t + step;
        Eigen::VectorXd dc = (G * tc).array() + 1.0;
        if (dc.minCoeff() >= floor_d) {
          Eigen::VectorXd fc = el_system(G, dc);
          if (0.5 * fc.squaredNorm() < merit) {
            t = tc;
            d = dc;
            f = fc;
            res = f.lpNorm<Eigen::Infinity>();
            accepted = true;
          }
        }
        radius *= 0.25;
      }
      if (!accepted) {
        record(it + 1);
        return out;  // stalled
      }
    }
    record(it + 1);
  }
  out.converged = res <= cfg.tol;
  return out;
}

}  // namespace detail

// Solves the multiplier system. The origin (always feasible) is tried
// first; if it stalls, a grid of cfg.n_start points from the
// Fourier-Motzkin box is swept. The system's root is unique under the
// feasibility conditions, so the first converged start is the solution.
inline MultiplierSolution solve_multiplier(const Eigen::MatrixXd& G,
                                           const SolverConfig& cfg = {}) {
  if (G.rows() < G.cols())
    throw std::invalid_argument("solve_multiplier: need n >= q");
  const int q = static_cast<int>(G.cols());
  double best_residual = std::numeric_limits<double>::infinity();

  auto finish = [&](const detail::NewtonResult& nr, int start_index) {
    MultiplierSolution sol;
    sol.t = nr.t;
    sol.residual_norm = nr.residual;
    sol.weights = el_weights(G, nr.t);
    sol.iterations = nr.iterations;
    sol.start_index = start_index;
    return sol;
  };

  detail::NewtonResult nr = detail::el_newton(G, Eigen::VectorXd::Zero(q), cfg);
  if (nr.converged) return finish(nr, 0);
  best_residual = std::min(best_residual, nr.residual);

  std::vector<Eigen::VectorXd> starts;
  try {
    MultiplierBounds bounds(G);
    starts = bounds.start_points(cfg.n_start);
  } catch (const InfeasiblePolyhedron&) {
    starts.clear();
  }
  for (std::size_t k = 0; k < starts.size(); ++k) {
    nr = detail::el_newton(G, starts[k], cfg);
    if (nr.converged) return finish(nr, static_cast<int>(k) + 1);
    best_residual = std::min(best_residual, nr.residual);
  }
  throw NoRoot("solve_multiplier: no start converged", best_residual);
}

inline MultiplierSolution solve_multiplier(const Dataset& data,
                                           const BetaVector& beta,
                                           const SolverConfig& cfg = {}) {
  return solve_multiplier(score_matrix(data, beta), cfg);
}

// Empirical log-likelihood kernel -sum_i log(1 + t'g_i); zero exactly when
// the multiplier vanishes, negative otherwise.
inline double empirical_loglik(const Dataset& data, const BetaVector& beta,
                               const SolverConfig& cfg = {}) {
  Eigen::MatrixXd G = score_matrix(data, beta);
  MultiplierSolution sol = solve_multiplier(G, cfg);
  Eigen::VectorXd tg = G * sol.t;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < tg.size(); ++i) acc += std::log1p(tg[i]);
  return -acc;
}

}  // namespace elphi
