#pragma once

// Logistic regression primitives: the inverse-logit link, per-observation
// score contributions g(x, y, beta) = x * (y - pi(x'beta)), their sums and
// derivatives, a damped-Newton maximum likelihood fit, and synthetic data
// generation for the intercept + standard-normal-covariate designs used in
// the simulation study.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "elphi/errors.hpp"
#include "elphi/quadrature.hpp"
#include "elphi/rng.hpp"

namespace elphi {

using BetaVector = Eigen::VectorXd;

// Stable inverse logit; branches on the sign of eta so neither branch
// exponentiates a large positive number.
inline double sigmoid(double eta) {
  if (eta >= 0.0) {
    return 1.0 / (1.0 + std::exp(-eta));
  }
  double e = std::exp(eta);
  return e / (1.0 + e);
}

// Design matrix plus binary responses.
struct Dataset {
  Eigen::MatrixXd X;  // n x q
  Eigen::VectorXd y;  // entries exactly 0 or 1

  Dataset(Eigen::MatrixXd X_in, Eigen::VectorXd y_in)
      : X(std::move(X_in)), y(std::move(y_in)) {
    const auto n = X.rows();
    const auto q = X.cols();
    if (y.size() != n) throw std::invalid_argument("Dataset: X/y row mismatch");
    if (n < q + 1) throw std::invalid_argument("Dataset: need n >= q + 1");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (y[i] != 0.0 && y[i] != 1.0)
        throw std::invalid_argument("Dataset: y entries must be 0 or 1");
    }
    if (!X.allFinite()) throw std::invalid_argument("Dataset: X must be finite");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < q) throw std::invalid_argument("Dataset: X is column rank deficient");
  }

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index q() const { return X.cols(); }
};

// One simulation design: logit(P(Y=1|X=x)) = beta0 + beta1 * x, X ~ N(0,1).
// marginal_rate records the implied overall P(Y=1).
struct SimulationModel {
  double beta0;
  double beta1;
  double marginal_rate;

  SimulationModel(double b0, double b1, double rate)
      : beta0(b0), beta1(b1), marginal_rate(rate) {
    if (!(rate > 0.0 && rate < 1.0))
      throw std::invalid_argument("SimulationModel: marginal_rate outside (0,1)");
  }

  BetaVector beta() const {
    BetaVector b(2);
    b << beta0, beta1;
    return b;
  }
};

// The four designs of the simulation study.
inline std::vector<SimulationModel> paper_models() {
  return {SimulationModel(0.00, 4.36, 0.5), SimulationModel(-1.16, 4.20, 0.4),
          SimulationModel(-2.16, 3.71, 0.3), SimulationModel(-2.80, 2.82, 0.2)};
}

// Score contribution of a single observation.
inline Eigen::VectorXd score_g(const Eigen::VectorXd& x, double y,
                               const BetaVector& beta) {
  if (x.size() != beta.size())
    throw std::invalid_argument("score_g: dimension mismatch");
  return x * (y - sigmoid(x.dot(beta)));
}

inline Eigen::VectorXd score_sum(const Dataset& data, const BetaVector& beta) {
  if (beta.size() != data.q())
    throw std::invalid_argument("score_sum: dimension mismatch");
  Eigen::VectorXd s = Eigen::VectorXd::Zero(data.q());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    double pi = sigmoid(data.X.row(i).dot(beta));
    s += data.X.row(i).transpose() * (data.y[i] - pi);
  }
  return s;
}

// d/dbeta of score_sum: -sum_i x_i x_i' pi_i (1 - pi_i). Symmetric and
// negative semidefinite.
inline Eigen::MatrixXd score_jacobian(const Dataset& data, const BetaVector& beta) {
  if (beta.size() != data.q())
    throw std::invalid_argument("score_jacobian: dimension mismatch");
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(data.q(), data.q());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    double pi = sigmoid(data.X.row(i).dot(beta));
    j -= data.X.row(i).transpose() * data.X.row(i) * (pi * (1.0 - pi));
  }
  return j;
}

// Newton iteration on the estimating equations with step halving (up to 30
// halvings whenever the residual does not decrease). The returned root is
// both the classical MLE and the empirical MLE, at which the empirical
// likelihood weights are uniform.
inline BetaVector fit_mle(const Dataset& data, const BetaVector& init,
                          double tol = 1e-10, int max_iter = 100) {
  if (tol <= 0.0) throw std::invalid_argument("fit_mle: tol must be positive");
  BetaVector beta = init;
  Eigen::VectorXd s = score_sum(data, beta);
  double res = s.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < max_iter; ++it) {
    if (res <= tol) return beta;
    Eigen::MatrixXd h = score_jacobian(data, beta);
    Eigen::LDLT<Eigen::MatrixXd> fac(-h);
    if (fac.info() != Eigen::Success || !fac.isPositive() ||
        fac.vectorD().minCoeff() <= 1e-14 * fac.vectorD().maxCoeff()) {
      throw SingularJacobian("fit_mle: singular score Jacobian");
    }
    Eigen::VectorXd step = fac.solve(s);
    double alpha = 1.0;
    bool moved = false;
    for (int half = 0; half <= 30; ++half) {
      BetaVector cand = beta + alpha * step;
      Eigen::VectorXd sc = score_sum(data, cand);
      double rc = sc.lpNorm<Eigen::Infinity>();
      if (rc < res) {
        beta = cand;
        s = sc;
        res = rc;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) {
      throw NonConvergence("fit_mle: step halving stalled (possible separation)", it);
    }
  }
  if (res <= tol) return beta;
  throw NonConvergence("fit_mle: max iterations reached (possible separation)",
                       max_iter);
}

// Draws a dataset from a simulation model: column 1 is the intercept,
// column 2 holds i.i.d. N(0,1) draws, responses are Bernoulli at the
// model's success probability. All covariate draws precede all response
// draws in the stream, so the output is a pure function of (model, n, seed).
inline Dataset generate_sample(const SimulationModel& model, int n,
                               std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("generate_sample: need n >= 3");
  SplitMix64 rng(seed);
  Eigen::MatrixXd X(n, 2);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = rng.normal();
  }
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double pi = sigmoid(model.beta0 + model.beta1 * X(i, 1));
    y[i] = (rng.uniform01() < pi) ? 1.0 : 0.0;
  }
  return Dataset(std::move(X), std::move(y));
}

// P(Y=1) = E[sigmoid(beta0 + beta1 X)], X ~ N(0,1), by Gauss-Hermite.
inline double marginal_event_rate(const SimulationModel& model, int quad_order = 40) {
  if (quad_order < 20)
    throw std::invalid_argument("marginal_event_rate: quad_order >= 20 required");
  GaussHermiteRule rule(quad_order);
  return rule.expect(
      [&](double x) { return sigmoid(model.beta0 + model.beta1 * x); });
}

// --- Dataset CSV interchange: header "x1,...,xq,y", y in {0,1} ---

inline void write_dataset_csv(const Dataset& data, std::ostream& out) {
  for (Eigen::Index j = 0; j < data.q(); ++j) out << "x" << (j + 1) << ",";
  out << "y\n";
  char buf[40];
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.q(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.X(i, j));
      out << buf << ",";
    }
    out << static_cast<int>(data.y[i]) << "\n";
  }
}

inline void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_dataset_csv(data, out);
}

inline Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("dataset CSV: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) header.push_back(tok);
  }
  if (header.size() < 2 || header.back() != "y")
    throw std::invalid_argument("dataset CSV: header must be x1,...,xq,y");
  const std::size_t q = header.size() - 1;
  for (std::size_t j = 0; j < q; ++j) {
    if (header[j] != "x" + std::to_string(j + 1))
      throw std::invalid_argument("dataset CSV: header must be x1,...,xq,y");
  }
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ss, tok, ',')) {
      std::size_t pos = 0;
      double v;
      try {
        v = std::stod(tok, &pos);
      } catch (const std::exception&) {
        throw std::invalid_argument("dataset CSV: bad number at line " +
                                    std::to_string(lineno));
      }
      if (pos != tok.size())
        throw std::invalid_argument("dataset CSV: bad number at line " +
                                    std::to_string(lineno));
      row.push_back(v);
    }
    if (row.size() != q + 1)
      throw std::invalid_argument("dataset CSV: wrong field count at line " +
                                  std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd X(rows.size(), q);
  Eigen::VectorXd y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < q; ++j) X(i, j) = rows[i][j];
    y[i] = rows[i][q];
  }
  return Dataset(std::move(X), std::move(y));
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_dataset_csv(in);
}

}  // namespace elphi
