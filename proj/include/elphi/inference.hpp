#pragma once

// Decision layer: chi-square and scaled-F reference distributions, critical
// values, p-values and confidence-region membership for the empirical
// divergence statistics. The scaled-F calibration replaces the chi-square
// critical value by ((n-1) q / (n - q)) F_{q, n-q}, Owen's small-sample
// correction.

#include <string>

#include "elphi/divergence.hpp"
#include "elphi/el.hpp"
#include "elphi/special.hpp"

namespace elphi {

enum class Approximation { chi2, f_owen };

inline std::string to_string(Approximation a) {
  return a == Approximation::chi2 ? "chi2" : "f";
}

inline Approximation approximation_from_string(const std::string& s) {
  if (s == "chi2") return Approximation::chi2;
  if (s == "f" || s == "f_owen") return Approximation::f_owen;
  throw std::invalid_argument("approximation: expected 'chi2' or 'f'");
}

// Critical value ((n-1) q / (n-q)) F_{q, n-q; level}.
inline double owen_critical(int n, int q, double level) {
  if (n <= q) throw DomainError("owen_critical: need n > q");
  double scale = static_cast<double>(n - 1) * q / static_cast<double>(n - q);
  return scale * f_quantile(q, n - q, level);
}

inline double critical_value(Approximation approx, int n, int q, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw DomainError("critical_value: level outside (0,1)");
  return approx == Approximation::chi2 ? chi2_quantile(q, level)
                                       : owen_critical(n, q, level);
}

// Survival probability of the statistic under the selected reference.
inline double statistic_p_value(Approximation approx, int n, int q, double stat) {
  if (approx == Approximation::chi2) return chi2_sf(q, stat);
  double scale = static_cast<double>(n - 1) * q / static_cast<double>(n - q);
  return f_sf(q, n - q, stat / scale);
}

struct TestReport {
  double statistic;
  int dof;
  double level;
  Approximation approx;
  double critical_value;
  double p_value;
  bool reject;  // strict: statistic > critical_value
};

// Runs the divergence test of beta = beta0 against the two-sided
// alternative. Infeasible samples (origin outside the hull of the scores,
// or no multiplier root) surface as NoRoot, never as a rejection.
inline TestReport run_test(const Dataset& data, const BetaVector& beta0,
                           const PhiSpec& spec, double level,
                           Approximation approx, const SolverConfig& cfg = {}) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("run_test: level outside (0,1)");
  Eigen::MatrixXd G = score_matrix(data, beta0);
  FeasibilityReport fr = feasibility_check(G);
  if (!fr.hull_contains_origin || !fr.gram_positive_definite) {
    throw NoRoot("run_test: empirical likelihood infeasible at beta0",
                 std::numeric_limits<double>::infinity());
  }
  MultiplierSolution sol = solve_multiplier(G, cfg);
  Eigen::VectorXd d = (G * sol.t).array() + 1.0;
  double stat = spec.h ? h_phi_statistic_from(d, spec.phi, *spec.h)
                       : phi_statistic_from(d, spec.phi);
  const int n = static_cast<int>(data.n());
  const int q = static_cast<int>(data.q());
  TestReport rep;
  rep.statistic = stat;
  rep.dof = q;
  rep.level = level;
  rep.approx = approx;
  rep.critical_value = critical_value(approx, n, q, level);
  rep.p_value = statistic_p_value(approx, n, q, stat);
  rep.reject = stat > rep.critical_value;
  return rep;
}

// Membership in the level-(level) confidence region: statistic strictly
// below the critical value. Complements run_test's rejection rule.
inline bool confidence_region_contains(const Dataset& data, const BetaVector& beta,
                                       const PhiSpec& spec, double level,
                                       Approximation approx,
                                       const SolverConfig& cfg = {}) {
  TestReport rep = run_test(data, beta, spec, level, approx, cfg);
  return rep.statistic < rep.critical_value;
}

}  // namespace elphi
