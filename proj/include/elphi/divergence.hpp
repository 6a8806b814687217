#pragma once

// Divergence generators and the empirical divergence test statistics.
// The workhorse is the Cressie-Read power family
//   phi_a(x) = (x^(a+1) - x - a(x-1)) / (a(a+1)),
// with the Kullback-Leibler kernel at a = 0 and its reverse at a = -1, plus
// the transformed (h, phi) families of Renyi, Sharma-Mittal and
// Bhattacharya. Test statistics are evaluated from a solved multiplier as
//   T = (2 / phi''(1)) * sum_i phi(1 + t'g_i) / (1 + t'g_i).

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "elphi/el.hpp"
#include "elphi/errors.hpp"

namespace elphi {

// Twice differentiable convex generator with phi(1) = 0 and phi''(1) > 0.
// phi_at_zero carries lim_{x->0+} phi(x) (may be +inf) for the divergence
// conventions on zero probabilities.
struct PhiFamily {
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  std::function<double(double)> d2phi;
  double phi_at_zero;
  std::string label;
};

// Increasing transform applied on top of a phi-divergence; h(0) = 0 and
// dh0 = h'(0) > 0.
struct HFunction {
  std::function<double(double)> h;
  double dh0;
};

struct HPhiPair {
  HFunction h;
  PhiFamily phi;
};

namespace detail {
inline void require_positive(double x, const char* who) {
  if (!(x > 0.0)) throw DomainError(std::string(who) + ": argument must be > 0");
}
}  // namespace detail

// Power-divergence generator indexed by a; the removable singularities at
// a = 0 and a = -1 are routed to their logarithmic limits when |a| (resp.
// |a+1|) falls below 1e-8, which avoids catastrophic cancellation nearby.
inline PhiFamily power_phi(double a) {
  PhiFamily fam;
  fam.label = "power(a=" + std::to_string(a) + ")";
  fam.d2phi = [a](double x) {
    detail::require_positive(x, "power_phi.d2phi");
    return std::pow(x, a - 1.0);
  };
  if (std::fabs(a) < 1e-8) {
    fam.phi = [](double x) {
      detail::require_positive(x, "power_phi.phi");
      return x * std::log(x) - x + 1.0;
    };
    fam.dphi = [](double x) {
      detail::require_positive(x, "power_phi.dphi");
      return std::log(x);
    };
    fam.phi_at_zero = 1.0;
  } else if (std::fabs(a + 1.0) < 1e-8) {
    fam.phi = [](double x) {
      detail::require_positive(x, "power_phi.phi");
      return -std::log(x) + x - 1.0;
    };
    fam.dphi = [](double x) {
      detail::require_positive(x, "power_phi.dphi");
      return 1.0 - 1.0 / x;
    };
    fam.phi_at_zero = std::numeric_limits<double>::infinity();
  } else {
    fam.phi = [a](double x) {
      detail::require_positive(x, "power_phi.phi");
      return (std::pow(x, a + 1.0) - x - a * (x - 1.0)) / (a * (a + 1.0));
    };
    fam.dphi = [a](double x) {
      detail::require_positive(x, "power_phi.dphi");
      return ((a + 1.0) * std::pow(x, a) - 1.0 - a) / (a * (a + 1.0));
    };
    fam.phi_at_zero = (a > -1.0) ? 1.0 / (a + 1.0)
                                 : std::numeric_limits<double>::infinity();
  }
  return fam;
}

// Shared generator of the Renyi and Sharma-Mittal rows:
// phi(x) = (x^a - a(x-1) - 1) / (a(a-1)), a not in {0, 1}.
inline PhiFamily renyi_phi(double a) {
  if (a == 0.0 || a == 1.0)
    throw ParameterError("renyi_phi: a must differ from 0 and 1");
  PhiFamily fam;
  fam.label = "renyi_phi(a=" + std::to_string(a) + ")";
  fam.phi = [a](double x) {
    detail::require_positive(x, "renyi_phi.phi");
    return (std::pow(x, a) - a * (x - 1.0) - 1.0) / (a * (a - 1.0));
  };
  fam.dphi = [a](double x) {
    detail::require_positive(x, "renyi_phi.dphi");
    return (std::pow(x, a - 1.0) - 1.0) / (a - 1.0);
  };
  fam.d2phi = [a](double x) {
    detail::require_positive(x, "renyi_phi.d2phi");
    return std::pow(x, a - 2.0);
  };
  fam.phi_at_zero =
      (a > 0.0) ? 1.0 / a : std::numeric_limits<double>::infinity();
  return fam;
}

inline HPhiPair named_h_renyi(double a) {
  if (a == 0.0 || a == 1.0)
    throw ParameterError("named_h_renyi: a must differ from 0 and 1");
  double c = a * (a - 1.0);
  HFunction h;
  h.dh0 = 1.0;
  h.h = [c](double x) {
    double arg = c * x + 1.0;
    if (!(arg > 0.0)) throw DomainError("renyi h: divergence outside domain");
    return std::log(arg) / c;
  };
  return {h, renyi_phi(a)};
}

inline HPhiPair named_h_sharma_mittal(double a, double b) {
  if (a == 1.0 || b == 1.0)
    throw ParameterError("named_h_sharma_mittal: a and b must differ from 1");
  if (a == 0.0)
    throw ParameterError("named_h_sharma_mittal: a must differ from 0");
  if (a < 0.0)
    throw ParameterError("named_h_sharma_mittal: h'(0) = a must be positive");
  double c = a * (a - 1.0);
  double m = (b - 1.0) / (a - 1.0);
  HFunction h;
  h.dh0 = a;
  h.h = [c, m, b](double x) {
    double arg = 1.0 + c * x;
    if (!(arg > 0.0))
      throw DomainError("sharma_mittal h: divergence outside domain");
    return (std::pow(arg, m) - 1.0) / (b - 1.0);
  };
  return {h, renyi_phi(a)};
}

inline HPhiPair named_h_bhattacharya() {
  HFunction h;
  h.dh0 = 1.0;
  h.h = [](double x) {
    if (!(x < 1.0)) throw DomainError("bhattacharya h: divergence outside domain");
    return -std::log1p(-x);
  };
  PhiFamily fam;
  fam.label = "bhattacharya_phi";
  fam.phi = [](double x) {
    detail::require_positive(x, "bhattacharya_phi.phi");
    return -std::sqrt(x) + 0.5 * (x + 1.0);
  };
  fam.dphi = [](double x) {
    detail::require_positive(x, "bhattacharya_phi.dphi");
    return -0.5 / std::sqrt(x) + 0.5;
  };
  fam.d2phi = [](double x) {
    detail::require_positive(x, "bhattacharya_phi.d2phi");
    return 0.25 * std::pow(x, -1.5);
  };
  fam.phi_at_zero = 0.5;
  return {h, fam};
}

// d_phi(p, q) = sum_i q_i phi(p_i / q_i), with 0 * phi(0/0) = 0. Terms with
// p_i = 0 and q_i > 0 use the limit of phi at 0+, which may be infinite.
inline double phi_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                             const PhiFamily& phi) {
  if (p.size() != q.size())
    throw std::invalid_argument("phi_divergence: length mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0)
      throw DomainError("phi_divergence: negative probability entry");
    if (q[i] > 0.0) {
      acc += (p[i] > 0.0) ? q[i] * phi.phi(p[i] / q[i]) : q[i] * phi.phi_at_zero;
    } else if (p[i] > 0.0) {
      throw DomainError("phi_divergence: positive p on zero q");
    }
  }
  return acc;
}

// psi(x) = -phi(x)/x + phi'(x); vanishes at x = 1 for members of Phi.
inline double psi_transform(const PhiFamily& phi, double x) {
  detail::require_positive(x, "psi_transform");
  return -phi.phi(x) / x + phi.dphi(x);
}

// Removes the linear part: Psi(x) = phi(x) - phi'(1)(x - 1). The output has
// Psi'(1) = 0 and generates the same divergence values as the input.
inline PhiFamily center_phi(const PhiFamily& phi) {
  double slope = phi.dphi(1.0);
  PhiFamily out;
  out.label = phi.label + " (centered)";
  auto base_phi = phi.phi;
  auto base_dphi = phi.dphi;
  out.phi = [base_phi, slope](double x) { return base_phi(x) - slope * (x - 1.0); };
  out.dphi = [base_dphi, slope](double x) { return base_dphi(x) - slope; };
  out.d2phi = phi.d2phi;
  out.phi_at_zero = phi.phi_at_zero + slope;  // +inf stays +inf
  return out;
}

// Statistic kernel given the solved one-plus-t'g values.
inline double phi_statistic_from(const Eigen::VectorXd& one_plus_tg,
                                 const PhiFamily& phi) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < one_plus_tg.size(); ++i)
    acc += phi.phi(one_plus_tg[i]) / one_plus_tg[i];
  return 2.0 * acc / phi.d2phi(1.0);
}

inline double h_phi_statistic_from(const Eigen::VectorXd& one_plus_tg,
                                   const PhiFamily& phi, const HFunction& h) {
  const double n = static_cast<double>(one_plus_tg.size());
  double d = 0.0;
  for (Eigen::Index i = 0; i < one_plus_tg.size(); ++i)
    d += phi.phi(one_plus_tg[i]) / one_plus_tg[i];
  d /= n;
  return 2.0 * n * h.h(d) / (phi.d2phi(1.0) * h.dh0);
}

// Empirical phi-divergence test statistic at beta0 (solves the multiplier
// system internally).
inline double test_statistic(const Dataset& data, const BetaVector& beta0,
                             const PhiFamily& phi, const SolverConfig& cfg = {}) {
  Eigen::MatrixXd G = score_matrix(data, beta0);
  MultiplierSolution sol = solve_multiplier(G, cfg);
  Eigen::VectorXd d = (G * sol.t).array() + 1.0;
  return phi_statistic_from(d, phi);
}

// Empirical (h, phi)-divergence test statistic; reduces to test_statistic
// when h is the identity.
inline double h_test_statistic(const Dataset& data, const BetaVector& beta0,
                               const PhiFamily& phi, const HFunction& h,
                               const SolverConfig& cfg = {}) {
  Eigen::MatrixXd G = score_matrix(data, beta0);
  MultiplierSolution sol = solve_multiplier(G, cfg);
  Eigen::VectorXd d = (G * sol.t).array() + 1.0;
  return h_phi_statistic_from(d, phi, h);
}

// --- CLI selection grammar ---
// power:a=<real> | hphi:renyi:a=<real> | hphi:sharma_mittal:a=<real>,b=<real>
// | hphi:bhattacharya

struct PhiSpec {
  PhiFamily phi;
  std::optional<HFunction> h;
  std::string text;
};

inline PhiSpec parse_phi_spec(const std::string& text) {
  auto parse_value = [&](const std::string& s, const std::string& key) {
    if (s.rfind(key + "=", 0) != 0)
      throw ParameterError("phi spec: expected '" + key + "=<real>' in '" + text + "'");
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(s.substr(key.size() + 1), &pos);
    } catch (const std::exception&) {
      throw ParameterError("phi spec: bad number in '" + text + "'");
    }
    if (pos != s.size() - key.size() - 1)
      throw ParameterError("phi spec: bad number in '" + text + "'");
    return v;
  };
  PhiSpec spec;
  spec.text = text;
  if (text.rfind("power:", 0) == 0) {
    spec.phi = power_phi(parse_value(text.substr(6), "a"));
    return spec;
  }
  if (text.rfind("hphi:", 0) == 0) {
    std::string rest = text.substr(5);
    if (rest == "bhattacharya") {
      HPhiPair pair = named_h_bhattacharya();
      spec.phi = pair.phi;
      spec.h = pair.h;
      return spec;
    }
    if (rest.rfind("renyi:", 0) == 0) {
      HPhiPair pair = named_h_renyi(parse_value(rest.substr(6), "a"));
      spec.phi = pair.phi;
      spec.h = pair.h;
      return spec;
    }
    if (rest.rfind("sharma_mittal:", 0) == 0) {
      std::string args = rest.substr(14);
      std::size_t comma = args.find(',');
      if (comma == std::string::npos)
        throw ParameterError("phi spec: sharma_mittal needs a=<real>,b=<real>");
      HPhiPair pair = named_h_sharma_mittal(parse_value(args.substr(0, comma), "a"),
                                            parse_value(args.substr(comma + 1), "b"));
      spec.phi = pair.phi;
      spec.h = pair.h;
      return spec;
    }
  }
  throw ParameterError("phi spec: unrecognized '" + text + "'");
}

// Statistic dispatch for a parsed spec.
inline double statistic_for_spec(const Dataset& data, const BetaVector& beta0,
                                 const PhiSpec& spec, const SolverConfig& cfg = {}) {
  if (spec.h) return h_test_statistic(data, beta0, spec.phi, *spec.h, cfg);
  return test_statistic(data, beta0, spec.phi, cfg);
}

}  // namespace elphi
