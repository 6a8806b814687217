#pragma once

// Special functions backing the chi-square, F and normal distributions.
// Regularized incomplete gamma/beta use the classic series / continued
// fraction switch (modified Lentz); target accuracy ~1e-12 relative,
// verified against external references in the test suite.

#include <cmath>
#include <limits>

#include "elphi/errors.hpp"

namespace elphi {

namespace detail {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kFpMin = std::numeric_limits<double>::min() / kEps;
constexpr int kMaxSeriesIter = 500;

// Lower regularized incomplete gamma by power series, x < a + 1.
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < kMaxSeriesIter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma by continued fraction, x >= a + 1.
inline double gamma_q_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxSeriesIter; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Continued fraction for the incomplete beta function (Lentz).
inline double betacf(double a, double b, double x) {
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxSeriesIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps) break;
  }
  return h;
}

}  // namespace detail

// Lower regularized incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw DomainError("gamma_p: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_cf(a, x);
}

// Upper regularized incomplete gamma Q(a, x) = 1 - P(a, x).
inline double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw DomainError("gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

// Regularized incomplete beta I_x(a, b).
inline double beta_inc(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw DomainError("beta_inc: need a, b > 0");
  if (x < 0.0 || x > 1.0) throw DomainError("beta_inc: need x in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::betacf(a, b, x) / a;
  }
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

// Standard normal distribution function.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

// Standard normal quantile, solved by safeguarded Halley iteration on the
// erfc-based distribution function (machine accuracy for p away from the
// extreme denormal tails).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p outside (0,1)");
  if (p == 0.5) return 0.0;
  double pp = std::min(p, 1.0 - p);
  // Crude start: asymptotic tail inverse, blended with a linear core.
  double z0;
  if (pp < 0.1) {
    double r = std::sqrt(-2.0 * std::log(pp));
    z0 = -(r - (std::log(r) + std::log(2.0 * M_PI) / 2.0) / r);
  } else {
    z0 = (pp - 0.5) * std::sqrt(2.0 * M_PI);
  }
  double lo = -40.0, hi = 0.0;  // target Phi(z) = pp with z <= 0
  double z = std::min(std::max(z0, lo), hi);
  for (int it = 0; it < 100; ++it) {
    double f = normal_cdf(z) - pp;
    if (f > 0.0) {
      hi = z;
    } else {
      lo = z;
    }
    double pdf = normal_pdf(z);
    double u = (pdf > 0.0) ? f / pdf : 0.0;
    double step = 2.0 * u / (2.0 + z * u);  // Halley update for Phi
    double zn = z - step;
    if (!(zn > lo && zn < hi)) zn = 0.5 * (lo + hi);
    if (std::fabs(zn - z) <= 1e-15 * (1.0 + std::fabs(z))) {
      z = zn;
      break;
    }
    z = zn;
  }
  return (p < 0.5) ? z : -z;
}

// Chi-square distribution with dof degrees of freedom.
inline double chi2_cdf(int dof, double x) {
  if (dof < 1) throw DomainError("chi2_cdf: dof >= 1 required");
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * dof, 0.5 * x);
}

inline double chi2_sf(int dof, double x) {
  if (dof < 1) throw DomainError("chi2_sf: dof >= 1 required");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * x);
}

// Chi-square quantile: bracketed Newton on the regularized gamma.
inline double chi2_quantile(int dof, double p) {
  if (dof < 1) throw DomainError("chi2_quantile: dof >= 1 required");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("chi2_quantile: p outside (0,1)");
  double a = 0.5 * dof;
  // Wilson-Hilferty start.
  double z = normal_quantile(p);
  double h = 2.0 / (9.0 * dof);
  double x = dof * std::pow(1.0 - h + z * std::sqrt(h), 3);
  if (x <= 0.0) x = 1e-8;
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    double f = gamma_p(a, 0.5 * x) - p;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    // d/dx P(a, x/2) = 0.5 * x^(a-1) e^(-x/2) / (2^a Gamma(a))
    double logd = (a - 1.0) * std::log(0.5 * x) - 0.5 * x - std::lgamma(a);
    double deriv = 0.5 * std::exp(logd);
    double xn = (deriv > 0.0) ? x - f / deriv : x;
    if (!(xn > lo && xn < hi)) {
      xn = std::isinf(hi) ? 2.0 * x : 0.5 * (lo + hi);
    }
    if (std::fabs(xn - x) <= 1e-14 * (1.0 + std::fabs(x))) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x;
}

// F distribution with (d1, d2) degrees of freedom.
inline double f_cdf(int d1, int d2, double x) {
  if (d1 < 1 || d2 < 1) throw DomainError("f_cdf: dof >= 1 required");
  if (x <= 0.0) return 0.0;
  double y = d1 * x / (d1 * x + d2);
  return beta_inc(0.5 * d1, 0.5 * d2, y);
}

inline double f_sf(int d1, int d2, double x) {
  if (d1 < 1 || d2 < 1) throw DomainError("f_sf: dof >= 1 required");
  if (x <= 0.0) return 1.0;
  double y = d2 / (d1 * x + d2);
  return beta_inc(0.5 * d2, 0.5 * d1, y);
}

// F quantile via bracketed Newton on the incomplete beta.
inline double f_quantile(int d1, int d2, double p) {
  if (d1 < 1 || d2 < 1) throw DomainError("f_quantile: dof >= 1 required");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("f_quantile: p outside (0,1)");
  double a = 0.5 * d1, b = 0.5 * d2;
  // Solve I_y(a, b) = p in y, then map back to the F scale.
  double y = a / (a + b);  // start at the mean of the Beta(a, b)
  double lo = 0.0, hi = 1.0;
  double logbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  for (int it = 0; it < 200; ++it) {
    double f = beta_inc(a, b, y) - p;
    if (f > 0.0) {
      hi = y;
    } else {
      lo = y;
    }
    double logd = (a - 1.0) * std::log(y) + (b - 1.0) * std::log1p(-y) - logbeta;
    double deriv = std::exp(logd);
    double yn = (deriv > 0.0) ? y - f / deriv : y;
    if (!(yn > lo && yn < hi)) yn = 0.5 * (lo + hi);
    if (std::fabs(yn - y) <= 1e-15 * (1.0 + std::fabs(y))) {
      y = yn;
      break;
    }
    y = yn;
  }
  return d2 * y / (d1 * (1.0 - y));
}

}  // namespace elphi
