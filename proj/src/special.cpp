#include "zonedet/special.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "zonedet/common.hpp"

namespace zonedet {

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-15;
constexpr double kTiny = 1e-300;

// Series expansion of P(a, x), valid and fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw NumericError("incomplete gamma series failed to converge (a=" + std::to_string(a) +
                     ", x=" + std::to_string(x) + ")");
}

// Lentz continued fraction for Q(a, x), valid for x >= a + 1.
double gamma_q_cont_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) {
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw NumericError("incomplete gamma continued fraction failed to converge");
}

// Lentz continued fraction used by regularized_beta.
double beta_cont_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction failed to converge");
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) {
    throw ValidationError("regularized_gamma_p requires a > 0 and x >= 0");
  }
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cont_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) {
    throw ValidationError("regularized_gamma_q requires a > 0 and x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cont_fraction(a, x);
}

double chi2_cdf(double x, double dof) {
  if (!(dof > 0.0)) throw ValidationError("chi2_cdf requires dof > 0");
  if (x <= 0.0) return 0.0;
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_quantile(double p, int dof) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw ValidationError("chi2_quantile requires p in (0, 1), got " + std::to_string(p));
  }
  if (dof < 1) throw ValidationError("chi2_quantile requires dof >= 1");

  double lo = 0.0;
  double hi = dof + 10.0 * std::sqrt(2.0 * dof) + 10.0;
  while (chi2_cdf(hi, dof) < p) {
    hi *= 2.0;
    if (hi > 1e300) throw NumericError("chi2_quantile bracket expansion overflow");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi2_cdf(mid, dof) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double noncentral_chi2_cdf(double x, double dof, double noncentrality) {
  if (x < 0.0) throw ValidationError("noncentral_chi2_cdf requires x >= 0");
  if (noncentrality < 0.0) throw ValidationError("noncentral_chi2_cdf requires nc >= 0");
  if (!(dof > 0.0)) throw ValidationError("noncentral_chi2_cdf requires dof > 0");
  if (x == 0.0) return 0.0;
  if (noncentrality == 0.0) return chi2_cdf(x, dof);

  const double half_nc = 0.5 * noncentrality;
  const double half_x = 0.5 * x;
  const auto mode = static_cast<long long>(std::floor(half_nc));

  // Poisson weight and central CDF at the mode; both are recurred outward.
  const double log_w0 = -half_nc + mode * std::log(half_nc) - std::lgamma(mode + 1.0);
  const double w0 = std::exp(log_w0);
  if (w0 == 0.0) return 0.0;  // every mixture weight underflows

  const double a0 = 0.5 * dof + mode;
  const double p0 = regularized_gamma_p(a0, half_x);
  // t(a) = x^a e^-x / Gamma(a+1) evaluated at half_x, the step between
  // consecutive central CDFs: P(a+1, x) = P(a, x) - t(a).
  const double log_t0 = a0 * std::log(half_x) - half_x - std::lgamma(a0 + 1.0);
  const double t0 = std::exp(log_t0);

  double sum = w0 * p0;
  double weight_visited = w0;
  constexpr double kWeightFloor = 1e-17;
  constexpr double kTailMass = 1e-12;

  // Upward sweep: j = mode+1, mode+2, ...
  {
    double w = w0, p = p0, t = t0, a = a0;
    for (long long j = mode + 1; weight_visited < 1.0 - kTailMass; ++j) {
      w *= half_nc / static_cast<double>(j);
      p -= t;
      if (p < 0.0) p = 0.0;
      t *= half_x / (a + 1.0);
      a += 1.0;
      sum += w * p;
      weight_visited += w;
      if (w < kWeightFloor) break;
      if (j - mode > 100000000LL) throw NumericError("noncentral_chi2_cdf series too long");
    }
  }
  // Downward sweep: j = mode-1, ..., 0
  {
    double w = w0, p = p0, t = t0, a = a0;
    for (long long j = mode; j >= 1 && weight_visited < 1.0 - kTailMass; --j) {
      w *= static_cast<double>(j) / half_nc;
      t *= a / half_x;
      a -= 1.0;
      p += t;
      if (p > 1.0) p = 1.0;
      sum += w * p;
      weight_visited += w;
      if (w < kWeightFloor) break;
    }
  }
  return std::min(sum, 1.0);
}

double marcum_q(double order, double a, double b) {
  if (a < 0.0 || b < 0.0) throw ValidationError("marcum_q requires a >= 0 and b >= 0");
  if (!(order >= 0.5)) throw ValidationError("marcum_q requires order >= 0.5");
  return 1.0 - noncentral_chi2_cdf(b * b, 2.0 * order, a * a);
}

double regularized_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("regularized_beta requires a, b > 0");
  if (x < 0.0 || x > 1.0) throw ValidationError("regularized_beta requires x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cont_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_cont_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) throw ValidationError("student_t_two_sided_p requires dof > 0");
  if (std::isinf(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return regularized_beta(0.5 * dof, 0.5, x);
}

}  // namespace zonedet
