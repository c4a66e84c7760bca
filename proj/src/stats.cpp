#include "postfeas/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "postfeas/errors.hpp"

namespace postfeas {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr double kHalfLog2Pi = 0.91893853320467274178;

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

// Stirling remainder: ln Gamma(z) - [(z - 1/2) ln z - z + ln(2 pi)/2], valid for z >= 10.
double stirling_remainder(double z) {
  const double z2 = 1.0 / (z * z);
  return (1.0 / 12.0 -
          z2 * (1.0 / 360.0 - z2 * (1.0 / 1260.0 - z2 * (1.0 / 1680.0 - z2 * (1.0 / 1188.0))))) /
         z;
}

// ln[ x^a (1-x)^b / B(a,b) ].
double log_beta_prefactor(double x, double a, double b) {
  if (std::min(a, b) >= 10.0) {
    // Stirling form keeps precision when a and b are both large.
    const double s = a + b;
    const double x0 = a / s;
    const double y0 = b / s;
    const double lx = std::log1p((x - x0) / x0);
    const double ly = std::log1p((x0 - x) / y0);
    return a * lx + b * ly + 0.5 * std::log(a * b / (2.0 * std::numbers::pi * s)) -
           (stirling_remainder(a) + stirling_remainder(b) - stirling_remainder(s));
  }
  return a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
}

// Continued fraction for I_x(a,b) (modified Lentz).
double beta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 100000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) return h;
  }
  throw NumericalBreakdown("incomplete beta continued fraction did not converge");
}

// Series for P(a, x), x < a + 1.
double gamma_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 100000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
    }
  }
  throw NumericalBreakdown("incomplete gamma series did not converge");
}

// Continued fraction for Q(a, x), x >= a + 1.
double gamma_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) {
      return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
    }
  }
  throw NumericalBreakdown("incomplete gamma continued fraction did not converge");
}

// Solves cdf(x) = p on (lo, hi) given a monotone cdf, its density and a start point.
// Newton steps are kept inside the running bracket; bisection otherwise.
template <class Cdf, class Pdf>
double invert_monotone(Cdf&& cdf, Pdf&& pdf, double p, double x, double lo, double hi) {
  for (int iter = 0; iter < 2000; ++iter) {
    const double f = cdf(x) - p;
    if (f == 0.0) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double dens = pdf(x);
    double next = x - f / dens;
    if (!(dens > 0.0) || !std::isfinite(next) || next <= lo || next >= hi) {
      if (std::isfinite(hi)) {
        next = lo == 0.0 ? 0.5 * hi : 0.5 * (lo + hi);
        if (lo > 0.0 && hi / lo > 4.0) next = std::sqrt(lo * hi);
      } else {
        next = lo > 0.0 ? 2.0 * lo : lo + 1.0;
      }
    }
    if (std::abs(next - x) <= 4.0 * kEps * std::abs(next)) return next;
    if (std::isfinite(hi) && hi - lo <= 4.0 * kEps * std::abs(hi)) return next;
    x = next;
  }
  return x;
}

}  // namespace

double log_gamma(double x) {
  require(x > 0.0 && std::isfinite(x), "log_gamma requires finite x > 0");
  if (x < 0.5) {
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  }
  static constexpr double kCoef[9] = {0.99999999999980993,     676.5203681218851,
                                      -1259.1392167224028,     771.32342877765313,
                                      -176.61502916214059,     12.507343278686905,
                                      -0.13857109526572012,    9.9843695780195716e-6,
                                      1.5056327351493116e-7};
  const double z = x - 1.0;
  double acc = kCoef[0];
  for (int i = 1; i < 9; ++i) acc += kCoef[i] / (z + i);
  const double t = z + 7.5;
  return kHalfLog2Pi + (z + 0.5) * std::log(t) - t + std::log(acc);
}

double log_beta(double a, double b) {
  require(a > 0.0 && b > 0.0, "log_beta requires a, b > 0");
  if (std::min(a, b) >= 10.0) {
    const double s = a + b;
    return kHalfLog2Pi + (a - 0.5) * std::log(a / s) + b * std::log1p(-a / s) - 0.5 * std::log(b) +
           stirling_remainder(a) + stirling_remainder(b) - stirling_remainder(s);
  }
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double reg_inc_beta(double x, double a, double b) {
  require(a > 0.0 && b > 0.0, "reg_inc_beta requires a, b > 0");
  require(x >= 0.0 && x <= 1.0, "reg_inc_beta requires x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  double result;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    result = std::exp(log_beta_prefactor(x, a, b)) * beta_continued_fraction(x, a, b) / a;
  } else {
    const double y = 1.0 - x;
    result = 1.0 - std::exp(log_beta_prefactor(y, b, a)) * beta_continued_fraction(y, b, a) / b;
  }
  return std::clamp(result, 0.0, 1.0);
}

double beta_pdf(double x, double a, double b) {
  require(a > 0.0 && b > 0.0, "beta_pdf requires a, b > 0");
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return std::exp(log_beta_prefactor(x, a, b)) / (x * (1.0 - x));
}

double beta_quantile(double p, double a, double b) {
  require(p > 0.0 && p < 1.0, "beta_quantile requires p in (0, 1)");
  require(a > 0.0 && b > 0.0, "beta_quantile requires a, b > 0");

  double x;
  if (a >= 1.0 && b >= 1.0) {
    const double pp = p < 0.5 ? p : 1.0 - p;
    const double t = std::sqrt(-2.0 * std::log(pp));
    double z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
    if (p < 0.5) z = -z;
    const double al = (z * z - 3.0) / 6.0;
    const double h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
    const double w = z * std::sqrt(al + h) / h -
                     (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
    x = a / (a + b * std::exp(2.0 * w));
  } else {
    const double lna = std::log(a / (a + b));
    const double lnb = std::log(b / (a + b));
    const double t = std::exp(a * lna) / a;
    const double u = std::exp(b * lnb) / b;
    const double w = t + u;
    x = p < t / w ? std::pow(a * w * p, 1.0 / a) : 1.0 - std::pow(b * w * (1.0 - p), 1.0 / b);
  }
  if (!(x > 0.0 && x < 1.0)) x = 0.5;
  x = invert_monotone([&](double v) { return reg_inc_beta(v, a, b); },
                      [&](double v) { return beta_pdf(v, a, b); }, p, x, 0.0, 1.0);
  // Near the ends one ulp of x can move I by more than the Newton stopping
  // tolerance; walk to the closest double.
  double err = std::abs(reg_inc_beta(x, a, b) - p);
  for (double dir : {0.0, 1.0}) {
    for (int k = 0; k < 16; ++k) {
      const double y = std::nextafter(x, dir);
      if (!(y > 0.0 && y < 1.0)) break;
      const double e = std::abs(reg_inc_beta(y, a, b) - p);
      if (e >= err) break;
      x = y;
      err = e;
    }
  }
  return x;
}

double reg_inc_gamma_lower(double a, double x) {
  require(a > 0.0, "incomplete gamma requires a > 0");
  require(x >= 0.0, "incomplete gamma requires x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return std::clamp(gamma_series(a, x), 0.0, 1.0);
  return std::clamp(1.0 - gamma_continued_fraction(a, x), 0.0, 1.0);
}

double reg_inc_gamma_upper(double a, double x) {
  require(a > 0.0, "incomplete gamma requires a > 0");
  require(x >= 0.0, "incomplete gamma requires x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::clamp(1.0 - gamma_series(a, x), 0.0, 1.0);
  return std::clamp(gamma_continued_fraction(a, x), 0.0, 1.0);
}

double chi2_cdf(double x, double df) {
  require(df > 0.0, "chi2_cdf requires df > 0");
  if (x <= 0.0) return 0.0;
  return reg_inc_gamma_lower(0.5 * df, 0.5 * x);
}

double chi2_quantile(double p, double df) {
  require(p > 0.0 && p < 1.0, "chi2_quantile requires p in (0, 1)");
  require(df > 0.0, "chi2_quantile requires df > 0");
  const double k = 0.5 * df;
  const double log_norm = log_gamma(k) + k * std::log(2.0);
  auto pdf = [&](double x) {
    if (x <= 0.0) return 0.0;
    return std::exp((k - 1.0) * std::log(x) - 0.5 * x - log_norm);
  };
  // Wilson-Hilferty start.
  const double z = normal_quantile(p);
  const double c = 2.0 / (9.0 * df);
  double x = df * std::pow(std::max(1.0 - c + z * std::sqrt(c), 0.05), 3.0);
  if (!(x > 0.0) || !std::isfinite(x)) x = df;
  if (p <= 0.5) {
    return invert_monotone([&](double v) { return reg_inc_gamma_lower(k, 0.5 * v); }, pdf, p, x,
                           0.0, std::numeric_limits<double>::infinity());
  }
  // Upper half: drive 1 - Q toward p through Q to avoid cancellation.
  const double q = 1.0 - p;
  return invert_monotone([&](double v) { return q - reg_inc_gamma_upper(k, 0.5 * v); }, pdf, 0.0,
                         x, 0.0, std::numeric_limits<double>::infinity());
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, "normal_quantile requires p in (0, 1)");
  // Acklam's rational approximation followed by one Halley refinement.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int i = 0; i < 2; ++i) {
    // cdf(x) - p, evaluated on the tail that keeps precision.
    const double err = p < 0.5 ? normal_cdf(x) - p : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
    const double u = err * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double student_t_cdf(double t, double dof) {
  require(dof > 0.0, "student_t_cdf requires dof > 0");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * reg_inc_beta(dof / (dof + t * t), 0.5 * dof, 0.5);
  return t < 0.0 ? tail : 1.0 - tail;
}

double student_t_quantile(double p, double dof) {
  require(p > 0.0 && p < 1.0, "student_t_quantile requires p in (0, 1)");
  require(dof > 0.0, "student_t_quantile requires dof > 0");
  if (p == 0.5) return 0.0;
  const double lower = p < 0.5 ? p : 1.0 - p;  // one-sided tail mass
  double magnitude;
  if (lower < 0.25) {
    // I_x(dof/2, 1/2) = 2 * lower, t^2 = dof (1 - x) / x.
    const double x = beta_quantile(2.0 * lower, 0.5 * dof, 0.5);
    magnitude = std::sqrt(dof * (1.0 - x) / x);
  } else {
    // Near the median solve for y = 1 - x directly: I_y(1/2, dof/2) = 1 - 2 * lower.
    const double y = beta_quantile(1.0 - 2.0 * lower, 0.5, 0.5 * dof);
    magnitude = std::sqrt(dof * y / (1.0 - y));
  }
  return p < 0.5 ? -magnitude : magnitude;
}

double binomial_tail(std::uint64_t n, double eps, std::uint64_t d) {
  require(eps >= 0.0 && eps <= 1.0, "binomial_tail requires eps in [0, 1]");
  require(d >= 1, "binomial_tail requires d >= 1");
  require(d <= n + 1, "binomial_tail requires d <= N + 1");
  if (d == n + 1) return 1.0;
  if (eps == 0.0) return 1.0;
  if (eps == 1.0) return 0.0;
  const double log_eps = std::log(eps);
  const double log_one_minus = std::log1p(-eps);
  const double nn = static_cast<double>(n);
  // Log-space terms via the ratio recurrence C(N, j+1)/C(N, j) = (N - j)/(j + 1).
  double term = nn * log_one_minus;
  double max_term = term;
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(d));
  logs.push_back(term);
  for (std::uint64_t j = 0; j + 1 < d; ++j) {
    const double jj = static_cast<double>(j);
    term += std::log((nn - jj) / (jj + 1.0)) + log_eps - log_one_minus;
    logs.push_back(term);
    max_term = std::max(max_term, term);
  }
  if (max_term == -std::numeric_limits<double>::infinity()) return 0.0;
  double sum = 0.0;
  for (double lt : logs) sum += std::exp(lt - max_term);
  return std::clamp(std::exp(max_term + std::log(sum)), 0.0, 1.0);
}

double sample_normal(Rng& rng) {
  // Marsaglia polar method; the second variate is discarded to keep Rng stateless.
  while (true) {
    const double u = 2.0 * rng.uniform() - 1.0;
    const double v = 2.0 * rng.uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double sample_gamma(Rng& rng, double shape, double scale) {
  require(shape > 0.0, "sample_gamma requires shape > 0");
  require(scale > 0.0, "sample_gamma requires scale > 0");
  if (shape < 1.0) {
    // Boost: G(a) = G(a + 1) * U^(1/a).
    const double g = sample_gamma(rng, shape + 1.0, 1.0);
    return scale * g * std::pow(rng.uniform(), 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x;
    double v;
    do {
      x = sample_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return scale * d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return scale * d * v;
  }
}

double sample_student_t(Rng& rng, double dof) {
  require(dof > 0.0, "sample_student_t requires dof > 0");
  const double z = sample_normal(rng);
  const double chi2 = sample_gamma(rng, 0.5 * dof, 2.0);
  return z / std::sqrt(chi2 / dof);
}

double sample_beta(Rng& rng, double a, double b) {
  require(a > 0.0 && b > 0.0, "sample_beta requires a, b > 0");
  while (true) {
    const double x = sample_gamma(rng, a, 1.0);
    const double y = sample_gamma(rng, b, 1.0);
    const double s = x + y;
    if (s > 0.0) {
      const double r = x / s;
      if (r > 0.0 && r < 1.0) return r;
    }
  }
}

}  // namespace postfeas
