#pragma once

#include <cstdint>

#include "postfeas/rng.hpp"

namespace postfeas {

/// ln Gamma(x) for x > 0 (Lanczos, g = 7, 9 terms; reflection below 1/2).
double log_gamma(double x);

double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double x, double a, double b);

/// Beta(a, b) density.
double beta_pdf(double x, double a, double b);

/// Inverse of reg_inc_beta in x: bracketed Newton with bisection fallback.
double beta_quantile(double p, double a, double b);

/// Regularized lower incomplete gamma P(a, x) and its complement Q(a, x).
double reg_inc_gamma_lower(double a, double x);
double reg_inc_gamma_upper(double a, double x);

double chi2_cdf(double x, double df);
double chi2_quantile(double p, double df);

double normal_cdf(double x);
double normal_quantile(double p);

double student_t_cdf(double t, double dof);
double student_t_quantile(double p, double dof);

/// sum_{j=0}^{d-1} C(N, j) eps^j (1 - eps)^(N - j), i.e. P(Binomial(N, eps) < d).
double binomial_tail(std::uint64_t n, double eps, std::uint64_t d);

double sample_normal(Rng& rng);
double sample_gamma(Rng& rng, double shape, double scale);
double sample_student_t(Rng& rng, double dof);
double sample_beta(Rng& rng, double a, double b);

}  // namespace postfeas
