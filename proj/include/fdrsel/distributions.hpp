#pragma once

namespace fdrsel::dist {

double normal_pdf(double x);
double normal_cdf(double x);

/// Upper tail P(Z > x), accurate far into the tail.
double normal_sf(double x);

/// Phi^{-1}(prob); +inf at prob = 1, -inf at prob = 0.
double normal_quantile(double prob);

/// Phi^{-1}(1 - tail) without forming 1 - tail.
double normal_upper_quantile(double tail);

/// Two-sided p-value of a Student-t statistic with df degrees of freedom.
double t_two_sided_p(double t, double df);

/// Two-sided p-value of a standard-normal statistic.
double z_two_sided_p(double z);

} // namespace fdrsel::dist
