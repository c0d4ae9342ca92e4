#pragma once

namespace gcsets {

// Standard normal CDF and survival function.
double normal_cdf(double x);
double normal_sf(double x);

// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x),
// computed by the usual series / continued-fraction split at x = a + 1.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Upper tail of the chi-squared distribution with df degrees of freedom.
double chi_squared_sf(double x, int df);

}  // namespace gcsets
