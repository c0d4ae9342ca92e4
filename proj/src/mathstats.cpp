#include "gcsets/mathstats.hpp"

#include <cmath>

#include "gcsets/errors.hpp"

namespace gcsets {

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1.0e-15;
constexpr double kTiny = 1.0e-300;

// Series expansion of P(a,x); converges fast for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a,x) evaluated with the modified Lentz method;
// converges fast for x >= a + 1.
double gamma_q_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double gamma_p(double a, double x) {
    if (a <= 0.0) throw ValidationError("gamma_p: shape parameter must be positive");
    if (x < 0.0) throw ValidationError("gamma_p: argument must be non-negative");
    if (x == 0.0) return 0.0;
    return (x < a + 1.0) ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
    if (a <= 0.0) throw ValidationError("gamma_q: shape parameter must be positive");
    if (x < 0.0) throw ValidationError("gamma_q: argument must be non-negative");
    if (x == 0.0) return 1.0;
    return (x < a + 1.0) ? 1.0 - gamma_p_series(a, x) : gamma_q_cf(a, x);
}

double chi_squared_sf(double x, int df) {
    if (df < 1) throw ValidationError("chi_squared_sf: degrees of freedom must be >= 1");
    if (x < 0.0) throw ValidationError("chi_squared_sf: statistic must be non-negative");
    return gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

}  // namespace gcsets
