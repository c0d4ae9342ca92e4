#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gcsets/panel.hpp"

namespace gcsets {

// Per-equation OLS fit of a first-order vector autoregression with intercept.
struct VarFit {
    std::vector<std::string> series_names;
    Eigen::MatrixXd coef;        // k x k; coef(r,c) is the effect of lagged series c on series r
    Eigen::VectorXd intercepts;  // k
    Eigen::MatrixXd fitted;      // N x k
    Eigen::MatrixXd residuals;   // N x k
    Eigen::MatrixXd resid_cov;   // k x k, divisor N - k - 1
    Eigen::MatrixXd gram_inv;    // (k+1) x (k+1) inverse of X'X, intercept column first
    Eigen::Index n_rows = 0;
};

VarFit fit_var1(const LaggedDesign& design);

// Wald test that every coefficient from the cause set's lagged columns into
// the effect set's equations is zero.  The coefficient covariance uses the
// homoskedastic Kronecker form resid_cov x gram_inv; the statistic is
// compared against chi-squared with m*n degrees of freedom.
struct WaldResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
};

WaldResult wald_block_test(const VarFit& fit, const SetPartition& partition,
                           const std::string& effect_set, const std::string& cause_set);

}  // namespace gcsets
