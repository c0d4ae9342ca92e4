#include "gcsets/var.hpp"

#include <algorithm>
#include <cmath>

#include "gcsets/errors.hpp"
#include "gcsets/mathstats.hpp"

namespace gcsets {

VarFit fit_var1(const LaggedDesign& design) {
    const Eigen::Index n = design.rows();
    const Eigen::Index k = design.present.cols();
    if (n < k + 2)
        throw ValidationError("fit_var1: " + std::to_string(n) + " aligned rows cannot support " +
                              std::to_string(k) + " series (need at least k + 2 rows)");

    Eigen::MatrixXd x(n, k + 1);
    x.col(0).setOnes();
    x.rightCols(k) = design.lagged;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < k + 1)
        throw NumericError("fit_var1: regressor matrix is rank-deficient"
                           " (collinear or constant lagged series)");
    const Eigen::MatrixXd bhat = qr.solve(design.present);  // (k+1) x k

    VarFit fit;
    fit.series_names = design.series_names;
    fit.n_rows = n;
    fit.intercepts = bhat.row(0).transpose();
    fit.coef = bhat.bottomRows(k).transpose();
    fit.fitted = x * bhat;
    fit.residuals = design.present - fit.fitted;
    fit.resid_cov = (fit.residuals.transpose() * fit.residuals) / static_cast<double>(n - k - 1);
    fit.resid_cov = 0.5 * (fit.resid_cov + fit.resid_cov.transpose()).eval();

    const Eigen::MatrixXd xtx = x.transpose() * x;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
    if (!lu.isInvertible()) throw NumericError("fit_var1: X'X is singular");
    fit.gram_inv = lu.inverse();
    fit.gram_inv = 0.5 * (fit.gram_inv + fit.gram_inv.transpose()).eval();
    return fit;
}

WaldResult wald_block_test(const VarFit& fit, const SetPartition& partition,
                           const std::string& effect_set, const std::string& cause_set) {
    auto index_of = [&](const std::string& name) {
        const auto it = std::find(fit.series_names.begin(), fit.series_names.end(), name);
        if (it == fit.series_names.end())
            throw ValidationError("wald_block_test: series '" + name + "' not in the fitted model");
        return static_cast<Eigen::Index>(it - fit.series_names.begin());
    };
    std::vector<Eigen::Index> effect_rows, cause_cols;
    for (const auto& name : partition.members(effect_set)) effect_rows.push_back(index_of(name));
    for (const auto& name : partition.members(cause_set)) cause_cols.push_back(index_of(name));

    const Eigen::Index m = static_cast<Eigen::Index>(effect_rows.size());
    const Eigen::Index n = static_cast<Eigen::Index>(cause_cols.size());
    const Eigen::Index mn = m * n;

    Eigen::VectorXd v(mn);
    Eigen::MatrixXd cov(mn, mn);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            const Eigen::Index row = a * n + b;
            v(row) = fit.coef(effect_rows[static_cast<std::size_t>(a)],
                              cause_cols[static_cast<std::size_t>(b)]);
            for (Eigen::Index a2 = 0; a2 < m; ++a2) {
                for (Eigen::Index b2 = 0; b2 < n; ++b2) {
                    const Eigen::Index col = a2 * n + b2;
                    cov(row, col) = fit.resid_cov(effect_rows[static_cast<std::size_t>(a)],
                                                  effect_rows[static_cast<std::size_t>(a2)]) *
                                    fit.gram_inv(1 + cause_cols[static_cast<std::size_t>(b)],
                                                 1 + cause_cols[static_cast<std::size_t>(b2)]);
                }
            }
        }
    }

    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw NumericError("wald_block_test " + cause_set + " -> " + effect_set +
                           ": coefficient covariance is singular"
                           " (degenerate residuals or collinear regressors)");

    WaldResult res;
    res.statistic = v.dot(llt.solve(v));
    res.df = static_cast<int>(mn);
    res.p_value = chi_squared_sf(res.statistic, res.df);
    return res;
}

}  // namespace gcsets
