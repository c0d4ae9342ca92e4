#include "gcsets/lagcov.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <set>

#include "gcsets/errors.hpp"

namespace gcsets {

namespace {

constexpr double kPinvTol = 1.0e-12;

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

// Pseudo-inverse of a symmetric matrix, discarding eigenvalues below
// tol * (largest eigenvalue).
Eigen::MatrixXd pinv_sym(const Eigen::MatrixXd& m, double tol, bool* all_discarded) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m));
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double largest = ev.cwiseAbs().maxCoeff();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
    int kept = 0;
    for (Eigen::Index d = 0; d < ev.size(); ++d) {
        if (ev(d) > tol * largest) {
            inv(d) = 1.0 / ev(d);
            ++kept;
        }
    }
    if (all_discarded) *all_discarded = (kept == 0);
    return symmetrized(es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose());
}

Eigen::MatrixXd centered(const Eigen::MatrixXd& m) {
    return m.rowwise() - m.colwise().mean();
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& source, const std::vector<Eigen::Index>& cols) {
    Eigen::MatrixXd out(source.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = source.col(cols[c]);
    return out;
}

}  // namespace

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) {
    if (u.rows() != v.rows())
        throw ValidationError("sample_cov: row counts differ (" + std::to_string(u.rows()) +
                              " vs " + std::to_string(v.rows()) + ")");
    if (u.rows() < 2) throw ValidationError("sample_cov: needs at least 2 rows");
    const double denom = static_cast<double>(u.rows() - 1);
    if (&u == &v) {
        const Eigen::MatrixXd uc = centered(u);
        return symmetrized((uc.transpose() * uc) / denom);
    }
    return (centered(u).transpose() * centered(v)) / denom;
}

Eigen::MatrixXd BlockCovariance::assembled() const {
    const Eigen::Index mm = m(), nn = n(), qq = q();
    Eigen::MatrixXd full(mm + nn + qq, mm + nn + qq);
    full.topLeftCorner(mm, mm) = s_ii;
    full.block(0, mm, mm, nn) = s_ij;
    full.block(mm, 0, nn, mm) = s_ij.transpose();
    full.block(mm, mm, nn, nn) = s_jj;
    if (qq > 0) {
        full.block(0, mm + nn, mm, qq) = s_ix;
        full.block(mm + nn, 0, qq, mm) = s_ix.transpose();
        full.block(mm, mm + nn, nn, qq) = s_jx;
        full.block(mm + nn, mm, qq, nn) = s_jx.transpose();
        full.block(mm + nn, mm + nn, qq, qq) = s_xx;
    }
    return full;
}

BlockCovariance blocks_from_matrices(const Eigen::MatrixXd& present_effect,
                                     const Eigen::MatrixXd& lagged_cause,
                                     const Eigen::MatrixXd& lagged_cond,
                                     std::vector<std::string> x_names) {
    const Eigen::Index rows = present_effect.rows();
    if (lagged_cause.rows() != rows || (lagged_cond.size() > 0 && lagged_cond.rows() != rows))
        throw ValidationError("covariance blocks: column groups have different row counts");
    if (rows < 2) throw ValidationError("covariance blocks: need at least 2 aligned rows");
    if (present_effect.cols() < 1 || lagged_cause.cols() < 1)
        throw ValidationError("covariance blocks: empty effect or cause set");
    const Eigen::Index q = lagged_cond.cols();
    if (q >= rows - 1)
        throw NumericError("conditioning set has " + std::to_string(q) +
                           " columns but only " + std::to_string(rows) +
                           " aligned rows; the conditional covariance is degenerate"
                           " (use fewer conditioning series or a longer series)");

    const double denom = static_cast<double>(rows - 1);
    const Eigen::MatrixXd ic = centered(present_effect);
    const Eigen::MatrixXd jc = centered(lagged_cause);

    BlockCovariance b;
    b.s_ii = symmetrized((ic.transpose() * ic) / denom);
    b.s_ij = (ic.transpose() * jc) / denom;
    b.s_jj = symmetrized((jc.transpose() * jc) / denom);
    if (q > 0) {
        const Eigen::MatrixXd xc = centered(lagged_cond);
        b.s_ix = (ic.transpose() * xc) / denom;
        b.s_jx = (jc.transpose() * xc) / denom;
        b.s_xx = symmetrized((xc.transpose() * xc) / denom);
    } else {
        b.s_ix.resize(present_effect.cols(), 0);
        b.s_jx.resize(lagged_cause.cols(), 0);
        b.s_xx.resize(0, 0);
    }
    b.x_names = std::move(x_names);
    return b;
}

std::vector<std::string> conditioning_names(const LaggedDesign& design, const SetPartition& partition,
                                            const std::string& effect_set, const std::string& cause_set,
                                            bool include_unassigned) {
    if (!partition.has_label(effect_set)) throw ValidationError("unknown set label: " + effect_set);
    if (!partition.has_label(cause_set)) throw ValidationError("unknown set label: " + cause_set);
    const auto& cause_members = partition.members(cause_set);
    const std::set<std::string> excluded(cause_members.begin(), cause_members.end());
    const auto& assigned = partition.assignments();
    std::vector<std::string> names;
    for (const auto& name : design.series_names) {
        if (excluded.count(name)) continue;
        if (!include_unassigned && assigned.find(name) == assigned.end()) continue;
        names.push_back(name);
    }
    return names;
}

BlockCovariance assemble_blocks(const LaggedDesign& design, const SetPartition& partition,
                                const std::string& effect_set, const std::string& cause_set,
                                bool include_unassigned) {
    auto cols_of = [&](const std::vector<std::string>& names) {
        std::vector<Eigen::Index> cols;
        cols.reserve(names.size());
        for (const auto& n : names) cols.push_back(design.column_of(n));
        return cols;
    };
    const auto x_names = conditioning_names(design, partition, effect_set, cause_set, include_unassigned);
    const Eigen::MatrixXd yi = gather_columns(design.present, cols_of(partition.members(effect_set)));
    const Eigen::MatrixXd lj = gather_columns(design.lagged, cols_of(partition.members(cause_set)));
    const Eigen::MatrixXd lx = gather_columns(design.lagged, cols_of(x_names));
    return blocks_from_matrices(yi, lj, lx, x_names);
}

double default_ridge(const BlockCovariance& blocks) {
    const Eigen::Index q = blocks.q();
    if (q == 0) return 0.0;
    return 1.0e-8 * blocks.s_xx.trace() / static_cast<double>(q);
}

ConditionalCovariance conditional_cov(const BlockCovariance& blocks, std::optional<double> ridge) {
    const double r = ridge.value_or(default_ridge(blocks));
    if (r < 0.0) throw ValidationError("conditional_cov: ridge must be non-negative");

    ConditionalCovariance c;
    c.base_trace_ii = blocks.s_ii.trace();
    c.base_trace_jj = blocks.s_jj.trace();

    if (blocks.q() == 0) {
        c.c_ii = blocks.s_ii;
        c.c_ij = blocks.s_ij;
        c.c_ji = blocks.s_ij.transpose();
        c.c_jj = blocks.s_jj;
        return c;
    }

    Eigen::MatrixXd sxx = blocks.s_xx;
    sxx.diagonal().array() += r;
    bool all_discarded = false;
    const Eigen::MatrixXd w = pinv_sym(sxx, kPinvTol, &all_discarded);
    if (all_discarded) {
        std::string msg = "conditional_cov: conditioning covariance is numerically zero";
        std::string degenerate;
        for (Eigen::Index d = 0; d < blocks.s_xx.rows(); ++d) {
            if (blocks.s_xx(d, d) <= 0.0 && d < static_cast<Eigen::Index>(blocks.x_names.size())) {
                if (!degenerate.empty()) degenerate += ", ";
                degenerate += blocks.x_names[static_cast<std::size_t>(d)];
            }
        }
        if (!degenerate.empty()) msg += " (zero-variance columns: " + degenerate + ")";
        throw NumericError(msg);
    }

    const Eigen::MatrixXd iw = blocks.s_ix * w;  // m x q
    const Eigen::MatrixXd jw = blocks.s_jx * w;  // n x q
    c.c_ii = symmetrized(blocks.s_ii - iw * blocks.s_ix.transpose());
    c.c_jj = symmetrized(blocks.s_jj - jw * blocks.s_jx.transpose());
    c.c_ij = blocks.s_ij - iw * blocks.s_jx.transpose();
    c.c_ji = c.c_ij.transpose();
    return c;
}

}  // namespace gcsets
