#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "gcsets/panel.hpp"

namespace gcsets {

// Sample cross-covariance of the columns of U against the columns of V:
// entry (r,s) is the centered cross-product divided by N-1, with per-column
// means taken over the N rows passed in.  When U and V are the same object
// the result is symmetrized exactly.
Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v);

// Covariance blocks of the joint vector (present effect set, lagged cause
// set, lagged conditioning columns).  Index i is the effect (present) side,
// index j the cause (lagged) side, x the conditioning columns.
struct BlockCovariance {
    Eigen::MatrixXd s_ii, s_ij, s_ix;
    Eigen::MatrixXd s_jj, s_jx;
    Eigen::MatrixXd s_xx;
    std::vector<std::string> x_names;

    Eigen::Index m() const { return s_ii.rows(); }
    Eigen::Index n() const { return s_jj.rows(); }
    Eigen::Index q() const { return s_xx.rows(); }

    // Full (m+n+q) x (m+n+q) covariance in block layout, for inspection.
    Eigen::MatrixXd assembled() const;
};

// Blocks computed directly from the three column groups (rows are aligned
// observations).  Errors when the conditioning dimension q reaches the number
// of rows minus one, where the conditioning fit becomes saturated.
BlockCovariance blocks_from_matrices(const Eigen::MatrixXd& present_effect,
                                     const Eigen::MatrixXd& lagged_cause,
                                     const Eigen::MatrixXd& lagged_cond,
                                     std::vector<std::string> x_names = {});

// Conditioning columns for a test of cause_set -> effect_set: all lagged
// columns except the cause set's, in panel order.  Unassigned series are
// included unless include_unassigned is false.  When effect_set == cause_set
// this leaves all lagged columns outside the set.
std::vector<std::string> conditioning_names(const LaggedDesign& design, const SetPartition& partition,
                                            const std::string& effect_set, const std::string& cause_set,
                                            bool include_unassigned = true);

// Blocks for the pair (effect_set, cause_set) on a lag-aligned design.
BlockCovariance assemble_blocks(const LaggedDesign& design, const SetPartition& partition,
                                const std::string& effect_set, const std::string& cause_set,
                                bool include_unassigned = true);

// Conditional covariance of (effect, cause) given the conditioning columns,
// via Schur complements against S_xx.  base_trace_* carry the unconditional
// traces so downstream code can detect blocks annihilated by conditioning.
struct ConditionalCovariance {
    Eigen::MatrixXd c_ii, c_ij, c_ji, c_jj;
    double base_trace_ii = 0.0;
    double base_trace_jj = 0.0;
};

// Ridge added to the diagonal of S_xx before inversion: 1e-8 * trace(S_xx)/q,
// zero when q == 0.
double default_ridge(const BlockCovariance& blocks);

// S_xx is inverted by symmetric eigendecomposition, discarding eigenvalues
// below 1e-12 of the largest (pseudo-inverse).  Passing a ridge overrides the
// default; ridge 0 uses the exact Schur complement.
ConditionalCovariance conditional_cov(const BlockCovariance& blocks,
                                      std::optional<double> ridge = std::nullopt);

}  // namespace gcsets
