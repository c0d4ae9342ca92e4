#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "gcsets/lagcov.hpp"

namespace gcsets {

// Symmetric pseudo-inverse: eigenvalues below tol * (largest) contribute
// nothing.
Eigen::MatrixXd pinv_sym(const Eigen::MatrixXd& m, double tol = 1.0e-12);

// Symmetric inverse square root R with R * M * R = identity on the range of
// M.  Eigenvalues below tol * (largest) are treated as zero; eigenvalues more
// negative than the positive-semidefinite slack reject the input.
Eigen::MatrixXd inv_sqrt_sym(const Eigen::MatrixXd& m, double tol = 1.0e-12);

// First partial canonical correlation and the full canonical system.
//
// a_vectors column d is the weight vector on the effect (present) side,
// normalized so a' * C_ii * a = 1 and signed so its largest-magnitude entry
// is positive.  b_vectors column d follows from the proportionality
// b ~ C_jj^+ * C_ji * a with a positive constant, normalized under C_jj, so
// each canonical pair correlates non-negatively.  Columns whose eigenvalue is
// numerically zero get a zero b vector and a warning.
struct PccaResult {
    double rho = 0.0;
    Eigen::VectorXd eigenvalues;  // min(m,n) squared correlations, descending, clamped to [0,1]
    Eigen::MatrixXd a_vectors;    // m x min(m,n)
    Eigen::MatrixXd b_vectors;    // n x min(m,n)
    Eigen::VectorXd a_raw_norms;  // Euclidean norms before metric normalization
    Eigen::VectorXd b_raw_norms;
    std::vector<std::string> warnings;
};

PccaResult solve_pcca(const ConditionalCovariance& cond, double tol = 1.0e-12);

// Raw (unclamped) eigenvalue spectra of the two equivalent eigenproblems,
// one whitened on the effect side and one on the cause side, both truncated
// to the top min(m,n).  They agree up to numerical error; exposed for
// consistency checks.
std::pair<Eigen::VectorXd, Eigen::VectorXd> pcca_spectra(const ConditionalCovariance& cond,
                                                         double tol = 1.0e-12);

// Signed weight report for the leading canonical pair.  Entries are ranked
// by weight magnitude; `opposing` marks entries whose sign differs from the
// dominant entry on the same side.
struct LoadingEntry {
    std::string series;
    double weight = 0.0;
    int rank = 0;
    bool opposing = false;
};

struct LoadingsReport {
    std::vector<LoadingEntry> effect_side;
    std::vector<LoadingEntry> cause_side;
};

LoadingsReport canonical_loadings(const PccaResult& result,
                                  const std::vector<std::string>& effect_names,
                                  const std::vector<std::string>& cause_names);

std::string format_loadings(const LoadingsReport& report);

}  // namespace gcsets
