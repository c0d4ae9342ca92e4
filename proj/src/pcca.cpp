#include "gcsets/pcca.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "gcsets/errors.hpp"

namespace gcsets {

namespace {

// Negative eigenvalues within this slack (relative to the largest) are
// roundoff from the Schur complement and are truncated to zero; anything more
// negative is a genuinely indefinite input.
constexpr double kPsdSlack = 1.0e-8;

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

void check_symmetric_square(const Eigen::MatrixXd& m, const char* who) {
    if (m.rows() != m.cols())
        throw ValidationError(std::string(who) + ": matrix is not square");
    if (m.rows() == 0) return;
    const double scale = std::max(std::abs(m.trace()), 1.0e-30);
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1.0e-10 * scale)
        throw NumericError(std::string(who) + ": matrix is not symmetric (max asymmetry " +
                           std::to_string(asym) + ")");
}

// Spectral function f(M) = V diag(f(lambda)) V' with eigenvalues below
// tol * (largest) treated as zero.  exponent is -1 for the pseudo-inverse and
// -0.5 for the inverse square root.  Reports how many eigenvalues were
// dropped when `dropped` is non-null.
Eigen::MatrixXd filtered_spectral(const Eigen::MatrixXd& m, double tol, double exponent,
                                  const char* who, int* dropped) {
    check_symmetric_square(m, who);
    if (tol < 0.0) throw ValidationError(std::string(who) + ": tolerance must be non-negative");
    if (m.rows() == 0) return m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m));
    if (es.info() != Eigen::Success)
        throw NumericError(std::string(who) + ": eigendecomposition failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double largest = ev(ev.size() - 1);
    if (largest <= 0.0)
        throw NumericError(std::string(who) + ": matrix is numerically zero or negative");
    if (ev(0) < -std::max(tol, kPsdSlack) * largest)
        throw NumericError(std::string(who) + ": matrix has a negative eigenvalue (" +
                           std::to_string(ev(0)) + ")");
    Eigen::VectorXd f = Eigen::VectorXd::Zero(ev.size());
    int kept = 0;
    for (Eigen::Index d = 0; d < ev.size(); ++d) {
        if (ev(d) > tol * largest) {
            f(d) = std::pow(ev(d), exponent);
            ++kept;
        }
    }
    if (dropped) *dropped = static_cast<int>(ev.size()) - kept;
    return symmetrized(es.eigenvectors() * f.asDiagonal() * es.eigenvectors().transpose());
}

void check_cond_shapes(const ConditionalCovariance& cond) {
    const Eigen::Index m = cond.c_ii.rows();
    const Eigen::Index n = cond.c_jj.rows();
    if (m < 1 || n < 1) throw ValidationError("conditional covariance has an empty block");
    if (cond.c_ii.cols() != m || cond.c_jj.cols() != n || cond.c_ij.rows() != m ||
        cond.c_ij.cols() != n || cond.c_ji.rows() != n || cond.c_ji.cols() != m)
        throw ValidationError("conditional covariance blocks have inconsistent shapes");
}

// Errors when a conditional block lost essentially all of its unconditional
// variance (constant set, or fully explained by the conditioning columns).
void check_not_annihilated(const Eigen::MatrixXd& block, double base_trace, const char* side) {
    const double scale = std::max(base_trace, block.trace());
    if (!(scale > 0.0) || block.trace() <= 1.0e-12 * scale)
        throw NumericError(std::string("solve_pcca: ") + side +
                           " conditional covariance is numerically zero"
                           " (constant set or fully explained by conditioning)");
}

long long lex_key(double x) {
    const double scaled = std::clamp(x * 1.0e9, -9.0e18, 9.0e18);
    return std::llround(scaled);
}

// Deterministic order for eigenvector columns that share an eigenvalue:
// compare entries rounded to 1e-9.
bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index r = 0; r < a.size(); ++r) {
        const long long ka = lex_key(a(r));
        const long long kb = lex_key(b(r));
        if (ka != kb) return ka < kb;
    }
    return false;
}

}  // namespace

Eigen::MatrixXd pinv_sym(const Eigen::MatrixXd& m, double tol) {
    return filtered_spectral(m, tol, -1.0, "pinv_sym", nullptr);
}

Eigen::MatrixXd inv_sqrt_sym(const Eigen::MatrixXd& m, double tol) {
    return filtered_spectral(m, tol, -0.5, "inv_sqrt_sym", nullptr);
}

PccaResult solve_pcca(const ConditionalCovariance& cond, double tol) {
    check_cond_shapes(cond);
    check_not_annihilated(cond.c_ii, cond.base_trace_ii, "effect-side");
    check_not_annihilated(cond.c_jj, cond.base_trace_jj, "cause-side");

    const Eigen::Index m = cond.c_ii.rows();
    const Eigen::Index n = cond.c_jj.rows();
    const Eigen::Index dmax = std::min(m, n);

    PccaResult res;
    int dropped_i = 0;
    int dropped_j = 0;
    const Eigen::MatrixXd ri = filtered_spectral(cond.c_ii, tol, -0.5, "solve_pcca", &dropped_i);
    const Eigen::MatrixXd jinv = filtered_spectral(cond.c_jj, tol, -1.0, "solve_pcca", &dropped_j);
    if (dropped_i > 0)
        res.warnings.push_back("effect-side block is rank-deficient; pseudo-inverse applied");
    if (dropped_j > 0)
        res.warnings.push_back("cause-side block is rank-deficient; pseudo-inverse applied");

    const Eigen::MatrixXd a_mat = symmetrized(ri * cond.c_ij * jinv * cond.c_ji * ri);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a_mat);
    if (es.info() != Eigen::Success) throw NumericError("solve_pcca: eigendecomposition failed");

    struct Candidate {
        double lambda_raw;
        Eigen::VectorXd a;
        double a_raw_norm;
    };
    std::vector<Candidate> cands;
    cands.reserve(static_cast<std::size_t>(dmax));
    for (Eigen::Index d = 0; d < dmax; ++d) {
        const Eigen::Index src = m - 1 - d;  // eigenvalues come out ascending
        Candidate c;
        c.lambda_raw = es.eigenvalues()(src);
        Eigen::VectorXd a = ri * es.eigenvectors().col(src);
        c.a_raw_norm = a.norm();
        const double metric = a.dot(cond.c_ii * a);
        if (metric > 0.0) a /= std::sqrt(metric);
        // Sign convention: the entry of largest magnitude ends up positive.
        Eigen::Index top = 0;
        a.cwiseAbs().maxCoeff(&top);
        if (a(top) < 0.0) a = -a;
        c.a = std::move(a);
        cands.push_back(std::move(c));
    }

    const double tie_eps = 1.0e-12 * std::max(1.0, std::abs(cands.empty() ? 0.0 : cands[0].lambda_raw));
    std::stable_sort(cands.begin(), cands.end(), [&](const Candidate& x, const Candidate& y) {
        if (std::abs(x.lambda_raw - y.lambda_raw) > tie_eps) return x.lambda_raw > y.lambda_raw;
        return lex_less(x.a, y.a);
    });

    res.eigenvalues.resize(dmax);
    res.a_vectors.resize(m, dmax);
    res.b_vectors.resize(n, dmax);
    res.a_raw_norms.resize(dmax);
    res.b_raw_norms.resize(dmax);

    for (Eigen::Index d = 0; d < dmax; ++d) {
        const Candidate& c = cands[static_cast<std::size_t>(d)];
        if (c.lambda_raw > 1.0 + 1.0e-6)
            res.warnings.push_back("squared correlation " + std::to_string(c.lambda_raw) +
                                   " exceeds 1 beyond tolerance; clamped");
        if (c.lambda_raw < -kPsdSlack)
            res.warnings.push_back("squared correlation " + std::to_string(c.lambda_raw) +
                                   " is negative beyond tolerance; clamped");
        res.eigenvalues(d) = std::clamp(c.lambda_raw, 0.0, 1.0);
        res.a_vectors.col(d) = c.a;
        res.a_raw_norms(d) = c.a_raw_norm;

        Eigen::VectorXd b = jinv * (cond.c_ji * c.a);
        res.b_raw_norms(d) = b.norm();
        const double metric = b.dot(cond.c_jj * b);
        if (metric > 0.0 && std::isfinite(metric)) {
            b /= std::sqrt(metric);
        } else {
            b.setZero();
            res.warnings.push_back("canonical direction " + std::to_string(d + 1) +
                                   " has numerically zero correlation; cause-side weights unset");
        }
        res.b_vectors.col(d) = b;
    }

    res.rho = std::sqrt(res.eigenvalues(0));
    return res;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> pcca_spectra(const ConditionalCovariance& cond,
                                                         double tol) {
    check_cond_shapes(cond);
    const Eigen::Index m = cond.c_ii.rows();
    const Eigen::Index n = cond.c_jj.rows();
    const Eigen::Index dmax = std::min(m, n);

    const Eigen::MatrixXd ri = filtered_spectral(cond.c_ii, tol, -0.5, "pcca_spectra", nullptr);
    const Eigen::MatrixXd rj = filtered_spectral(cond.c_jj, tol, -0.5, "pcca_spectra", nullptr);
    const Eigen::MatrixXd iinv = filtered_spectral(cond.c_ii, tol, -1.0, "pcca_spectra", nullptr);
    const Eigen::MatrixXd jinv = filtered_spectral(cond.c_jj, tol, -1.0, "pcca_spectra", nullptr);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(
        symmetrized(ri * cond.c_ij * jinv * cond.c_ji * ri));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(
        symmetrized(rj * cond.c_ji * iinv * cond.c_ij * rj));
    if (ea.info() != Eigen::Success || eb.info() != Eigen::Success)
        throw NumericError("pcca_spectra: eigendecomposition failed");

    Eigen::VectorXd sa(dmax), sb(dmax);
    for (Eigen::Index d = 0; d < dmax; ++d) {
        sa(d) = ea.eigenvalues()(m - 1 - d);
        sb(d) = eb.eigenvalues()(n - 1 - d);
    }
    return {sa, sb};
}

namespace {

std::vector<LoadingEntry> side_entries(const Eigen::VectorXd& weights,
                                       const std::vector<std::string>& names) {
    if (static_cast<Eigen::Index>(names.size()) != weights.size())
        throw ValidationError("canonical_loadings: name count does not match weight vector length");
    std::vector<LoadingEntry> entries;
    for (Eigen::Index r = 0; r < weights.size(); ++r)
        entries.push_back({names[static_cast<std::size_t>(r)], weights(r), 0, false});
    std::stable_sort(entries.begin(), entries.end(), [](const LoadingEntry& a, const LoadingEntry& b) {
        return std::abs(a.weight) > std::abs(b.weight);
    });
    const double dom_sign = entries.empty() || entries.front().weight >= 0.0 ? 1.0 : -1.0;
    for (std::size_t r = 0; r < entries.size(); ++r) {
        entries[r].rank = static_cast<int>(r + 1);
        entries[r].opposing = entries[r].weight * dom_sign < 0.0;
    }
    return entries;
}

void format_side(std::ostringstream& out, const char* title, const std::vector<LoadingEntry>& side) {
    out << title << ":\n";
    char buf[64];
    for (const auto& e : side) {
        std::snprintf(buf, sizeof(buf), "%+0.4f", e.weight);
        out << "  " << e.rank << ". " << e.series << " " << buf;
        if (e.opposing) out << " (opposing)";
        out << "\n";
    }
}

}  // namespace

LoadingsReport canonical_loadings(const PccaResult& result,
                                  const std::vector<std::string>& effect_names,
                                  const std::vector<std::string>& cause_names) {
    if (result.a_vectors.cols() < 1)
        throw ValidationError("canonical_loadings: result has no canonical vectors");
    LoadingsReport report;
    report.effect_side = side_entries(result.a_vectors.col(0), effect_names);
    report.cause_side = side_entries(result.b_vectors.col(0), cause_names);
    return report;
}

std::string format_loadings(const LoadingsReport& report) {
    std::ostringstream out;
    format_side(out, "effect side", report.effect_side);
    format_side(out, "cause side", report.cause_side);
    return out.str();
}

}  // namespace gcsets
