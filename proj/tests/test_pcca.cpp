#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "gcsets/errors.hpp"
#include "gcsets/lagcov.hpp"
#include "gcsets/pcca.hpp"
#include "gcsets/rng.hpp"
#include "oracles.hpp"

using namespace gcsets;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
    return m;
}

Eigen::MatrixXd random_spd(Rng& rng, int n) {
    const Eigen::MatrixXd b = random_matrix(rng, n + 4, n);
    return sample_cov(b, b) + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

// A random invertible matrix with determinant bounded away from zero.
Eigen::MatrixXd random_invertible(Rng& rng, int n) {
    for (;;) {
        Eigen::MatrixXd t = random_matrix(rng, n, n);
        if (std::abs(t.determinant()) > 0.1) return t;
    }
}

}  // namespace

TEST_CASE("inverse square root inverts diagonal and dense SPD matrices") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
    d.diagonal() << 4.0, 9.0, 0.25;
    const Eigen::MatrixXd r = inv_sqrt_sym(d);
    CHECK(r(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(r(2, 2) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(r(0, 1)) < 1e-14);

    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
    CHECK((inv_sqrt_sym(eye) - eye).cwiseAbs().maxCoeff() < 1e-12);

    Rng rng(201);
    const Eigen::MatrixXd spd = random_spd(rng, 5);
    const Eigen::MatrixXd ri = inv_sqrt_sym(spd);
    CHECK((ri * spd * ri - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((ri - ri.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("inverse square root rejects asymmetric and negative input") {
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, -0.5, 1.0;
    CHECK_THROWS_AS(inv_sqrt_sym(asym), NumericError);

    Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(inv_sqrt_sym(neg), NumericError);

    Eigen::MatrixXd mixed = Eigen::MatrixXd::Zero(2, 2);
    mixed.diagonal() << 1.0, -0.5;  // clearly indefinite
    CHECK_THROWS_AS(inv_sqrt_sym(mixed), NumericError);

    CHECK_THROWS_AS(inv_sqrt_sym(Eigen::MatrixXd::Identity(2, 2), -1.0), ValidationError);
}

TEST_CASE("pseudo-inverse satisfies the Moore-Penrose identities") {
    Rng rng(202);
    const Eigen::MatrixXd spd = random_spd(rng, 4);
    CHECK((pinv_sym(spd) * spd - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);

    // Rank-2 PSD matrix.
    const Eigen::MatrixXd u = random_matrix(rng, 4, 2);
    const Eigen::MatrixXd low = u * u.transpose();
    const Eigen::MatrixXd p = pinv_sym(low);
    CHECK((low * p * low - low).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((p * low * p - p).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("singleton sets reduce to the absolute partial correlation") {
    for (int inst = 0; inst < 12; ++inst) {
        Rng rng(300 + static_cast<std::uint64_t>(inst));
        const int n = 35 + inst;
        const Eigen::MatrixXd x = random_matrix(rng, n, 2);
        Eigen::MatrixXd lj = random_matrix(rng, n, 1);
        lj += 0.6 * x.col(0);
        Eigen::MatrixXd yi = random_matrix(rng, n, 1);
        yi += 0.5 * lj - 0.4 * x.col(1);

        const auto cond = conditional_cov(blocks_from_matrices(yi, lj, x), 0.0);
        const PccaResult res = solve_pcca(cond);
        const double oracle = std::abs(oracles::partial_corr(yi.col(0), lj.col(0), x));
        CHECK(std::abs(res.rho - oracle) < 1e-10);
        CHECK(res.eigenvalues(0) == doctest::Approx(oracle * oracle).epsilon(1e-9));
    }
}

TEST_CASE("uncorrelated blocks give rho zero and identical copies give rho one") {
    const int n = 3;
    ConditionalCovariance cond;
    cond.c_ii = Eigen::MatrixXd::Identity(n, n);
    cond.c_jj = Eigen::MatrixXd::Identity(n, n);
    cond.c_ij = Eigen::MatrixXd::Zero(n, n);
    cond.c_ji = Eigen::MatrixXd::Zero(n, n);
    cond.base_trace_ii = cond.base_trace_jj = static_cast<double>(n);
    const PccaResult zero = solve_pcca(cond);
    CHECK(zero.rho == 0.0);
    CHECK(zero.eigenvalues.maxCoeff() < 1e-12);

    Rng rng(204);
    const Eigen::MatrixXd data = random_matrix(rng, 40, 2);
    const Eigen::MatrixXd empty(40, 0);
    const auto copy_cond = conditional_cov(blocks_from_matrices(data, data, empty));
    const PccaResult one = solve_pcca(copy_cond);
    CHECK(std::abs(one.rho - 1.0) < 1e-10);
}

TEST_CASE("rho is invariant under invertible maps of either side or the conditioners") {
    for (int inst = 0; inst < 10; ++inst) {
        Rng rng(400 + static_cast<std::uint64_t>(inst));
        const int n = 45;
        const Eigen::MatrixXd x = random_matrix(rng, n, 2);
        Eigen::MatrixXd lj = random_matrix(rng, n, 3);
        lj.col(0) += 0.5 * x.col(0);
        Eigen::MatrixXd yi = random_matrix(rng, n, 2);
        yi.col(1) += 0.7 * lj.col(0) - 0.3 * x.col(1);

        const double base = solve_pcca(conditional_cov(blocks_from_matrices(yi, lj, x), 0.0)).rho;
        const Eigen::MatrixXd ti = random_invertible(rng, 2);
        const Eigen::MatrixXd tj = random_invertible(rng, 3);
        const Eigen::MatrixXd tx = random_invertible(rng, 2);

        const double map_i =
            solve_pcca(conditional_cov(blocks_from_matrices(yi * ti.transpose(), lj, x), 0.0)).rho;
        const double map_j =
            solve_pcca(conditional_cov(blocks_from_matrices(yi, lj * tj.transpose(), x), 0.0)).rho;
        const double map_x =
            solve_pcca(conditional_cov(blocks_from_matrices(yi, lj, x * tx.transpose()), 0.0)).rho;
        CHECK(std::abs(base - map_i) < 1e-8);
        CHECK(std::abs(base - map_j) < 1e-8);
        CHECK(std::abs(base - map_x) < 1e-8);
    }
}

TEST_CASE("the two whitened eigenproblems share their spectrum") {
    for (int inst = 0; inst < 25; ++inst) {
        Rng rng(500 + static_cast<std::uint64_t>(inst));
        const int n = 40;
        const int m_dim = 2 + static_cast<int>(rng.uniform_index(3));
        const int n_dim = 2 + static_cast<int>(rng.uniform_index(3));
        const Eigen::MatrixXd x = random_matrix(rng, n, 2);
        Eigen::MatrixXd lj = random_matrix(rng, n, n_dim);
        Eigen::MatrixXd yi = random_matrix(rng, n, m_dim);
        yi.col(0) += 0.6 * lj.col(0);

        const auto cond = conditional_cov(blocks_from_matrices(yi, lj, x));
        const auto [sa, sb] = pcca_spectra(cond);
        REQUIRE(sa.size() == std::min(m_dim, n_dim));
        CHECK((sa - sb).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(sa.maxCoeff() <= 1.0 + 1e-6);
        CHECK(sa.minCoeff() >= -1e-8);
    }
}

TEST_CASE("solve_pcca matches a brute-force grid maximization on small instances") {
    for (int inst = 0; inst < 20; ++inst) {
        Rng rng(600 + static_cast<std::uint64_t>(inst));
        const int n = 18 + static_cast<int>(rng.uniform_index(12));
        const int m_dim = 1 + static_cast<int>(rng.uniform_index(2));
        const int n_dim = 1 + static_cast<int>(rng.uniform_index(2));
        const int q_dim = static_cast<int>(rng.uniform_index(3));
        const Eigen::MatrixXd x = random_matrix(rng, n, q_dim);
        Eigen::MatrixXd lj = random_matrix(rng, n, n_dim);
        Eigen::MatrixXd yi = random_matrix(rng, n, m_dim);
        yi.col(0) += 0.5 * lj.col(n_dim - 1);

        const double rho = solve_pcca(conditional_cov(blocks_from_matrices(yi, lj, x), 0.0)).rho;
        const Eigen::MatrixXd ri = q_dim ? oracles::residualize(yi, x) : yi;
        const Eigen::MatrixXd rj = q_dim ? oracles::residualize(lj, x) : lj;
        const double grid = oracles::grid_max_corr(ri, rj);
        CHECK(std::abs(rho - grid) < 1e-4);
    }
}

TEST_CASE("canonical weight conventions hold") {
    Rng rng(205);
    const int n = 60;
    const Eigen::MatrixXd x = random_matrix(rng, n, 2);
    Eigen::MatrixXd lj = random_matrix(rng, n, 3);
    Eigen::MatrixXd yi = random_matrix(rng, n, 3);
    yi.col(0) += 0.8 * lj.col(1);
    yi.col(2) -= 0.4 * lj.col(0);

    const auto cond = conditional_cov(blocks_from_matrices(yi, lj, x), 0.0);
    const PccaResult res = solve_pcca(cond);
    REQUIRE(res.a_vectors.cols() == 3);

    for (Eigen::Index d = 0; d < res.a_vectors.cols(); ++d) {
        const Eigen::VectorXd a = res.a_vectors.col(d);
        const Eigen::VectorXd b = res.b_vectors.col(d);
        // Unit variance in the conditional metric.
        CHECK(a.dot(cond.c_ii * a) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(b.dot(cond.c_jj * b) == doctest::Approx(1.0).epsilon(1e-8));
        // Largest-magnitude entry of a is positive.
        Eigen::Index top = 0;
        a.cwiseAbs().maxCoeff(&top);
        CHECK(a(top) > 0.0);
        // Each canonical pair correlates non-negatively.
        CHECK(a.dot(cond.c_ij * b) >= -1e-10);
    }
    // The leading pair's correlation equals rho.
    CHECK(res.a_vectors.col(0).dot(cond.c_ij * res.b_vectors.col(0)) ==
          doctest::Approx(res.rho).epsilon(1e-8));
    // Eigenvalues are sorted descending within [0, 1].
    for (Eigen::Index d = 1; d < res.eigenvalues.size(); ++d)
        CHECK(res.eigenvalues(d) <= res.eigenvalues(d - 1) + 1e-12);
    CHECK(res.eigenvalues.minCoeff() >= 0.0);
    CHECK(res.eigenvalues.maxCoeff() <= 1.0);
    // Determinism: solving the same system twice gives identical output.
    const PccaResult again = solve_pcca(cond);
    CHECK((res.a_vectors - again.a_vectors).cwiseAbs().maxCoeff() == 0.0);
    CHECK((res.b_vectors - again.b_vectors).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant or fully conditioned sets are rejected with context") {
    ConditionalCovariance cond;
    cond.c_ii = Eigen::MatrixXd::Zero(2, 2);
    cond.c_jj = Eigen::MatrixXd::Identity(2, 2);
    cond.c_ij = Eigen::MatrixXd::Zero(2, 2);
    cond.c_ji = Eigen::MatrixXd::Zero(2, 2);
    cond.base_trace_ii = 5.0;
    cond.base_trace_jj = 2.0;
    try {
        solve_pcca(cond);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("numerically zero") != std::string::npos);
        CHECK(msg.find("constant set or fully explained by conditioning") != std::string::npos);
    }

    ConditionalCovariance bad_shape;
    bad_shape.c_ii = Eigen::MatrixXd::Identity(2, 2);
    bad_shape.c_jj = Eigen::MatrixXd::Identity(3, 3);
    bad_shape.c_ij = Eigen::MatrixXd::Zero(2, 2);  // should be 2x3
    bad_shape.c_ji = Eigen::MatrixXd::Zero(3, 2);
    CHECK_THROWS_AS(solve_pcca(bad_shape), ValidationError);
}

TEST_CASE("loadings rank by magnitude and flag opposing signs") {
    PccaResult res;
    res.rho = 0.8;
    res.eigenvalues = Eigen::VectorXd::Constant(1, 0.64);
    res.a_vectors = Eigen::MatrixXd(3, 1);
    res.a_vectors << 0.2, -0.9, 0.5;
    res.b_vectors = Eigen::MatrixXd(2, 1);
    res.b_vectors << 0.7, 0.1;
    res.a_raw_norms = Eigen::VectorXd::Ones(1);
    res.b_raw_norms = Eigen::VectorXd::Ones(1);

    const LoadingsReport rep = canonical_loadings(res, {"e1", "e2", "e3"}, {"c1", "c2"});
    REQUIRE(rep.effect_side.size() == 3);
    CHECK(rep.effect_side[0].series == "e2");
    CHECK(rep.effect_side[0].rank == 1);
    CHECK_FALSE(rep.effect_side[0].opposing);  // dominant entry defines the reference sign
    CHECK(rep.effect_side[1].series == "e3");
    CHECK(rep.effect_side[1].opposing);  // +0.5 against dominant -0.9
    CHECK(rep.effect_side[2].series == "e1");
    CHECK(rep.cause_side[0].series == "c1");
    CHECK_FALSE(rep.cause_side[1].opposing);

    const std::string text = format_loadings(rep);
    CHECK(text.find("effect side:") != std::string::npos);
    CHECK(text.find("1. e2 -0.9000") != std::string::npos);
    CHECK(text.find("2. e3 +0.5000 (opposing)") != std::string::npos);
    CHECK(text.find("cause side:") != std::string::npos);
    CHECK(text.find("1. c1 +0.7000") != std::string::npos);

    CHECK_THROWS_AS(canonical_loadings(res, {"only", "two"}, {"c1", "c2"}), ValidationError);
    PccaResult empty;
    CHECK_THROWS_AS(canonical_loadings(empty, {}, {}), ValidationError);
}
