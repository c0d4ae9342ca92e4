#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gcsets/errors.hpp"
#include "gcsets/lagcov.hpp"
#include "gcsets/pcca.hpp"
#include "gcsets/rng.hpp"
#include "gcsets/simulate.hpp"

using namespace gcsets;

namespace {

struct Entry {
    int row;
    int col;
    double sign;
};

// The two benchmark coupling layouts, frozen independently of the generator.
const std::vector<Entry> kNet1{
    {0, 0, 1},  {0, 3, -1}, {1, 0, 1},  {2, 0, 1},  {2, 4, -1}, {3, 1, 1},
    {5, 7, 1},  {6, 2, 1},  {6, 5, -1}, {7, 9, 1},  {8, 4, 1},  {8, 6, -1},
    {8, 13, 1}, {9, 8, 1},  {9, 12, -1}, {10, 7, 1}};
const std::vector<Entry> kNet2{
    {0, 0, 1},  {1, 0, 1},  {1, 4, -1}, {2, 0, 1},  {2, 3, -1},  {3, 1, 1},
    {3, 3, -1}, {4, 2, 1},  {4, 12, -1}, {5, 2, 1}, {6, 2, 1},   {6, 5, -1},
    {7, 2, 1},  {7, 6, -1}, {8, 2, 1},  {8, 7, -1}, {9, 2, 1},   {9, 8, -1},
    {9, 11, 1}, {10, 10, 1}, {10, 12, -1}, {11, 10, 1}, {12, 11, 1}};

void check_matrix(SimWhich which, int k, const std::vector<Entry>& entries, double c) {
    const Eigen::MatrixXd a = sim_coefficient_matrix(which, c);
    REQUIRE(a.rows() == k);
    REQUIRE(a.cols() == k);
    int nonzero = 0;
    for (int r = 0; r < k; ++r)
        for (int col = 0; col < k; ++col)
            if (a(r, col) != 0.0) ++nonzero;
    CHECK(nonzero == static_cast<int>(entries.size()));
    for (const Entry& e : entries) CHECK(a(e.row, e.col) == e.sign * c);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("benchmark coefficient matrices have the frozen coupling pattern") {
    check_matrix(SimWhich::sim1, 14, kNet1, 0.4);
    check_matrix(SimWhich::sim1, 14, kNet1, 0.7);
    check_matrix(SimWhich::sim2, 13, kNet2, 0.2);
    check_matrix(SimWhich::sim2, 13, kNet2, 0.5);
}

TEST_CASE("default coefficients and overrides") {
    SimSpec spec;
    spec.which = SimWhich::sim1;
    CHECK(resolved_coefficient(spec) == 0.4);
    spec.which = SimWhich::sim2;
    CHECK(resolved_coefficient(spec) == 0.2);
    spec.coefficient = 0.35;
    CHECK(resolved_coefficient(spec) == 0.35);
}

TEST_CASE("spectral radius on known matrices and stability limits") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 0.5;
    d(1, 1) = -0.8;
    CHECK(spectral_radius(d) == doctest::Approx(0.8).epsilon(1e-12));

    Eigen::MatrixXd rot(2, 2);
    rot << 0.0, 1.0, -1.0, 0.0;  // eigenvalues +/- i
    CHECK(spectral_radius(rot) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(spectral_radius(sim_coefficient_matrix(SimWhich::sim1, 0.4)) < 1.0);
    CHECK(spectral_radius(sim_coefficient_matrix(SimWhich::sim2, 0.2)) < 1.0);
    CHECK(spectral_radius(sim_coefficient_matrix(SimWhich::sim1, 1.2)) >= 1.0);
    CHECK(spectral_radius(sim_coefficient_matrix(SimWhich::sim2, 1.2)) >= 1.0);

    SimSpec spec;
    spec.which = SimWhich::sim1;
    spec.coefficient = 1.2;
    try {
        generate(spec);
        FAIL("expected ValidationError for an unstable process");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("unstable") != std::string::npos);
    }
    spec.coefficient.reset();
    spec.length = 2;
    CHECK_THROWS_AS(generate(spec), ValidationError);
}

TEST_CASE("ground-truth set edges") {
    const SimTruth t1 = sim_truth(SimWhich::sim1);
    REQUIRE(t1.labels == std::vector<std::string>{"I", "II", "III"});
    const std::vector<std::vector<bool>> want1{
        {true, true, false}, {false, true, true}, {false, true, false}};
    CHECK(t1.cells == want1);

    const SimTruth t2 = sim_truth(SimWhich::sim2);
    REQUIRE(t2.labels == std::vector<std::string>{"I", "II", "III"});
    const std::vector<std::vector<bool>> want2{
        {true, true, false}, {false, true, false}, {true, true, true}};
    CHECK(t2.cells == want2);
}

TEST_CASE("generated panels have the documented shape and are reproducible") {
    SimSpec spec;
    spec.which = SimWhich::sim1;
    spec.length = 120;
    spec.seed = 7;
    const SimData d1 = generate(spec);
    CHECK(d1.panel.time_points() == 120);
    CHECK(d1.panel.series_count() == 14);
    CHECK(d1.panel.series_names.front() == "Z1");
    CHECK(d1.panel.series_names.back() == "Z14");
    CHECK(d1.partition.labels() == std::vector<std::string>{"I", "II", "III"});
    CHECK(d1.partition.members("I").size() == 5);
    CHECK(d1.partition.members("II").size() == 5);
    CHECK(d1.partition.members("III").size() == 4);
    CHECK(d1.partition.members("I").front() == "Z1");
    CHECK(d1.truth.cells == sim_truth(SimWhich::sim1).cells);

    const SimData d2 = generate(spec);
    CHECK((d1.panel.values - d2.panel.values).cwiseAbs().maxCoeff() == 0.0);

    spec.seed = 8;
    const SimData d3 = generate(spec);
    CHECK((d1.panel.values - d3.panel.values).cwiseAbs().maxCoeff() > 0.0);

    spec.which = SimWhich::sim2;
    const SimData w = generate(spec);
    CHECK(w.panel.series_count() == 13);
    CHECK(w.panel.series_names.front() == "W1");
    CHECK(w.panel.series_names.back() == "W13");
    CHECK(w.partition.members("III").size() == 3);

    // The values are bounded in a stable stationary regime.
    CHECK(d1.panel.values.cwiseAbs().maxCoeff() < 50.0);
}

TEST_CASE("a zero coefficient produces serially unlinked series") {
    SimSpec spec;
    spec.which = SimWhich::sim1;
    spec.coefficient = 0.0;
    spec.length = 2000;
    spec.seed = 99;
    const SimData d = generate(spec);
    const LaggedDesign design = lag_align(d.panel);
    auto corr = [&](Eigen::Index a, Eigen::Index b) {
        const Eigen::VectorXd x = design.present.col(a);
        const Eigen::VectorXd y = design.lagged.col(b);
        const double sxy = sample_cov(x, y)(0, 0);
        const double sxx = sample_cov(x, x)(0, 0);
        const double syy = sample_cov(y, y)(0, 0);
        return sxy / std::sqrt(sxx * syy);
    };
    CHECK(std::abs(corr(0, 0)) < 0.1);
    CHECK(std::abs(corr(1, 0)) < 0.1);
    CHECK(std::abs(corr(8, 13)) < 0.1);
    CHECK(std::abs(corr(10, 7)) < 0.1);
}

TEST_CASE("the dominant cause-side loading matches the wiring") {
    // In network 2 every set-II equation is driven by lagged W3, so the
    // leading cause-side weight for the I -> II edge should sit on W3.
    int hits = 0;
    const int reps = 100;
    for (int rep = 0; rep < reps; ++rep) {
        SimSpec spec;
        spec.which = SimWhich::sim2;
        spec.length = 300;
        spec.seed = derive_seed(404, static_cast<std::uint64_t>(rep));
        const SimData d = generate(spec);
        const LaggedDesign design = lag_align(d.panel);
        const auto blocks = assemble_blocks(design, d.partition, "II", "I");
        const PccaResult res = solve_pcca(conditional_cov(blocks));
        const LoadingsReport rep_loads =
            canonical_loadings(res, d.partition.members("II"), d.partition.members("I"));
        if (!rep_loads.cause_side.empty() && rep_loads.cause_side.front().series == "W3") ++hits;
    }
    CHECK(hits >= 80);
}

TEST_CASE("method names round-trip") {
    CHECK(method_name(Method::pcca) == "pcca");
    CHECK(method_name(Method::wald) == "wald");
    CHECK(parse_method("pcca") == Method::pcca);
    CHECK(parse_method("wald") == Method::wald);
    CHECK_THROWS_AS(parse_method("ols"), ValidationError);
}

TEST_CASE("Monte Carlo counts are worker-invariant and methods share panels") {
    SimSpec spec;
    spec.which = SimWhich::sim2;
    spec.length = 100;
    spec.seed = 515;
    BootstrapConfig bs;
    bs.replicates = 50;
    bs.seed = 616;
    const std::vector<Method> methods{Method::pcca, Method::wald};

    const MonteCarloResult serial = run_monte_carlo(spec, methods, 12, bs, 1);
    const MonteCarloResult threaded = run_monte_carlo(spec, methods, 12, bs, 2);

    REQUIRE(serial.detections.count(Method::pcca) == 1);
    REQUIRE(serial.detections.count(Method::wald) == 1);
    CHECK(serial.requested_runs == 12);
    CHECK(serial.failed_runs == 0);
    CHECK(serial.truth.cells == sim_truth(SimWhich::sim2).cells);

    for (const Method m : methods) {
        const DetectionMatrix& a = serial.detections.at(m);
        const DetectionMatrix& b = threaded.detections.at(m);
        CHECK(a.runs == 12);
        CHECK(b.runs == 12);
        REQUIRE(a.labels == b.labels);
        for (std::size_t f = 0; f < a.labels.size(); ++f) {
            for (std::size_t t = 0; t < a.labels.size(); ++t) {
                CHECK(a.counts[f][t] == b.counts[f][t]);
                CHECK(a.counts[f][t] >= 0);
                CHECK(a.counts[f][t] <= 12);
            }
        }
    }
}

TEST_CASE("matrix CSV writers use the shared label layout") {
    DetectionMatrix dm;
    dm.method = Method::pcca;
    dm.labels = {"I", "II"};
    dm.counts = {{12, 3}, {0, 9}};
    dm.runs = 12;

    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "gcsets_sim_csv_test";
    std::filesystem::create_directories(dir);
    const std::string counts = (dir / "counts.csv").string();
    const std::string rates = (dir / "rates.csv").string();
    const std::string truth = (dir / "truth.csv").string();

    write_counts_csv(dm, counts);
    CHECK(slurp(counts) == "from/to,I,II\nI,12,3\nII,0,9\n");

    write_rates_csv(dm, rates);
    CHECK(slurp(rates) == "from/to,I,II\nI,1.000000,0.250000\nII,0.000000,0.750000\n");

    SimTruth st;
    st.labels = {"I", "II"};
    st.cells = {{true, false}, {false, true}};
    write_truth_csv(st, truth);
    CHECK(slurp(truth) == "from/to,I,II\nI,1,0\nII,0,1\n");

    std::filesystem::remove_all(dir);
}

TEST_CASE("calibration report verdicts") {
    const int runs = 10000;
    const double ref2[3][3] = {{0.7154, 1.0000, 0.0505},
                               {0.0466, 1.0000, 0.0463},
                               {0.1490, 1.0000, 0.6263}};

    MonteCarloResult result;
    result.truth = sim_truth(SimWhich::sim2);
    result.requested_runs = runs;
    DetectionMatrix dm;
    dm.method = Method::pcca;
    dm.labels = result.truth.labels;
    dm.runs = runs;
    dm.counts.assign(3, std::vector<int>(3, 0));
    for (int f = 0; f < 3; ++f)
        for (int t = 0; t < 3; ++t)
            dm.counts[static_cast<std::size_t>(f)][static_cast<std::size_t>(t)] =
                static_cast<int>(std::lround(ref2[f][t] * runs));
    result.detections[Method::pcca] = dm;

    SimSpec spec;
    spec.which = SimWhich::sim2;

    SUBCASE("rates at the reference pass every cell") {
        const std::string report = calibration_report(result, spec);
        CHECK(report.find("network-2 pcca I->I rate=0.715400") != std::string::npos);
        CHECK(report.find("reference 0.715400, window [0.645400,0.785400] PASS") != std::string::npos);
        CHECK(report.find("require >= 0.990000 PASS") != std::string::npos);
        CHECK(report.find("null cell, window [0.020000,0.090000] PASS") != std::string::npos);
        CHECK(report.find("FAIL") == std::string::npos);
        CHECK(report.find("calibration: PASS") != std::string::npos);
    }

    SUBCASE("an inflated null cell flips the verdict") {
        result.detections[Method::pcca].counts[1][0] = 1500;  // II -> I at 15%
        const std::string report = calibration_report(result, spec);
        CHECK(report.find("null cell, window [0.020000,0.090000] FAIL") != std::string::npos);
        CHECK(report.find("calibration: FAIL") != std::string::npos);
    }

    SUBCASE("true edges without a reference are listed without a verdict") {
        MonteCarloResult r1;
        r1.truth = sim_truth(SimWhich::sim1);
        DetectionMatrix wd;
        wd.method = Method::wald;
        wd.labels = r1.truth.labels;
        wd.runs = 100;
        wd.counts.assign(3, std::vector<int>(3, 5));
        r1.detections[Method::wald] = wd;
        SimSpec s1;
        s1.which = SimWhich::sim1;
        const std::string report = calibration_report(r1, s1);
        CHECK(report.find("network-1 wald") != std::string::npos);
        CHECK(report.find("no published reference") != std::string::npos);
        // Null cells still get a verdict, and 5% sits inside the window.
        CHECK(report.find("calibration: PASS") != std::string::npos);
    }

    SUBCASE("no cells at all means no verdict") {
        MonteCarloResult empty;
        empty.truth = sim_truth(SimWhich::sim2);
        const std::string report = calibration_report(empty, spec);
        CHECK(report.find("calibration: NO REFERENCE") != std::string::npos);
    }
}
