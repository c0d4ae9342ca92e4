#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gcsets/bootstrap.hpp"
#include "gcsets/panel.hpp"

namespace gcsets {

// The two benchmark networks used in the power studies: network 1 has 14
// series in sets of (5,5,4) with coefficient 0.4; network 2 has 13 series in
// sets of (5,5,3) with coefficient 0.2.
enum class SimWhich { sim1, sim2 };

struct SimSpec {
    SimWhich which = SimWhich::sim1;
    int length = 100;
    std::optional<double> coefficient;  // default 0.4 (sim1) or 0.2 (sim2)
    int burn_in = 100;
    std::uint64_t seed = 0;
};

double resolved_coefficient(const SimSpec& spec);

// k x k lag-one coefficient matrix: entry (r,c) multiplies lagged series c in
// the equation for series r.
Eigen::MatrixXd sim_coefficient_matrix(SimWhich which, double coefficient);

double spectral_radius(const Eigen::MatrixXd& m);

// Ground-truth set-level edges: cells[from][to] is true when any coefficient
// runs from a series in `from` to a series in `to`.
struct SimTruth {
    std::vector<std::string> labels;
    std::vector<std::vector<bool>> cells;
};

SimTruth sim_truth(SimWhich which);

struct SimData {
    TimeSeriesPanel panel;
    SetPartition partition;
    SimTruth truth;
};

// Simulates the process from a zero start, discards burn_in steps, and keeps
// `length` rows.  Noise is standard normal, drawn series by series within
// each time step from the deterministic generator.  Rejects coefficient
// matrices with spectral radius >= 1.
SimData generate(const SimSpec& spec);

enum class Method { pcca, wald };

std::string method_name(Method m);
Method parse_method(const std::string& name);

// Detection counts over Monte Carlo runs for every ordered set pair.
struct DetectionMatrix {
    Method method = Method::pcca;
    std::vector<std::string> labels;
    std::vector<std::vector<int>> counts;  // [from][to]
    int runs = 0;

    double rate(std::size_t from, std::size_t to) const {
        return runs > 0 ? static_cast<double>(counts[from][to]) / runs : 0.0;
    }
};

struct MonteCarloResult {
    std::map<Method, DetectionMatrix> detections;
    SimTruth truth;
    int requested_runs = 0;
    int failed_runs = 0;
};

// Runs `runs` independent replicates.  Replicate r simulates a fresh panel
// from a seed derived from (spec.seed, r) and applies every requested method
// to all ordered set pairs; methods share panels, so comparisons are paired.
// Aborts when more than 1% of replicates fail irrecoverably.
MonteCarloResult run_monte_carlo(const SimSpec& spec, const std::vector<Method>& methods,
                                 int runs, const BootstrapConfig& bootstrap, int workers = 1);

void write_counts_csv(const DetectionMatrix& dm, const std::string& path);
void write_rates_csv(const DetectionMatrix& dm, const std::string& path);
void write_truth_csv(const SimTruth& truth, const std::string& path);

// Compares measured rates against the published reference rates for this
// network and reports a pass/fail line per cell.  Cells without a published
// reference are reported without a verdict.
std::string calibration_report(const MonteCarloResult& result, const SimSpec& spec);

}  // namespace gcsets
