#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gcsets/bootstrap.hpp"
#include "gcsets/simulate.hpp"

namespace gcsets {

inline constexpr const char* kVersion = "0.1.0";

// Fully resolved command configuration.  Exit codes: 0 success, 2 input
// validation failure, 3 numerical failure.
struct RunConfig {
    // analyze
    std::string panel_path;
    std::string partition_path;
    bool include_unassigned_in_x = true;
    bool skip_self_loops = false;

    // shared test settings
    int bootstraps = 1000;
    int block_length = 0;  // 0 = auto
    double alpha = 0.05;
    std::uint64_t seed = 0;
    BootstrapConfig::XStream x_stream = BootstrapConfig::XStream::with_effect;
    std::string out_dir = ".";
    int workers = 1;

    // simulate
    SimWhich which = SimWhich::sim1;
    int runs = 500;
    int length = 100;
    std::optional<double> coefficient;
    int burn_in = 100;
    std::vector<Method> methods = {Method::pcca};
};

// Tests every ordered pair of sets in the panel and writes graph.dot,
// results.json, summary.txt and manifest.json into out_dir.  No files are
// written unless every test succeeds.
int cmd_analyze(const RunConfig& cfg);

// Runs the Monte Carlo power study and writes counts_<method>.csv,
// rates_<method>.csv, truth.csv, calibration.txt and manifest.json.
int cmd_simulate(const RunConfig& cfg);

// Quick numerical self-checks of the installed library.
int cmd_selftest(const RunConfig& cfg);

}  // namespace gcsets
