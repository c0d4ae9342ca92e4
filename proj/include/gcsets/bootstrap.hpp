#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcsets/panel.hpp"
#include "gcsets/rng.hpp"

namespace gcsets {

// Overlapping-block bootstrap settings.  block_length 0 resolves to
// ceil(N^(1/3)) where N is the number of lag-aligned rows.
struct BootstrapConfig {
    int replicates = 1000;
    int block_length = 0;
    double alpha = 0.05;
    std::uint64_t seed = 0;

    // Which resampling stream the conditioning columns follow.  The effect
    // stream is the default: the conditioning history travels with the
    // responses, and only the cause set's lagged columns are resampled
    // independently to break the tested relation.
    enum class XStream { with_effect, with_cause, independent };
    XStream x_stream = XStream::with_effect;

    bool include_unassigned = true;

    // Replicates whose statistic fails numerically are redrawn up to this
    // many extra times before counting as failed.
    int max_redraws = 3;

    int workers = 1;
};

// Start offsets of every contiguous window of the given length: 0 .. rows-l.
std::vector<int> make_blocks(int rows, int block_length);

int auto_block_length(int rows);

// Draws whole windows with replacement, lays them end to end and truncates to
// exactly `rows` row indices.
std::vector<int> draw_block_rows(int rows, int block_length, Rng& rng);

// Resamples a lag-aligned design for the pair (effect_set, cause_set) using
// two index streams drawn back to back from `rng`: the first governs the
// present columns (and whatever follows the effect stream), the second the
// cause set's lagged columns.  Requires at least 3 distinct windows
// (block_length <= rows - 2).
LaggedDesign resample_design(const LaggedDesign& design, const SetPartition& partition,
                             const std::string& effect_set, const std::string& cause_set,
                             int block_length, Rng& rng,
                             BootstrapConfig::XStream x_stream = BootstrapConfig::XStream::with_effect);

struct GcTestResult {
    std::string effect_set;
    std::string cause_set;
    double rho_hat = 0.0;
    std::vector<double> null_rhos;  // successful replicates, in replicate order
    double p_value = 1.0;
    int l_used = 0;
    int b_used = 0;
    bool significant = false;
    int failed_replicates = 0;
};

// Tests whether cause_set Granger-causes effect_set: the observed first
// partial canonical correlation is compared against its bootstrap null
// distribution, with p = (1 + #{rho* >= rho_hat}) / (B_used + 1).
// Replicate streams are derived from (seed, replicate, attempt), so the
// result is identical for any worker count.
GcTestResult gc_test(const TimeSeriesPanel& panel, const SetPartition& partition,
                     const std::string& effect_set, const std::string& cause_set,
                     const BootstrapConfig& cfg);

}  // namespace gcsets
