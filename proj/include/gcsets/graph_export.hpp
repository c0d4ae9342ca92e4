#pragma once

#include <string>
#include <vector>

#include "gcsets/bootstrap.hpp"
#include "gcsets/panel.hpp"

namespace gcsets {

// Evidence tiers follow the usual two-threshold convention: strong edges at
// p < 0.05, weak edges at p < 0.10, everything else none.
enum class EdgeTier { strong, weak, none };

const char* tier_name(EdgeTier tier);
EdgeTier tier_for(double p_value);

struct SetGraphNode {
    std::string label;
    std::vector<std::string> members;
};

struct SetGraphEdge {
    std::string from;  // cause set
    std::string to;    // effect set
    double rho = 0.0;
    double p_value = 1.0;
    EdgeTier tier = EdgeTier::none;
};

// Nodes sorted by label; edges sorted by (from, to).  Every tested pair keeps
// its edge record, including none-tier results.
struct SetGraph {
    std::vector<SetGraphNode> nodes;
    std::vector<SetGraphEdge> edges;
};

// Rejects duplicate (from, to) pairs among the results.
SetGraph build_graph(const std::vector<GcTestResult>& results, const SetPartition& partition);

// Graphviz output: solid edges for the strong tier, dashed for the weak tier;
// none-tier edges are omitted from the drawing (they stay in the JSON).
std::string to_dot(const SetGraph& graph);

// JSON record of every node, every tested edge and the test configuration.
std::string to_json(const SetGraph& graph, const BootstrapConfig& cfg, int resolved_block_length);

}  // namespace gcsets
