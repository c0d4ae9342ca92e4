#include "gcsets/graph_export.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "json.hpp"

#include "gcsets/errors.hpp"

namespace gcsets {

const char* tier_name(EdgeTier tier) {
    switch (tier) {
        case EdgeTier::strong: return "strong";
        case EdgeTier::weak: return "weak";
        case EdgeTier::none: return "none";
    }
    return "none";
}

EdgeTier tier_for(double p_value) {
    if (p_value < 0.05) return EdgeTier::strong;
    if (p_value < 0.10) return EdgeTier::weak;
    return EdgeTier::none;
}

SetGraph build_graph(const std::vector<GcTestResult>& results, const SetPartition& partition) {
    SetGraph graph;
    for (const auto& label : partition.labels())
        graph.nodes.push_back({label, partition.members(label)});
    std::sort(graph.nodes.begin(), graph.nodes.end(),
              [](const SetGraphNode& a, const SetGraphNode& b) { return a.label < b.label; });

    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : results) {
        if (!partition.has_label(r.cause_set) || !partition.has_label(r.effect_set))
            throw ValidationError("build_graph: result references unknown set '" + r.cause_set +
                                  "' or '" + r.effect_set + "'");
        if (!seen.emplace(r.cause_set, r.effect_set).second)
            throw ValidationError("build_graph: duplicate edge " + r.cause_set + " -> " +
                                  r.effect_set);
        graph.edges.push_back({r.cause_set, r.effect_set, r.rho_hat, r.p_value, tier_for(r.p_value)});
    }
    std::sort(graph.edges.begin(), graph.edges.end(), [](const SetGraphEdge& a, const SetGraphEdge& b) {
        return std::tie(a.from, a.to) < std::tie(b.from, b.to);
    });
    return graph;
}

std::string to_dot(const SetGraph& graph) {
    std::ostringstream out;
    out << "digraph sets {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=ellipse];\n";
    for (const auto& node : graph.nodes) {
        out << "  \"" << node.label << "\" [label=\"" << node.label;
        if (!node.members.empty()) {
            out << "\\n";
            for (std::size_t m = 0; m < node.members.size(); ++m) {
                if (m) out << ", ";
                out << node.members[m];
            }
        }
        out << "\"];\n";
    }
    char buf[96];
    for (const auto& edge : graph.edges) {
        if (edge.tier == EdgeTier::none) continue;
        std::snprintf(buf, sizeof(buf), "rho=%.3f, p=%.3f", edge.rho, edge.p_value);
        out << "  \"" << edge.from << "\" -> \"" << edge.to << "\" [style="
            << (edge.tier == EdgeTier::strong ? "solid" : "dashed") << ", label=\"" << buf
            << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

std::string to_json(const SetGraph& graph, const BootstrapConfig& cfg, int resolved_block_length) {
    nlohmann::ordered_json doc;
    doc["nodes"] = nlohmann::ordered_json::array();
    for (const auto& node : graph.nodes) {
        nlohmann::ordered_json n;
        n["label"] = node.label;
        n["members"] = node.members;
        doc["nodes"].push_back(n);
    }
    doc["edges"] = nlohmann::ordered_json::array();
    for (const auto& edge : graph.edges) {
        nlohmann::ordered_json e;
        e["from"] = edge.from;
        e["to"] = edge.to;
        e["rho"] = edge.rho;
        e["p_value"] = edge.p_value;
        e["tier"] = tier_name(edge.tier);
        doc["edges"].push_back(e);
    }
    doc["config"] = {{"bootstraps", cfg.replicates},
                     {"block_length", resolved_block_length},
                     {"alpha", cfg.alpha},
                     {"seed", cfg.seed}};
    return doc.dump(2) + "\n";
}

}  // namespace gcsets
