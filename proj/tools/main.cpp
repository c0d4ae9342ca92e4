#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gcsets/cli.hpp"
#include "gcsets/errors.hpp"

namespace {

int parse_block_length(const std::string& raw) {
    if (raw == "auto") return 0;
    std::size_t used = 0;
    int value = 0;
    try {
        value = std::stoi(raw, &used);
    } catch (const std::exception&) {
        throw gcsets::ValidationError("--block-length must be a positive integer or 'auto'");
    }
    if (used != raw.size() || value < 1)
        throw gcsets::ValidationError("--block-length must be a positive integer or 'auto'");
    return value;
}

gcsets::BootstrapConfig::XStream parse_x_stream(const std::string& raw) {
    if (raw == "effect") return gcsets::BootstrapConfig::XStream::with_effect;
    if (raw == "cause") return gcsets::BootstrapConfig::XStream::with_cause;
    if (raw == "independent") return gcsets::BootstrapConfig::XStream::independent;
    throw gcsets::ValidationError("--x-stream must be effect, cause or independent");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"set-level Granger causality between groups of time series"};
    app.require_subcommand(1);

    gcsets::RunConfig cfg;
    std::string block_length = "auto";
    std::string x_stream = "effect";
    std::string which = "sim1";
    std::vector<std::string> methods = {"pcca"};
    double coefficient = 0.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--bootstraps", cfg.bootstraps, "bootstrap replicates")->capture_default_str();
        sub->add_option("--block-length", block_length, "bootstrap block length or 'auto'")
            ->capture_default_str();
        sub->add_option("--alpha", cfg.alpha, "significance level")->capture_default_str();
        sub->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
        sub->add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
        sub->add_option("--workers", cfg.workers, "worker threads")->capture_default_str();
        sub->add_option("--x-stream", x_stream,
                        "stream the conditioning columns follow: effect, cause or independent")
            ->capture_default_str();
    };

    CLI::App* analyze = app.add_subcommand("analyze", "test every ordered pair of sets in a panel");
    analyze->add_option("--panel", cfg.panel_path, "panel CSV (header row of series names)")->required();
    analyze->add_option("--partition", cfg.partition_path, "CSV of series_name,set_label lines")
        ->required();
    add_common(analyze);
    analyze->add_option("--include-unassigned-in-x", cfg.include_unassigned_in_x,
                        "condition on series outside every set (default true)")
        ->capture_default_str();
    analyze->add_flag("--skip-self-loops", cfg.skip_self_loops, "skip within-set tests");

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo power study on a benchmark network");
    simulate->add_option("--which", which, "benchmark network: sim1 or sim2")->capture_default_str();
    simulate->add_option("--runs", cfg.runs, "Monte Carlo replicates")->capture_default_str();
    simulate->add_option("--methods", methods, "comma-separated: pcca,wald")
        ->delimiter(',')
        ->capture_default_str();
    simulate->add_option("--length", cfg.length, "time points per simulated panel")
        ->capture_default_str();
    auto* coeff_opt = simulate->add_option("--coefficient", coefficient,
                                           "lag coefficient (default 0.4 for sim1, 0.2 for sim2)");
    simulate->add_option("--burn-in", cfg.burn_in, "discarded warm-up steps")->capture_default_str();
    add_common(simulate);

    CLI::App* selftest = app.add_subcommand("selftest", "quick numerical self-checks");
    selftest->add_option("--seed", cfg.seed, "master seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        cfg.block_length = parse_block_length(block_length);
        cfg.x_stream = parse_x_stream(x_stream);
        if (which == "sim1") {
            cfg.which = gcsets::SimWhich::sim1;
        } else if (which == "sim2") {
            cfg.which = gcsets::SimWhich::sim2;
        } else {
            throw gcsets::ValidationError("--which must be sim1 or sim2");
        }
        cfg.methods.clear();
        for (const auto& m : methods) cfg.methods.push_back(gcsets::parse_method(m));
        if (coeff_opt->count() > 0) cfg.coefficient = coefficient;
    } catch (const gcsets::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    if (analyze->parsed()) return gcsets::cmd_analyze(cfg);
    if (simulate->parsed()) return gcsets::cmd_simulate(cfg);
    return gcsets::cmd_selftest(cfg);
}
