#include "gcsets/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "gcsets/errors.hpp"
#include "gcsets/graph_export.hpp"
#include "gcsets/lagcov.hpp"
#include "gcsets/mathstats.hpp"
#include "gcsets/pcca.hpp"
#include "gcsets/var.hpp"

namespace gcsets {

namespace {

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path.string());
    out << content;
    if (!out) throw ValidationError("write failed: " + path.string());
}

std::string x_stream_name(BootstrapConfig::XStream s) {
    switch (s) {
        case BootstrapConfig::XStream::with_effect: return "effect";
        case BootstrapConfig::XStream::with_cause: return "cause";
        case BootstrapConfig::XStream::independent: return "independent";
    }
    return "effect";
}

void check_common(const RunConfig& cfg) {
    if (cfg.bootstraps < 1) throw ValidationError("--bootstraps must be at least 1");
    if (cfg.block_length < 0) throw ValidationError("--block-length must be positive or 'auto'");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ValidationError("--alpha must be in (0,1)");
    if (cfg.workers < 1) throw ValidationError("--workers must be at least 1");
}

BootstrapConfig bootstrap_config(const RunConfig& cfg) {
    BootstrapConfig bc;
    bc.replicates = cfg.bootstraps;
    bc.block_length = cfg.block_length;
    bc.alpha = cfg.alpha;
    bc.seed = cfg.seed;
    bc.x_stream = cfg.x_stream;
    bc.include_unassigned = cfg.include_unassigned_in_x;
    return bc;
}

std::string fixed(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

int report_and_code(const std::exception& e, int code) {
    std::cerr << "error: " << e.what() << "\n";
    return code;
}

}  // namespace

int cmd_analyze(const RunConfig& cfg) {
    try {
        check_common(cfg);
        if (cfg.panel_path.empty()) throw ValidationError("--panel is required");
        if (cfg.partition_path.empty()) throw ValidationError("--partition is required");

        const TimeSeriesPanel panel = load_panel(cfg.panel_path);
        const SetPartition partition = load_partition(cfg.partition_path);
        partition.validate_against(panel);

        const BootstrapConfig bc = bootstrap_config(cfg);
        const auto& labels = partition.labels();

        std::vector<GcTestResult> results;
        for (std::size_t from = 0; from < labels.size(); ++from) {
            for (std::size_t to = 0; to < labels.size(); ++to) {
                if (cfg.skip_self_loops && from == to) continue;
                BootstrapConfig edge_cfg = bc;
                edge_cfg.seed = derive_seed(cfg.seed, from * labels.size() + to);
                edge_cfg.workers = cfg.workers;
                results.push_back(gc_test(panel, partition, labels[to], labels[from], edge_cfg));
                const auto& r = results.back();
                std::cout << labels[from] << " -> " << labels[to] << ": rho=" << fixed(r.rho_hat, 4)
                          << " p=" << fixed(r.p_value, 4) << (r.significant ? " *" : "") << "\n";
            }
        }

        const SetGraph graph = build_graph(results, partition);
        const int l_used = results.empty() ? 0 : results.front().l_used;

        std::ostringstream summary;
        summary << "set-level Granger causality analysis\n";
        summary << "panel: " << cfg.panel_path << " (T=" << panel.time_points()
                << ", k=" << panel.series_count() << ")\n";
        summary << "partition: " << cfg.partition_path << " (" << labels.size() << " sets)\n";
        summary << "bootstraps=" << bc.replicates << " block_length=" << l_used
                << " alpha=" << fixed(bc.alpha, 3) << " seed=" << cfg.seed << "\n\n";
        summary << "from\tto\trho\tp\ttier\n";
        for (const auto& e : graph.edges)
            summary << e.from << "\t" << e.to << "\t" << fixed(e.rho, 4) << "\t"
                    << fixed(e.p_value, 4) << "\t" << tier_name(e.tier) << "\n";

        const LaggedDesign design = lag_align(panel);
        for (const auto& e : graph.edges) {
            if (e.tier == EdgeTier::none) continue;
            const auto blocks = assemble_blocks(design, partition, e.to, e.from,
                                                cfg.include_unassigned_in_x);
            const PccaResult full = solve_pcca(conditional_cov(blocks));
            const LoadingsReport loadings =
                canonical_loadings(full, partition.members(e.to), partition.members(e.from));
            summary << "\nedge " << e.from << " -> " << e.to << " (p=" << fixed(e.p_value, 4)
                    << ", " << tier_name(e.tier) << "):\n"
                    << format_loadings(loadings);
        }

        nlohmann::ordered_json manifest;
        manifest["version"] = kVersion;
        manifest["command"] = "analyze";
        manifest["panel"] = cfg.panel_path;
        manifest["partition"] = cfg.partition_path;
        manifest["bootstraps"] = bc.replicates;
        manifest["block_length"] = cfg.block_length == 0 ? "auto" : std::to_string(cfg.block_length);
        manifest["resolved_block_length"] = l_used;
        manifest["alpha"] = bc.alpha;
        manifest["seed"] = cfg.seed;
        manifest["workers"] = cfg.workers;
        manifest["include_unassigned_in_x"] = cfg.include_unassigned_in_x;
        manifest["skip_self_loops"] = cfg.skip_self_loops;
        manifest["x_stream"] = x_stream_name(cfg.x_stream);
        manifest["tests"] = static_cast<int>(results.size());

        const std::filesystem::path out(cfg.out_dir);
        std::filesystem::create_directories(out);
        write_text(out / "graph.dot", to_dot(graph));
        write_text(out / "results.json", to_json(graph, bc, l_used));
        write_text(out / "summary.txt", summary.str());
        write_text(out / "manifest.json", manifest.dump(2) + "\n");

        std::cout << "wrote " << (out / "graph.dot").string() << ", results.json, summary.txt,"
                  << " manifest.json (" << results.size() << " tests)\n";
        return 0;
    } catch (const ValidationError& e) {
        return report_and_code(e, 2);
    } catch (const NumericError& e) {
        return report_and_code(e, 3);
    }
}

int cmd_simulate(const RunConfig& cfg) {
    try {
        check_common(cfg);
        if (cfg.runs < 1) throw ValidationError("--runs must be at least 1");

        SimSpec spec;
        spec.which = cfg.which;
        spec.length = cfg.length;
        spec.coefficient = cfg.coefficient;
        spec.burn_in = cfg.burn_in;
        spec.seed = cfg.seed;

        const BootstrapConfig bc = bootstrap_config(cfg);
        const MonteCarloResult result = run_monte_carlo(spec, cfg.methods, cfg.runs, bc, cfg.workers);
        const std::string report = calibration_report(result, spec);

        nlohmann::ordered_json manifest;
        manifest["version"] = kVersion;
        manifest["command"] = "simulate";
        manifest["which"] = cfg.which == SimWhich::sim1 ? "sim1" : "sim2";
        manifest["runs"] = cfg.runs;
        manifest["length"] = cfg.length;
        manifest["coefficient"] = resolved_coefficient(spec);
        manifest["burn_in"] = cfg.burn_in;
        std::vector<std::string> method_names;
        for (const Method m : cfg.methods) method_names.push_back(method_name(m));
        manifest["methods"] = method_names;
        manifest["bootstraps"] = bc.replicates;
        manifest["block_length"] = cfg.block_length == 0 ? "auto" : std::to_string(cfg.block_length);
        manifest["alpha"] = bc.alpha;
        manifest["seed"] = cfg.seed;
        manifest["workers"] = cfg.workers;
        manifest["x_stream"] = x_stream_name(cfg.x_stream);
        manifest["failed_runs"] = result.failed_runs;

        const std::filesystem::path out(cfg.out_dir);
        std::filesystem::create_directories(out);
        for (const auto& [method, dm] : result.detections) {
            write_counts_csv(dm, (out / ("counts_" + method_name(method) + ".csv")).string());
            write_rates_csv(dm, (out / ("rates_" + method_name(method) + ".csv")).string());
        }
        write_truth_csv(result.truth, (out / "truth.csv").string());
        write_text(out / "calibration.txt", report);
        write_text(out / "manifest.json", manifest.dump(2) + "\n");

        std::cout << report;
        std::cout << "wrote results to " << out.string() << "\n";
        return 0;
    } catch (const ValidationError& e) {
        return report_and_code(e, 2);
    } catch (const NumericError& e) {
        return report_and_code(e, 3);
    }
}

namespace {

// Residuals of each column of y regressed on [1, x]; used by the self-checks
// as an independent route to partial correlations.
Eigen::MatrixXd ols_residuals(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd d(x.rows(), x.cols() + 1);
    d.col(0).setOnes();
    d.rightCols(x.cols()) = x;
    return y - d * d.colPivHouseholderQr().solve(y);
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd ac = a.array() - a.mean();
    const Eigen::VectorXd bc = b.array() - b.mean();
    return ac.dot(bc) / std::sqrt(ac.squaredNorm() * bc.squaredNorm());
}

bool selftest_check(const std::string& name, bool pass, std::ostream& out) {
    out << "selftest: " << name << " ... " << (pass ? "ok" : "FAILED") << "\n";
    return pass;
}

}  // namespace

int cmd_selftest(const RunConfig& cfg) {
    bool all = true;
    const std::uint64_t seed = cfg.seed;

    // Singleton partial canonical correlation equals the partial correlation
    // computed by explicit residualization.
    {
        Rng rng(derive_seed(seed, 1));
        const int n = 60;
        Eigen::MatrixXd x(n, 2), yi(n, 1), lj(n, 1);
        for (int r = 0; r < n; ++r) {
            x(r, 0) = rng.normal();
            x(r, 1) = rng.normal();
            lj(r, 0) = rng.normal() + 0.5 * x(r, 0);
            yi(r, 0) = rng.normal() + 0.7 * lj(r, 0) - 0.3 * x(r, 1);
        }
        const auto cond = conditional_cov(blocks_from_matrices(yi, lj, x), 0.0);
        const double rho = solve_pcca(cond).rho;
        const double oracle = std::abs(pearson(ols_residuals(yi, x).col(0), ols_residuals(lj, x).col(0)));
        all &= selftest_check("singleton partial correlation", std::abs(rho - oracle) < 1e-10, std::cout);
    }

    // The two whitened eigenproblems agree.
    {
        bool pass = true;
        for (int inst = 0; inst < 50 && pass; ++inst) {
            Rng rng(derive_seed(seed, 2, static_cast<std::uint64_t>(inst)));
            const int n = 40;
            Eigen::MatrixXd yi(n, 3), lj(n, 2), x(n, 2);
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < 2; ++c) x(r, c) = rng.normal();
                for (int c = 0; c < 2; ++c) lj(r, c) = rng.normal() + 0.4 * x(r, 0);
                for (int c = 0; c < 3; ++c) yi(r, c) = rng.normal() + 0.5 * lj(r, c % 2);
            }
            const auto cond = conditional_cov(blocks_from_matrices(yi, lj, x));
            const auto [sa, sb] = pcca_spectra(cond);
            pass = ((sa - sb).cwiseAbs().maxCoeff() < 1e-8);
        }
        all &= selftest_check("two-sided spectrum agreement", pass, std::cout);
    }

    // rho is invariant under invertible linear maps of each side.
    {
        Rng rng(derive_seed(seed, 3));
        const int n = 50;
        Eigen::MatrixXd yi(n, 2), lj(n, 2), x(n, 1);
        for (int r = 0; r < n; ++r) {
            x(r, 0) = rng.normal();
            for (int c = 0; c < 2; ++c) lj(r, c) = rng.normal() + 0.3 * x(r, 0);
            for (int c = 0; c < 2; ++c) yi(r, c) = rng.normal() + 0.6 * lj(r, c);
        }
        Eigen::Matrix2d t;
        t << 2.0, 0.7, -0.4, 1.1;
        const double rho_base = solve_pcca(conditional_cov(blocks_from_matrices(yi, lj, x), 0.0)).rho;
        const double rho_mapped =
            solve_pcca(conditional_cov(blocks_from_matrices(yi * t.transpose(), lj, x), 0.0)).rho;
        all &= selftest_check("invariance under invertible maps", std::abs(rho_base - rho_mapped) < 1e-8,
                              std::cout);
    }

    // Bootstrap test is deterministic and its p-value is in range.
    {
        Rng rng(derive_seed(seed, 4));
        Eigen::MatrixXd values(40, 2);
        for (int r = 0; r < 40; ++r)
            for (int c = 0; c < 2; ++c) values(r, c) = rng.normal();
        const TimeSeriesPanel panel = make_panel({"a", "b"}, values);
        const SetPartition partition =
            SetPartition::from_assignments({{"a", "A"}, {"b", "B"}});
        BootstrapConfig bc;
        bc.replicates = 60;
        bc.seed = derive_seed(seed, 5);
        const GcTestResult r1 = gc_test(panel, partition, "A", "B", bc);
        const GcTestResult r2 = gc_test(panel, partition, "A", "B", bc);
        const bool same = r1.p_value == r2.p_value && r1.rho_hat == r2.rho_hat &&
                          r1.null_rhos == r2.null_rhos;
        const bool bounded = r1.p_value >= 1.0 / (r1.b_used + 1) && r1.p_value <= 1.0;
        all &= selftest_check("bootstrap determinism and p-value range", same && bounded, std::cout);
    }

    // Noiseless autoregression is recovered exactly; the one-coefficient Wald
    // test matches the squared-z identity.
    {
        Eigen::MatrixXd values(30, 1);
        values(0, 0) = 1.0;
        for (int r = 1; r < 30; ++r) values(r, 0) = 0.4 * values(r - 1, 0);
        const VarFit noiseless = fit_var1(lag_align(make_panel({"z"}, values)));
        const bool recovered = std::abs(noiseless.coef(0, 0) - 0.4) < 1e-10;

        Rng rng(derive_seed(seed, 6));
        Eigen::MatrixXd noisy(80, 2);
        for (int r = 0; r < 80; ++r)
            for (int c = 0; c < 2; ++c) noisy(r, c) = rng.normal();
        const VarFit fit = fit_var1(lag_align(make_panel({"u", "v"}, noisy)));
        const SetPartition partition =
            SetPartition::from_assignments({{"u", "U"}, {"v", "V"}});
        const WaldResult w = wald_block_test(fit, partition, "U", "V");
        const double z = fit.coef(0, 1) / std::sqrt(fit.resid_cov(0, 0) * fit.gram_inv(2, 2));
        const double p_normal = 2.0 * normal_sf(std::abs(z));
        const bool identity = std::abs(w.p_value - p_normal) < 1e-10;
        all &= selftest_check("autoregression recovery and Wald identity", recovered && identity,
                              std::cout);
    }

    std::cout << "selftest: " << (all ? "PASS" : "FAIL") << "\n";
    return all ? 0 : 3;
}

}  // namespace gcsets
