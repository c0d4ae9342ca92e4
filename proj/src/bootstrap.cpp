#include "gcsets/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>
#include <thread>

#include "gcsets/errors.hpp"
#include "gcsets/lagcov.hpp"
#include "gcsets/pcca.hpp"

namespace gcsets {

namespace {

void gather_rows(const Eigen::MatrixXd& src, const std::vector<int>& rows, Eigen::MatrixXd& dst) {
    dst.resize(static_cast<Eigen::Index>(rows.size()), src.cols());
    for (std::size_t r = 0; r < rows.size(); ++r)
        dst.row(static_cast<Eigen::Index>(r)) = src.row(rows[r]);
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& src, const std::vector<Eigen::Index>& cols) {
    Eigen::MatrixXd out(src.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = src.col(cols[c]);
    return out;
}

std::vector<Eigen::Index> columns_of(const LaggedDesign& design, const std::vector<std::string>& names) {
    std::vector<Eigen::Index> cols;
    cols.reserve(names.size());
    for (const auto& n : names) cols.push_back(design.column_of(n));
    return cols;
}

}  // namespace

std::vector<int> make_blocks(int rows, int block_length) {
    if (block_length < 1) throw ValidationError("block length must be at least 1");
    if (block_length > rows)
        throw ValidationError("block length " + std::to_string(block_length) +
                              " exceeds row count " + std::to_string(rows));
    std::vector<int> starts(static_cast<std::size_t>(rows - block_length + 1));
    for (std::size_t w = 0; w < starts.size(); ++w) starts[w] = static_cast<int>(w);
    return starts;
}

int auto_block_length(int rows) {
    if (rows < 1) throw ValidationError("auto block length needs at least 1 row");
    // Smallest l with l^3 >= rows; the cbrt seed is adjusted because it can
    // land on either side of an exact cube.
    int l = std::max(1, static_cast<int>(std::ceil(std::cbrt(static_cast<double>(rows)))));
    while (l > 1 && static_cast<long long>(l - 1) * (l - 1) * (l - 1) >= rows) --l;
    while (static_cast<long long>(l) * l * l < rows) ++l;
    return l;
}

std::vector<int> draw_block_rows(int rows, int block_length, Rng& rng) {
    const int windows = rows - block_length + 1;
    if (windows < 3)
        throw ValidationError("block length " + std::to_string(block_length) + " leaves only " +
                              std::to_string(std::max(windows, 0)) +
                              " distinct windows over " + std::to_string(rows) +
                              " rows; resampling is degenerate");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(rows));
    while (static_cast<int>(out.size()) < rows) {
        const int start = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(windows)));
        for (int o = 0; o < block_length && static_cast<int>(out.size()) < rows; ++o)
            out.push_back(start + o);
    }
    return out;
}

LaggedDesign resample_design(const LaggedDesign& design, const SetPartition& partition,
                             const std::string& effect_set, const std::string& cause_set,
                             int block_length, Rng& rng, BootstrapConfig::XStream x_stream) {
    const int rows = static_cast<int>(design.rows());
    const std::vector<int> rows_effect = draw_block_rows(rows, block_length, rng);
    const std::vector<int> rows_cause = draw_block_rows(rows, block_length, rng);
    std::vector<int> rows_cond;
    switch (x_stream) {
        case BootstrapConfig::XStream::with_effect: rows_cond = rows_effect; break;
        case BootstrapConfig::XStream::with_cause: rows_cond = rows_cause; break;
        case BootstrapConfig::XStream::independent:
            rows_cond = draw_block_rows(rows, block_length, rng);
            break;
    }

    const auto& cause_members = partition.members(cause_set);
    (void)partition.members(effect_set);  // validates the label
    const std::set<std::string> cause_set_names(cause_members.begin(), cause_members.end());

    LaggedDesign out;
    out.series_names = design.series_names;
    out.present.resize(design.present.rows(), design.present.cols());
    out.lagged.resize(design.lagged.rows(), design.lagged.cols());
    for (Eigen::Index c = 0; c < design.present.cols(); ++c) {
        const bool is_cause = cause_set_names.count(design.series_names[static_cast<std::size_t>(c)]) > 0;
        const std::vector<int>& lag_rows = is_cause ? rows_cause : rows_cond;
        for (int r = 0; r < rows; ++r) {
            out.present(r, c) = design.present(rows_effect[static_cast<std::size_t>(r)], c);
            out.lagged(r, c) = design.lagged(lag_rows[static_cast<std::size_t>(r)], c);
        }
    }
    return out;
}

GcTestResult gc_test(const TimeSeriesPanel& panel, const SetPartition& partition,
                     const std::string& effect_set, const std::string& cause_set,
                     const BootstrapConfig& cfg) {
    if (cfg.replicates < 1) throw ValidationError("bootstrap replicate count must be at least 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ValidationError("alpha must be in (0,1)");
    if (cfg.workers < 1) throw ValidationError("worker count must be at least 1");
    if (cfg.max_redraws < 0) throw ValidationError("max_redraws must be non-negative");
    partition.validate_against(panel);

    const LaggedDesign design = lag_align(panel);
    const int rows = static_cast<int>(design.rows());
    const int l = cfg.block_length == 0 ? auto_block_length(rows) : cfg.block_length;
    if (l < 2 || 2 * l >= rows)
        throw ValidationError("block length " + std::to_string(l) +
                              " must satisfy 2 <= l < N/2 with N = " + std::to_string(rows) +
                              " aligned rows");

    const auto x_names = conditioning_names(design, partition, effect_set, cause_set,
                                            cfg.include_unassigned);
    const Eigen::MatrixXd yi = gather_columns(design.present, columns_of(design, partition.members(effect_set)));
    const Eigen::MatrixXd lj = gather_columns(design.lagged, columns_of(design, partition.members(cause_set)));
    const Eigen::MatrixXd lx = gather_columns(design.lagged, columns_of(design, x_names));

    GcTestResult result;
    result.effect_set = effect_set;
    result.cause_set = cause_set;
    result.l_used = l;

    try {
        const auto blocks = blocks_from_matrices(yi, lj, lx, x_names);
        result.rho_hat = solve_pcca(conditional_cov(blocks)).rho;
    } catch (const NumericError& e) {
        throw NumericError("gc_test " + cause_set + " -> " + effect_set + ": " + e.what());
    }

    const int b_total = cfg.replicates;
    std::vector<double> slots(static_cast<std::size_t>(b_total), 0.0);
    std::vector<char> ok(static_cast<std::size_t>(b_total), 0);

    auto run_range = [&](int begin, int end) {
        Eigen::MatrixXd yi_b, lj_b, lx_b;
        for (int b = begin; b < end; ++b) {
            for (int attempt = 0; attempt <= cfg.max_redraws; ++attempt) {
                Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(b),
                                    static_cast<std::uint64_t>(attempt)));
                const std::vector<int> rows_effect = draw_block_rows(rows, l, rng);
                const std::vector<int> rows_cause = draw_block_rows(rows, l, rng);
                const std::vector<int>* rows_cond = &rows_effect;
                std::vector<int> rows_third;
                if (cfg.x_stream == BootstrapConfig::XStream::with_cause) {
                    rows_cond = &rows_cause;
                } else if (cfg.x_stream == BootstrapConfig::XStream::independent) {
                    rows_third = draw_block_rows(rows, l, rng);
                    rows_cond = &rows_third;
                }
                gather_rows(yi, rows_effect, yi_b);
                gather_rows(lj, rows_cause, lj_b);
                gather_rows(lx, *rows_cond, lx_b);
                try {
                    const auto blocks = blocks_from_matrices(yi_b, lj_b, lx_b);
                    slots[static_cast<std::size_t>(b)] = solve_pcca(conditional_cov(blocks)).rho;
                    ok[static_cast<std::size_t>(b)] = 1;
                    break;
                } catch (const NumericError&) {
                    // degenerate draw; retry with a fresh attempt stream
                }
            }
        }
    };

    const int workers = std::min(cfg.workers, b_total);
    if (workers <= 1) {
        run_range(0, b_total);
    } else {
        std::vector<std::thread> threads;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            const int begin = static_cast<int>(static_cast<long long>(b_total) * w / workers);
            const int end = static_cast<int>(static_cast<long long>(b_total) * (w + 1) / workers);
            threads.emplace_back([&, begin, end, w] {
                try {
                    run_range(begin, end);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& t : threads) t.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    for (int b = 0; b < b_total; ++b) {
        if (ok[static_cast<std::size_t>(b)])
            result.null_rhos.push_back(slots[static_cast<std::size_t>(b)]);
    }
    result.b_used = static_cast<int>(result.null_rhos.size());
    result.failed_replicates = b_total - result.b_used;
    if (result.failed_replicates > 0.05 * b_total)
        throw NumericError("gc_test " + cause_set + " -> " + effect_set + ": " +
                           std::to_string(result.failed_replicates) + " of " +
                           std::to_string(b_total) + " bootstrap replicates failed");

    int count = 0;
    for (const double r : result.null_rhos)
        if (r >= result.rho_hat) ++count;
    result.p_value = static_cast<double>(1 + count) / static_cast<double>(result.b_used + 1);
    result.significant = result.p_value < cfg.alpha;
    return result;
}

}  // namespace gcsets
