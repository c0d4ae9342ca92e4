#include "gcsets/panel.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "gcsets/errors.hpp"

namespace gcsets {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

// Reads all lines, strips trailing '\r' so CRLF files work.
std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

double parse_cell(const std::string& raw, const std::string& path, std::size_t line_no,
                  std::size_t col_no) {
    const std::string cell = trim(raw);
    auto fail = [&](const std::string& why) {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": column " +
                              std::to_string(col_no) + " ('" + cell + "') " + why);
    };
    if (cell.empty()) fail("is empty");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || errno == ERANGE) fail("is not a number");
    if (!std::isfinite(v)) fail("is not finite");
    return v;
}

}  // namespace

Eigen::Index TimeSeriesPanel::column_of(const std::string& name) const {
    const auto it = std::find(series_names.begin(), series_names.end(), name);
    if (it == series_names.end()) throw ValidationError("unknown series name: " + name);
    return static_cast<Eigen::Index>(it - series_names.begin());
}

TimeSeriesPanel make_panel(std::vector<std::string> names, Eigen::MatrixXd values) {
    if (values.cols() < 1) throw ValidationError("panel needs at least one series");
    if (values.rows() < 3) throw ValidationError("panel needs at least 3 time points");
    if (static_cast<Eigen::Index>(names.size()) != values.cols())
        throw ValidationError("panel has " + std::to_string(values.cols()) + " columns but " +
                              std::to_string(names.size()) + " series names");
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (n.empty()) throw ValidationError("empty series name");
        if (!seen.insert(n).second) throw ValidationError("duplicate series name: " + n);
    }
    if (!values.allFinite()) throw ValidationError("panel contains non-finite values");
    return TimeSeriesPanel{std::move(names), std::move(values)};
}

TimeSeriesPanel load_panel(const std::string& path) {
    const auto lines = read_lines(path);
    std::size_t idx = 0;
    while (idx < lines.size() && trim(lines[idx]).empty()) ++idx;
    if (idx == lines.size()) throw ValidationError(path + ": empty file");

    std::vector<std::string> names;
    for (const auto& cell : split_csv_line(lines[idx])) {
        names.push_back(trim(cell));
        if (names.back().empty())
            throw ValidationError(path + ":" + std::to_string(idx + 1) + ": empty series name in header");
    }
    const std::size_t k = names.size();

    std::vector<std::vector<double>> rows;
    for (std::size_t li = idx + 1; li < lines.size(); ++li) {
        if (trim(lines[li]).empty()) continue;
        const auto cells = split_csv_line(lines[li]);
        if (cells.size() != k)
            throw ValidationError(path + ":" + std::to_string(li + 1) + ": has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(k));
        std::vector<double> row(k);
        for (std::size_t c = 0; c < k; ++c) row[c] = parse_cell(cells[c], path, li + 1, c + 1);
        rows.push_back(std::move(row));
    }
    if (rows.size() < 3)
        throw ValidationError(path + ": needs at least 3 time points, found " +
                              std::to_string(rows.size()));

    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(k));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < k; ++c)
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return make_panel(std::move(names), std::move(values));
}

void save_panel(const TimeSeriesPanel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    for (std::size_t c = 0; c < panel.series_names.size(); ++c) {
        if (c) out << ',';
        out << panel.series_names[c];
    }
    out << '\n';
    char buf[64];
    for (Eigen::Index r = 0; r < panel.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < panel.values.cols(); ++c) {
            if (c) out << ',';
            const auto res = std::to_chars(buf, buf + sizeof(buf), panel.values(r, c));
            out.write(buf, res.ptr - buf);
        }
        out << '\n';
    }
    if (!out) throw ValidationError("write failed: " + path);
}

SetPartition SetPartition::from_assignments(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
    if (pairs.empty()) throw ValidationError("partition has no assignments");
    SetPartition p;
    for (const auto& [series, label] : pairs) {
        if (series.empty()) throw ValidationError("partition assigns an empty series name");
        if (label.empty()) throw ValidationError("partition assigns series '" + series + "' to an empty label");
        const auto it = p.assignment_.find(series);
        if (it != p.assignment_.end())
            throw ValidationError("series '" + series + "' assigned to both '" + it->second +
                                  "' and '" + label + "'");
        p.assignment_[series] = label;
        auto mit = p.members_.find(label);
        if (mit == p.members_.end()) {
            p.labels_.push_back(label);
            p.members_[label] = {series};
        } else {
            mit->second.push_back(series);
        }
    }
    return p;
}

bool SetPartition::has_label(const std::string& label) const {
    return members_.find(label) != members_.end();
}

const std::vector<std::string>& SetPartition::members(const std::string& label) const {
    const auto it = members_.find(label);
    if (it == members_.end()) throw ValidationError("unknown set label: " + label);
    return it->second;
}

void SetPartition::validate_against(const TimeSeriesPanel& panel) const {
    std::set<std::string> have(panel.series_names.begin(), panel.series_names.end());
    for (const auto& [series, label] : assignment_) {
        if (!have.count(series))
            throw ValidationError("partition assigns series '" + series + "' (set '" + label +
                                  "') which is not in the panel");
    }
}

SetPartition load_partition(const std::string& path) {
    const auto lines = read_lines(path);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string line = trim(lines[li]);
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 2)
            throw ValidationError(path + ":" + std::to_string(li + 1) +
                                  ": expected 'series_name,set_label'");
        pairs.emplace_back(trim(cells[0]), trim(cells[1]));
        if (pairs.back().first.empty() || pairs.back().second.empty())
            throw ValidationError(path + ":" + std::to_string(li + 1) +
                                  ": empty series name or set label");
    }
    if (pairs.empty()) throw ValidationError(path + ": no assignments found");
    try {
        return SetPartition::from_assignments(pairs);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

Eigen::Index LaggedDesign::column_of(const std::string& name) const {
    const auto it = std::find(series_names.begin(), series_names.end(), name);
    if (it == series_names.end()) throw ValidationError("unknown series name: " + name);
    return static_cast<Eigen::Index>(it - series_names.begin());
}

LaggedDesign lag_align(const TimeSeriesPanel& panel) {
    const Eigen::Index t = panel.time_points();
    if (t < 3) throw ValidationError("lag alignment needs at least 3 time points");
    LaggedDesign d;
    d.series_names = panel.series_names;
    d.present = panel.values.bottomRows(t - 1);
    d.lagged = panel.values.topRows(t - 1);
    return d;
}

}  // namespace gcsets
