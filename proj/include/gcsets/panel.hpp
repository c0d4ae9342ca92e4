#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace gcsets {

// A multivariate time series: T rows (time points, oldest first) by k columns
// (named series).
struct TimeSeriesPanel {
    std::vector<std::string> series_names;
    Eigen::MatrixXd values;  // T x k

    Eigen::Index time_points() const { return values.rows(); }
    Eigen::Index series_count() const { return values.cols(); }

    // Column index of a named series; throws ValidationError if unknown.
    Eigen::Index column_of(const std::string& name) const;
};

// Validates shape, name uniqueness and finiteness.
TimeSeriesPanel make_panel(std::vector<std::string> names, Eigen::MatrixXd values);

// CSV with a header row of series names; one row per time point, oldest first.
TimeSeriesPanel load_panel(const std::string& path);

// Writes the same CSV format with shortest round-trip number formatting, so a
// save/load cycle reproduces the panel bit for bit.
void save_panel(const TimeSeriesPanel& panel, const std::string& path);

// Disjoint assignment of series names to labelled sets.  Labels are kept in
// order of first appearance; members keep their assignment order.
class SetPartition {
public:
    static SetPartition from_assignments(const std::vector<std::pair<std::string, std::string>>& pairs);

    const std::vector<std::string>& labels() const { return labels_; }
    bool has_label(const std::string& label) const;
    const std::vector<std::string>& members(const std::string& label) const;
    const std::map<std::string, std::string>& assignments() const { return assignment_; }

    // Every assigned series must exist in the panel; unassigned panel series
    // are allowed.
    void validate_against(const TimeSeriesPanel& panel) const;

private:
    std::vector<std::string> labels_;
    std::map<std::string, std::vector<std::string>> members_;
    std::map<std::string, std::string> assignment_;
};

// CSV lines of "series_name,set_label"; lines whose first non-space character
// is '#' are comments.
SetPartition load_partition(const std::string& path);

// One-lag alignment of a panel: row t of `present` is panel row t+1, row t of
// `lagged` is panel row t.  Both have T-1 rows and share the panel's column
// order.
struct LaggedDesign {
    std::vector<std::string> series_names;
    Eigen::MatrixXd present;  // (T-1) x k
    Eigen::MatrixXd lagged;   // (T-1) x k

    Eigen::Index rows() const { return present.rows(); }
    Eigen::Index column_of(const std::string& name) const;
};

LaggedDesign lag_align(const TimeSeriesPanel& panel);

}  // namespace gcsets
