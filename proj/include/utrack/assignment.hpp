#pragma once

#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "utrack/geometry.hpp"

namespace utrack {

/// Rows are tracks, columns detections; lower is better.
struct CostMatrix {
    /// Marks a pair that may never be matched; compares greater than every feasible cost.
    static constexpr double kForbidden = std::numeric_limits<double>::infinity();

    Eigen::MatrixXd values;

    CostMatrix() = default;
    CostMatrix(Eigen::Index rows, Eigen::Index cols) : values(Eigen::MatrixXd::Zero(rows, cols)) {}
    explicit CostMatrix(Eigen::MatrixXd v) : values(std::move(v)) {}

    int rows() const { return static_cast<int>(values.rows()); }
    int cols() const { return static_cast<int>(values.cols()); }
    double operator()(int r, int c) const { return values(r, c); }
    double& operator()(int r, int c) { return values(r, c); }

    static bool forbidden(double v) { return v == kForbidden; }
};

struct Assignment {
    std::vector<std::pair<int, int>> pairs;  // (row, col), ascending by row
    std::vector<int> unmatched_rows;
    std::vector<int> unmatched_cols;

    double total_cost(const CostMatrix& c) const;
};

namespace assignment {

/// Optimal assignment restricted to entries with cost <= max_cost: the number
/// of pairs is maximized first, then the total cost is minimized. Rectangular
/// inputs are supported; runs in O(n^2 m) for n = min(rows, cols).
Assignment hungarian(const CostMatrix& c, double max_cost);

/// Columns are visited in ascending priority (ties by column index); each
/// takes its cheapest remaining feasible row (ties by row index).
Assignment greedy_by_priority(const CostMatrix& c, std::span<const double> priority, double max_cost);

/// 1 - IoU, with pairs that do not overlap at all marked forbidden when forbid_disjoint is set.
CostMatrix iou_cost(std::span<const BoxTlbr> tracks, std::span<const BoxTlbr> dets, bool forbid_disjoint = true);

/// 1 - GIoU, in [0, 2].
CostMatrix giou_cost(std::span<const BoxTlbr> tracks, std::span<const BoxTlbr> dets);

/// Forbids every (row, col) whose labels differ.
void forbid_label_mismatch(CostMatrix& c, std::span<const int> row_labels, std::span<const int> col_labels);

}  // namespace assignment
}  // namespace utrack
