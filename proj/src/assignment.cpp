#include "utrack/assignment.hpp"

#include <algorithm>
#include <numeric>

namespace utrack {

double Assignment::total_cost(const CostMatrix& c) const {
    double sum = 0.0;
    for (const auto& [r, col] : pairs) sum += c(r, col);
    return sum;
}

namespace assignment {

namespace {

bool feasible(double v, double max_cost) { return !CostMatrix::forbidden(v) && v <= max_cost; }

void fill_unmatched(Assignment& a, int rows, int cols) {
    std::vector<bool> row_used(rows, false);
    std::vector<bool> col_used(cols, false);
    for (const auto& [r, c] : a.pairs) {
        row_used[r] = true;
        col_used[c] = true;
    }
    for (int r = 0; r < rows; ++r)
        if (!row_used[r]) a.unmatched_rows.push_back(r);
    for (int c = 0; c < cols; ++c)
        if (!col_used[c]) a.unmatched_cols.push_back(c);
    std::sort(a.pairs.begin(), a.pairs.end());
}

// Shortest augmenting path with potentials; cost is n x m with n <= m and
// every entry finite. Returns the column assigned to each row.
std::vector<int> solve_dense(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0);
    std::vector<double> v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0);
    std::vector<int> way(m + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

}  // namespace

Assignment hungarian(const CostMatrix& c, double max_cost) {
    Assignment a;
    const int rows = c.rows();
    const int cols = c.cols();
    if (rows == 0 || cols == 0) {
        fill_unmatched(a, rows, cols);
        return a;
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int r = 0; r < rows; ++r) {
        for (int col = 0; col < cols; ++col) {
            const double v = c(r, col);
            if (!feasible(v, max_cost)) continue;
            any = true;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!any) {
        fill_unmatched(a, rows, cols);
        return a;
    }

    // Infeasible entries get a penalty larger than any possible saving from
    // feasible ones, so the dense optimum maximizes the feasible pair count first.
    const bool transpose = rows > cols;
    const int n = transpose ? cols : rows;
    const int m = transpose ? rows : cols;
    const double big = (static_cast<double>(n) + 1.0) * (hi - lo + 1.0);
    Eigen::MatrixXd dense(n, m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const double v = transpose ? c(j, i) : c(i, j);
            dense(i, j) = feasible(v, max_cost) ? v - lo : big;
        }
    }

    const auto match = solve_dense(dense);
    for (int i = 0; i < n; ++i) {
        const int j = match[i];
        if (j < 0) continue;
        const int r = transpose ? j : i;
        const int col = transpose ? i : j;
        if (feasible(c(r, col), max_cost)) a.pairs.emplace_back(r, col);
    }
    fill_unmatched(a, rows, cols);
    return a;
}

Assignment greedy_by_priority(const CostMatrix& c, std::span<const double> priority, double max_cost) {
    const int rows = c.rows();
    const int cols = c.cols();
    std::vector<int> order(cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return priority[a] < priority[b]; });

    Assignment a;
    std::vector<bool> row_taken(rows, false);
    for (int col : order) {
        int best = -1;
        for (int r = 0; r < rows; ++r) {
            if (row_taken[r] || !feasible(c(r, col), max_cost)) continue;
            if (best < 0 || c(r, col) < c(best, col)) best = r;
        }
        if (best >= 0) {
            row_taken[best] = true;
            a.pairs.emplace_back(best, col);
        }
    }
    fill_unmatched(a, rows, cols);
    return a;
}

CostMatrix iou_cost(std::span<const BoxTlbr> tracks, std::span<const BoxTlbr> dets, bool forbid_disjoint) {
    CostMatrix c(static_cast<Eigen::Index>(tracks.size()), static_cast<Eigen::Index>(dets.size()));
    for (int r = 0; r < c.rows(); ++r) {
        for (int col = 0; col < c.cols(); ++col) {
            const double overlap = geometry::iou(tracks[r], dets[col]);
            c(r, col) = (forbid_disjoint && overlap <= 0.0) ? CostMatrix::kForbidden : 1.0 - overlap;
        }
    }
    return c;
}

CostMatrix giou_cost(std::span<const BoxTlbr> tracks, std::span<const BoxTlbr> dets) {
    CostMatrix c(static_cast<Eigen::Index>(tracks.size()), static_cast<Eigen::Index>(dets.size()));
    for (int r = 0; r < c.rows(); ++r)
        for (int col = 0; col < c.cols(); ++col) c(r, col) = 1.0 - geometry::giou(tracks[r], dets[col]);
    return c;
}

void forbid_label_mismatch(CostMatrix& c, std::span<const int> row_labels, std::span<const int> col_labels) {
    for (int r = 0; r < c.rows(); ++r)
        for (int col = 0; col < c.cols(); ++col)
            if (row_labels[r] != col_labels[col]) c(r, col) = CostMatrix::kForbidden;
}

}  // namespace assignment
}  // namespace utrack
