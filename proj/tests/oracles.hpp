#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the code path it is used to check.

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "utrack/motmetrics.hpp"

namespace utrack::oracle {

struct BestMatching {
    int count = 0;
    double cost = 0.0;
    std::vector<std::pair<int, int>> pairs;
};

/// Exact optimum over all matchings restricted to entries <= max_cost (non-forbidden):
/// maximize the number of pairs, then minimize total cost. Bitmask DP over columns.
BestMatching brute_force_matching(const Eigen::MatrixXd& cost, double max_cost);

/// Minimum cost over all full permutations of a square matrix (no gating).
double min_permutation_cost(const Eigen::MatrixXd& cost);

/// Plain box overlap, written without the library's geometry helpers.
double plain_iou(double ax1, double ay1, double ax2, double ay2, double bx1, double by1, double bx2, double by2);

/// Monte-Carlo covariance of (cx, cy, w/h, h) under corner noise N(mean, cov).
Eigen::Matrix4d monte_carlo_cah_cov(const Eigen::Vector4d& mean, const Eigen::Matrix4d& cov, int n,
                                    std::uint64_t seed);

/// x with P(chi2_2 <= x) = p, by bisection on the CDF 1 - exp(-x/2).
double chi2_2dof_quantile(double p);

/// IDF1 by exhaustive search over all gt/prediction trajectory pairings.
double exhaustive_idf1(const GtSequence& gt, const std::vector<FrameResult>& pred, double iou_thr);

/// Mean of E||X - g|| - 1/2 E||X - X'|| by direct summation on a supplied sample stream.
double energy_score_direct(const std::vector<Eigen::Vector4d>& samples, const Eigen::Vector4d& target);

/// Sample-IoU by direct term-by-term summation, corner-sorting each sample first.
double sample_iou_direct(const std::vector<Eigen::Vector4d>& samples, const Eigen::Vector4d& target);

}  // namespace utrack::oracle
