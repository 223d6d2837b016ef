#pragma once

#include <span>
#include <utility>
#include <vector>

#include "utrack/geometry.hpp"
#include "utrack/rng.hpp"

namespace utrack {

/// A detection whose corner coordinates follow N(mean, cov) over (x1, y1, x2, y2).
struct GaussianBox {
    BoxTlbr mean;
    Mat4 cov = Mat4::Zero();
    double score = 1.0;
    int label = 0;
    /// False when the source carried no covariance; cov is then zero and
    /// consumers that need a measurement noise fall back to their defaults.
    bool has_cov = true;
};

/// 95% error ellipse of one corner: full axis lengths in pixels, a >= b.
struct CornerEllipse {
    double a = 0.0;
    double b = 0.0;
    double orientation = 0.0;  // radians, direction of the major axis
};

struct CornerEllipses {
    CornerEllipse tl;
    CornerEllipse br;
};

namespace probdet {

/// 0.95 quantile of the chi-square distribution with 2 degrees of freedom, -2 ln(0.05).
inline constexpr double kChi2Quantile95 = 5.991464547107979;
inline constexpr double kMinDet = 1e-12;
inline constexpr double kRegularizer = 1e-9;

/// Differential entropy in nats; the determinant is clamped at kMinDet.
double gaussian_entropy(const GaussianBox& d);
double gaussian_entropy(const Mat4& cov);

CornerEllipse ellipse_from_block(const Eigen::Matrix2d& block, double quantile = kChi2Quantile95);
CornerEllipses corner_ellipses_95(const GaussianBox& d);

/// Keeps a detection iff both corners' major axes fit within tau * width and
/// both minor axes within tau * height. Order is preserved.
std::vector<GaussianBox> ellipse_filter(std::span<const GaussianBox> dets, double tau);
bool passes_ellipse_filter(const GaussianBox& d, double tau);

/// Mean box enlarged to the axis-aligned extremities of the two corner ellipses.
BoxTlbr relax_box(const GaussianBox& d);

struct SampleStats {
    Vec4 mean;
    Mat4 cov;
};

/// Sample mean and unbiased (N - 1) sample covariance. Throws on fewer than two samples.
SampleStats sample_stats(std::span<const Vec4> samples);

/// Symmetric square-root factor L with L L^T = cov; negative eigenvalues are clamped to zero.
Mat4 sqrt_factor(const Mat4& cov);

/// Draws from N(mean, L L^T) given the factor from sqrt_factor.
inline Vec4 draw(const Vec4& mean, const Mat4& factor, Rng& rng) {
    return mean + factor * rng.normal_vec<4>();
}

/// Convex weights of the Improved Fast Covariance Intersection rule.
std::vector<double> ifci_weights(std::span<const Mat4> informations);

/// Fuses possibly correlated estimates of the same object. A single member is returned unchanged.
GaussianBox fuse_ifci(std::span<const GaussianBox> members);

/// Greedy clustering around score-ordered centers; each cluster is fused instead of suppressed.
std::vector<GaussianBox> prob_nms(std::span<const GaussianBox> dets, double iou_thr);

/// Cluster membership of prob_nms: indices into dets, one vector per output, center first.
std::vector<std::vector<std::size_t>> prob_nms_clusters(std::span<const GaussianBox> dets, double iou_thr);

}  // namespace probdet
}  // namespace utrack
