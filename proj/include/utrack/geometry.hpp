#pragma once

#include <Eigen/Core>

namespace utrack {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

/// Axis-aligned box given by its top-left (x1, y1) and bottom-right (x2, y2) corners, in pixels.
struct BoxTlbr {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const;
    bool valid() const;

    Vec4 vec() const { return {x1, y1, x2, y2}; }
    static BoxTlbr from_vec(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

    /// Box from MOTChallenge-style top-left + size.
    static BoxTlbr from_xywh(double x, double y, double w, double h) { return {x, y, x + w, y + h}; }

    bool operator==(const BoxTlbr&) const = default;
};

/// Center / aspect-ratio / height parameterization used by the motion model.
struct BoxCah {
    double cx = 0.0;
    double cy = 0.0;
    double a = 1.0;  // width / height
    double h = 1.0;

    Vec4 vec() const { return {cx, cy, a, h}; }
    static BoxCah from_vec(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
    BoxTlbr to_tlbr() const;
    bool valid() const;
};

namespace geometry {

/// Boxes thinner than this (in pixels) cannot be converted to the cah format.
inline constexpr double kMinHeight = 1e-3;

double intersection_area(const BoxTlbr& b1, const BoxTlbr& b2);

/// Intersection over union; 0 for disjoint or doubly-degenerate inputs.
double iou(const BoxTlbr& b1, const BoxTlbr& b2);

/// Generalized IoU in [-1, 1]: iou minus the fraction of the enclosing box not covered by the union.
double giou(const BoxTlbr& b1, const BoxTlbr& b2);

/// Smallest box containing both arguments.
BoxTlbr enclosing(const BoxTlbr& b1, const BoxTlbr& b2);

/// Swaps inverted corners so that x2 >= x1 and y2 >= y1.
BoxTlbr sorted_corners(const BoxTlbr& b);

BoxCah tlbr_to_cah(const BoxTlbr& b);

/// d(cx, cy, a, h) / d(x1, y1, x2, y2) evaluated at b.
Mat4 tlbr_to_cah_jacobian(const BoxTlbr& b);

struct CahGaussian {
    BoxCah mean;
    Mat4 cov;
};

/// Exact mean conversion plus first-order covariance propagation J cov J^T.
/// Throws utrack::Error when the box height is below kMinHeight.
CahGaussian tlbr_to_cah_with_cov(const BoxTlbr& mean, const Mat4& cov);

}  // namespace geometry
}  // namespace utrack
