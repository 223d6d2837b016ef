#include "utrack/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "utrack/error.hpp"

namespace utrack {

double BoxTlbr::area() const {
    return std::max(0.0, x2 - x1) * std::max(0.0, y2 - y1);
}

bool BoxTlbr::valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) && x2 >= x1 &&
           y2 >= y1;
}

BoxTlbr BoxCah::to_tlbr() const {
    const double w = a * h;
    return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

bool BoxCah::valid() const {
    return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(a) && std::isfinite(h) && a > 0.0 && h > 0.0;
}

namespace geometry {

double intersection_area(const BoxTlbr& b1, const BoxTlbr& b2) {
    const double iw = std::min(b1.x2, b2.x2) - std::max(b1.x1, b2.x1);
    const double ih = std::min(b1.y2, b2.y2) - std::max(b1.y1, b2.y1);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    return iw * ih;
}

double iou(const BoxTlbr& b1, const BoxTlbr& b2) {
    const double inter = intersection_area(b1, b2);
    const double uni = b1.area() + b2.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

BoxTlbr enclosing(const BoxTlbr& b1, const BoxTlbr& b2) {
    return {std::min(b1.x1, b2.x1), std::min(b1.y1, b2.y1), std::max(b1.x2, b2.x2), std::max(b1.y2, b2.y2)};
}

double giou(const BoxTlbr& b1, const BoxTlbr& b2) {
    const double inter = intersection_area(b1, b2);
    const double uni = b1.area() + b2.area() - inter;
    const double hull = enclosing(b1, b2).area();
    const double overlap = uni > 0.0 ? inter / uni : 0.0;
    if (hull <= 0.0) return overlap;
    return overlap - (hull - uni) / hull;
}

BoxTlbr sorted_corners(const BoxTlbr& b) {
    return {std::min(b.x1, b.x2), std::min(b.y1, b.y2), std::max(b.x1, b.x2), std::max(b.y1, b.y2)};
}

BoxCah tlbr_to_cah(const BoxTlbr& b) {
    const double w = b.x2 - b.x1;
    const double h = b.y2 - b.y1;
    return {0.5 * (b.x1 + b.x2), 0.5 * (b.y1 + b.y2), w / h, h};
}

Mat4 tlbr_to_cah_jacobian(const BoxTlbr& b) {
    const double w = b.x2 - b.x1;
    const double h = b.y2 - b.y1;
    Mat4 j;
    // clang-format off
    j << 0.5,      0.0,         0.5,     0.0,
         0.0,      0.5,         0.0,     0.5,
         -1.0 / h, w / (h * h), 1.0 / h, -w / (h * h),
         0.0,      -1.0,        0.0,     1.0;
    // clang-format on
    return j;
}

CahGaussian tlbr_to_cah_with_cov(const BoxTlbr& mean, const Mat4& cov) {
    if (!(mean.height() > kMinHeight)) {
        throw Error("box height below minimum for cah conversion");
    }
    const Mat4 j = tlbr_to_cah_jacobian(mean);
    Mat4 out = j * cov * j.transpose();
    out = 0.5 * (out + out.transpose()).eval();
    return {tlbr_to_cah(mean), out};
}

}  // namespace geometry
}  // namespace utrack
