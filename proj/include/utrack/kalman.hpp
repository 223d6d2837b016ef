#pragma once

#include <optional>

#include <Eigen/Core>

#include "utrack/geometry.hpp"

namespace utrack {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

/// Constant-velocity state [cx, cy, a, h, vcx, vcy, va, vh] with per-frame velocities.
struct KfState {
    Vec8 x = Vec8::Zero();
    Mat8 P = Mat8::Identity();

    BoxCah box() const { return {x[0], x[1], x[2], x[3]}; }
};

/// Height-proportional noise weights of the SORT-family heuristics.
struct KalmanNoise {
    double std_weight_position = 1.0 / 20.0;
    double std_weight_velocity = 1.0 / 160.0;
};

struct Projection {
    BoxCah mean;
    Mat4 cov;
};

namespace kalman {

/// Position block from z, zero velocities, heuristic P; r (when given) is
/// added to the position block of P.
KfState init(const BoxCah& z, const std::optional<Mat4>& r, const KalmanNoise& noise = {});

KfState predict(const KfState& s, const KalmanNoise& noise = {});

/// Linear update on the position block. With r the measurement noise is r
/// itself, otherwise the heuristic R scaled by the predicted height.
KfState update(const KfState& s, const BoxCah& z, const std::optional<Mat4>& r, const KalmanNoise& noise = {});

Projection project(const KfState& s);

Mat4 heuristic_measurement_noise(const KfState& s, const KalmanNoise& noise = {});
Mat8 process_noise(const KfState& s, const KalmanNoise& noise = {});
Mat8 transition();

}  // namespace kalman
}  // namespace utrack
