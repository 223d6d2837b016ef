#include "utrack/kalman.hpp"

#include <Eigen/Cholesky>

#include "utrack/probdet.hpp"

namespace utrack::kalman {

namespace {

Vec8 squared(Vec8 std_dev) { return std_dev.cwiseProduct(std_dev); }

}  // namespace

Mat8 transition() {
    Mat8 f = Mat8::Identity();
    for (int i = 0; i < 4; ++i) f(i, 4 + i) = 1.0;
    return f;
}

KfState init(const BoxCah& z, const std::optional<Mat4>& r, const KalmanNoise& noise) {
    KfState s;
    s.x.head<4>() = z.vec();
    s.x.tail<4>().setZero();
    const double h = z.h;
    const double wp = noise.std_weight_position;
    const double wv = noise.std_weight_velocity;
    Vec8 sd;
    sd << 2.0 * wp * h, 2.0 * wp * h, 1e-2, 2.0 * wp * h, 10.0 * wv * h, 10.0 * wv * h, 1e-5, 10.0 * wv * h;
    s.P = squared(sd).asDiagonal();
    if (r) s.P.topLeftCorner<4, 4>() += *r;
    return s;
}

Mat8 process_noise(const KfState& s, const KalmanNoise& noise) {
    const double h = s.x[3];
    const double wp = noise.std_weight_position;
    const double wv = noise.std_weight_velocity;
    Vec8 sd;
    sd << wp * h, wp * h, 1e-2, wp * h, wv * h, wv * h, 1e-5, wv * h;
    return squared(sd).asDiagonal();
}

Mat4 heuristic_measurement_noise(const KfState& s, const KalmanNoise& noise) {
    const double h = s.x[3];
    const double wp = noise.std_weight_position;
    Vec4 sd(wp * h, wp * h, 1e-1, wp * h);
    return sd.cwiseProduct(sd).asDiagonal();
}

KfState predict(const KfState& s, const KalmanNoise& noise) {
    const Mat8 f = transition();
    KfState out;
    out.x = f * s.x;
    out.P = f * s.P * f.transpose() + process_noise(s, noise);
    out.P = 0.5 * (out.P + out.P.transpose()).eval();
    return out;
}

Projection project(const KfState& s) {
    return {BoxCah::from_vec(s.x.head<4>()), s.P.topLeftCorner<4, 4>()};
}

KfState update(const KfState& s, const BoxCah& z, const std::optional<Mat4>& r, const KalmanNoise& noise) {
    const Mat4 meas_noise = r ? *r : heuristic_measurement_noise(s, noise);
    Mat4 innov_cov = s.P.topLeftCorner<4, 4>() + meas_noise;
    innov_cov = 0.5 * (innov_cov + innov_cov.transpose()).eval();
    Eigen::LLT<Mat4> llt(innov_cov);
    if (llt.info() != Eigen::Success) {
        innov_cov += probdet::kRegularizer * Mat4::Identity();
        llt.compute(innov_cov);
    }
    // K = P H^T S^-1, with P H^T the left 8x4 block of P
    const Eigen::Matrix<double, 8, 4> pht = s.P.leftCols<4>();
    const Eigen::Matrix<double, 8, 4> gain = llt.solve(pht.transpose()).transpose();
    const Vec4 innovation = z.vec() - s.x.head<4>();

    KfState out;
    out.x = s.x + gain * innovation;
    out.P = s.P - gain * innov_cov * gain.transpose();
    out.P = 0.5 * (out.P + out.P.transpose()).eval();
    return out;
}

}  // namespace utrack::kalman
