#include "utrack/scoring.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "utrack/error.hpp"

namespace utrack::scoring {

double nll(const BoxTlbr& gt, const GaussianBox& d) {
    Mat4 cov = 0.5 * (d.cov + d.cov.transpose());
    Eigen::LLT<Mat4> llt(cov);
    if (llt.info() != Eigen::Success) {
        cov += probdet::kRegularizer * Mat4::Identity();
        llt.compute(cov);
    }
    const Vec4 r = gt.vec() - d.mean.vec();
    const double maha = r.dot(llt.solve(r));
    const Mat4 l = llt.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    return 0.5 * (maha + log_det + 4.0 * std::log(2.0 * std::numbers::pi));
}

std::vector<Vec4> draw_samples(const GaussianBox& d, std::size_t m, Rng& rng) {
    const Mat4 factor = probdet::sqrt_factor(d.cov);
    const Vec4 mean = d.mean.vec();
    std::vector<Vec4> out;
    out.reserve(m);
    for (std::size_t j = 0; j < m; ++j) out.push_back(probdet::draw(mean, factor, rng));
    return out;
}

namespace {

void check_inputs(std::span<const BoxTlbr> gts, std::span<const GaussianBox> dets, std::size_t m) {
    if (gts.size() != dets.size()) throw Error("ground truth and detection lists differ in length");
    if (gts.empty()) throw Error("scoring needs at least one pair");
    if (m < 2) throw Error("scoring needs at least two samples per pair");
}

// Running means stay exact when every term is identical, so point-mass
// predictions reproduce their closed-form scores bit-for-bit.
template <typename Kernel>
double energy_skeleton(std::span<const BoxTlbr> gts, std::span<const GaussianBox> dets, std::size_t m,
                       std::uint64_t seed, Kernel&& kernel) {
    check_inputs(gts, dets, m);
    Rng rng(seed);
    double total = 0.0;
    for (std::size_t n = 0; n < gts.size(); ++n) {
        const auto samples = draw_samples(dets[n], m, rng);
        const Vec4 target = gts[n].vec();
        double to_target = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            to_target += (kernel(samples[j], target) - to_target) / static_cast<double>(j + 1);
        }
        double pairwise = 0.0;
        for (std::size_t j = 0; j + 1 < m; ++j) {
            pairwise += (kernel(samples[j], samples[j + 1]) - pairwise) / static_cast<double>(j + 1);
        }
        // mean over the M - 1 consecutive pairs times 1/2 equals the 1/(2(M-1)) sum
        const double term = to_target - 0.5 * pairwise;
        total += (term - total) / static_cast<double>(n + 1);
    }
    return total;
}

}  // namespace

double energy_score(std::span<const BoxTlbr> gts, std::span<const GaussianBox> dets, std::size_t m,
                    std::uint64_t seed) {
    return energy_skeleton(gts, dets, m, seed, [](const Vec4& u, const Vec4& v) { return (u - v).norm(); });
}

double sample_iou_score(std::span<const BoxTlbr> gts, std::span<const GaussianBox> dets, std::size_t m,
                        std::uint64_t seed) {
    return energy_skeleton(gts, dets, m, seed, [](const Vec4& u, const Vec4& v) {
        const BoxTlbr bu = geometry::sorted_corners(BoxTlbr::from_vec(u));
        const BoxTlbr bv = geometry::sorted_corners(BoxTlbr::from_vec(v));
        return 1.0 - geometry::iou(bu, bv);
    });
}

ScoreReport score_pairs(std::span<const BoxTlbr> gts, std::span<const GaussianBox> dets, std::size_t m,
                        std::uint64_t seed) {
    ScoreReport report;
    report.n_pairs = gts.size();
    report.m_samples = m;
    if (gts.size() != dets.size()) throw Error("ground truth and detection lists differ in length");
    if (gts.empty()) return report;
    double sum = 0.0;
    for (std::size_t n = 0; n < gts.size(); ++n) sum += nll(gts[n], dets[n]);
    report.nll = sum / static_cast<double>(gts.size());
    report.es = energy_score(gts, dets, m, seed);
    report.sample_iou = sample_iou_score(gts, dets, m, seed);
    return report;
}

}  // namespace utrack::scoring
