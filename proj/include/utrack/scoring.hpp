#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "utrack/probdet.hpp"

namespace utrack {

/// Aggregate distribution-quality scores over matched (ground truth, detection) pairs.
struct ScoreReport {
    double nll = 0.0;
    double es = 0.0;
    double sample_iou = 0.0;
    std::size_t n_pairs = 0;
    std::size_t m_samples = 0;
};

namespace scoring {

/// Negative log density of gt under the detection's Gaussian. Singular
/// covariances are regularized with probdet::kRegularizer.
double nll(const BoxTlbr& gt, const GaussianBox& d);

/// Sample-based energy score, mean over pairs; each pair draws m samples from
/// a stream seeded by `seed`. Throws on length mismatch, empty input or m < 2.
double energy_score(std::span<const BoxTlbr> gts, std::span<const GaussianBox> dets, std::size_t m,
                    std::uint64_t seed);

/// Energy-score skeleton with the kernel 1 - IoU on decoded (corner-sorted) box samples.
double sample_iou_score(std::span<const BoxTlbr> gts, std::span<const GaussianBox> dets, std::size_t m,
                        std::uint64_t seed);

/// Samples for pair `n` of a scored batch; exposed so that independent checks
/// can rebuild the exact stream the scores consume.
std::vector<Vec4> draw_samples(const GaussianBox& d, std::size_t m, Rng& rng);

ScoreReport score_pairs(std::span<const BoxTlbr> gts, std::span<const GaussianBox> dets, std::size_t m,
                        std::uint64_t seed);

}  // namespace scoring
}  // namespace utrack
