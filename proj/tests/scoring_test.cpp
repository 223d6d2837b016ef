#include "utrack/scoring.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "utrack/error.hpp"

namespace utrack {
namespace {

GaussianBox gaussian(BoxTlbr mean, Mat4 cov) {
    GaussianBox d;
    d.mean = mean;
    d.cov = cov;
    return d;
}

TEST(Nll, IdentityAtMode) {
    const BoxTlbr b{0, 0, 10, 10};
    EXPECT_NEAR(scoring::nll(b, gaussian(b, Mat4::Identity())), 2.0 * std::log(2.0 * std::numbers::pi), 1e-12);
    EXPECT_NEAR(scoring::nll(b, gaussian(b, Mat4::Identity())), 3.6758, 1e-4);
}

TEST(Nll, ShrinkingCovarianceLowersModeValue) {
    const BoxTlbr b{0, 0, 10, 10};
    double prev = scoring::nll(b, gaussian(b, Mat4::Identity()));
    for (double s : {0.5, 0.25, 0.1, 0.01}) {
        const double cur = scoring::nll(b, gaussian(b, s * Mat4::Identity()));
        EXPECT_LT(cur, prev);
        prev = cur;
    }
}

TEST(Nll, OneMahalanobisUnitAddsHalf) {
    Mat4 cov;
    cov << 4, 1, 0, 0, 1, 3, 0, 0, 0, 0, 2, 0.5, 0, 0, 0.5, 5;
    const BoxTlbr mean{10, 20, 40, 80};
    const double at_mode = scoring::nll(mean, gaussian(mean, cov));
    // unit Mahalanobis step along an eigenvector: sqrt(lambda) * v
    Eigen::SelfAdjointEigenSolver<Mat4> es(cov);
    const Vec4 step = std::sqrt(es.eigenvalues()[2]) * es.eigenvectors().col(2);
    const double off = scoring::nll(BoxTlbr::from_vec(mean.vec() + step), gaussian(mean, cov));
    EXPECT_NEAR(off - at_mode, 0.5, 1e-12);
}

TEST(Nll, DecreasesTowardMeanAlongRay) {
    Mat4 cov = 2.0 * Mat4::Identity();
    cov(0, 1) = cov(1, 0) = 0.7;
    const GaussianBox d = gaussian({0, 0, 20, 20}, cov);
    const Vec4 dir(1.0, -2.0, 0.5, 3.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double t = 4.0; t >= 0.0; t -= 0.5) {
        const double cur = scoring::nll(BoxTlbr::from_vec(d.mean.vec() + t * dir), d);
        EXPECT_LT(cur, prev);
        prev = cur;
    }
}

TEST(Nll, SingularCovarianceIsRegularized) {
    const BoxTlbr b{0, 0, 10, 10};
    EXPECT_TRUE(std::isfinite(scoring::nll(b, gaussian(b, Mat4::Zero()))));
}

TEST(EnergyScore, PointMassAtTargetIsZero) {
    const std::vector<BoxTlbr> gts{{0, 0, 10, 10}, {5, 5, 50, 70}};
    const std::vector<GaussianBox> dets{gaussian(gts[0], Mat4::Zero()), gaussian(gts[1], Mat4::Zero())};
    EXPECT_EQ(scoring::energy_score(gts, dets, 16, 1), 0.0);
}

TEST(EnergyScore, PointMassOffTargetIsDistance) {
    const std::vector<BoxTlbr> gts{{0, 0, 10, 10}};
    const std::vector<GaussianBox> dets{gaussian({3, 4, 10, 10}, Mat4::Zero())};
    EXPECT_EQ(scoring::energy_score(gts, dets, 32, 9), 5.0);
}

TEST(EnergyScore, MatchesHighSampleReference) {
    const std::vector<BoxTlbr> gts{{0, 0, 10, 10}};
    const std::vector<GaussianBox> dets{gaussian(gts[0], Mat4::Identity())};
    const double es = scoring::energy_score(gts, dets, 10'000, 3);
    // reference: 10^6 draws with an independent generator
    std::mt19937_64 eng(77);
    std::normal_distribution<double> nd;
    const int n = 1'000'000;
    double a = 0.0;
    double b = 0.0;
    Eigen::Vector4d prev;
    for (int i = 0; i < n; ++i) {
        Eigen::Vector4d z(nd(eng), nd(eng), nd(eng), nd(eng));
        a += z.norm();
        if (i > 0) b += (z - prev).norm();
        prev = z;
    }
    const double ref = a / n - b / (2.0 * (n - 1));
    EXPECT_NEAR(es, ref, 0.02 * ref);
}

TEST(EnergyScore, MatchesDirectSummationOnSharedStream) {
    Mat4 cov = 0.5 * Mat4::Identity();
    cov(0, 2) = cov(2, 0) = 0.2;
    const std::vector<BoxTlbr> gts{{0, 0, 10, 10}, {20, 20, 35, 60}};
    const std::vector<GaussianBox> dets{gaussian({0.5, 0, 10, 11}, cov), gaussian({21, 20, 35, 58}, 2.0 * cov)};
    const std::size_t m = 257;
    Rng rng(5);
    double expected = 0.0;
    for (std::size_t n = 0; n < gts.size(); ++n) {
        const auto s = scoring::draw_samples(dets[n], m, rng);
        std::vector<Eigen::Vector4d> v(s.begin(), s.end());
        expected += oracle::energy_score_direct(v, gts[n].vec());
    }
    expected /= static_cast<double>(gts.size());
    EXPECT_NEAR(scoring::energy_score(gts, dets, m, 5), expected, 1e-12);
}

TEST(EnergyScore, NonNegativeOverRandomTrials) {
    Rng rng(99);
    for (int t = 0; t < 100; ++t) {
        Mat4 a;
        for (int k = 0; k < 16; ++k) a.data()[k] = rng.normal();
        const Mat4 cov = a * a.transpose();
        const BoxTlbr gt{rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(20, 40), rng.uniform(20, 40)};
        const BoxTlbr mean = BoxTlbr::from_vec(gt.vec() + rng.normal_vec<4>());
        const std::vector<BoxTlbr> gts{gt};
        const std::vector<GaussianBox> dets{gaussian(mean, cov)};
        EXPECT_GE(scoring::energy_score(gts, dets, 64, 1000 + t), 0.0);
    }
}

TEST(EnergyScore, ReproducibleForSeed) {
    const std::vector<BoxTlbr> gts{{0, 0, 10, 10}};
    const std::vector<GaussianBox> dets{gaussian({1, 1, 10, 10}, Mat4::Identity())};
    const double a = scoring::energy_score(gts, dets, 500, 42);
    const double b = scoring::energy_score(gts, dets, 500, 42);
    const double c = scoring::energy_score(gts, dets, 500, 43);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(EnergyScore, InputErrors) {
    const std::vector<BoxTlbr> gts{{0, 0, 10, 10}};
    const std::vector<GaussianBox> none;
    const std::vector<GaussianBox> one{gaussian(gts[0], Mat4::Identity())};
    EXPECT_THROW(scoring::energy_score(gts, none, 10, 1), Error);
    EXPECT_THROW(scoring::energy_score(gts, one, 1, 1), Error);
    EXPECT_THROW(scoring::sample_iou_score(gts, none, 10, 1), Error);
}

TEST(SampleIou, PointMassCases) {
    const std::vector<BoxTlbr> gts{{0, 0, 10, 10}};
    const std::vector<GaussianBox> same{gaussian(gts[0], Mat4::Zero())};
    const std::vector<GaussianBox> far{gaussian({50, 50, 60, 60}, Mat4::Zero())};
    EXPECT_EQ(scoring::sample_iou_score(gts, same, 16, 1), 0.0);
    EXPECT_EQ(scoring::sample_iou_score(gts, far, 16, 1), 1.0);
}

TEST(SampleIou, MatchesTermByTermOracle) {
    const std::vector<BoxTlbr> gts{{0, 0, 10, 10}};
    const std::vector<GaussianBox> dets{gaussian(gts[0], 0.01 * Mat4::Identity())};
    const std::size_t m = 1000;
    Rng rng(8);
    const auto s = scoring::draw_samples(dets[0], m, rng);
    const double expected = oracle::sample_iou_direct({s.begin(), s.end()}, gts[0].vec());
    EXPECT_NEAR(scoring::sample_iou_score(gts, dets, m, 8), expected, 1e-12);
}

TEST(SampleIou, InvertedSamplesAreCornerSorted) {
    // a wide distribution on a tiny box yields many inverted samples; the score stays bounded
    const std::vector<BoxTlbr> gts{{0, 0, 1, 1}};
    const std::vector<GaussianBox> dets{gaussian(gts[0], 4.0 * Mat4::Identity())};
    const double v = scoring::sample_iou_score(gts, dets, 2000, 2);
    EXPECT_GE(v, -0.5);
    EXPECT_LE(v, 1.0);
}

TEST(ScorePairs, Aggregates) {
    const std::vector<BoxTlbr> gts{{0, 0, 10, 10}, {0, 0, 20, 20}};
    const std::vector<GaussianBox> dets{gaussian(gts[0], Mat4::Identity()), gaussian(gts[1], Mat4::Identity())};
    const auto r = scoring::score_pairs(gts, dets, 100, 4);
    EXPECT_EQ(r.n_pairs, 2u);
    EXPECT_EQ(r.m_samples, 100u);
    EXPECT_NEAR(r.nll, 2.0 * std::log(2.0 * std::numbers::pi), 1e-12);
    EXPECT_EQ(r.es, scoring::energy_score(gts, dets, 100, 4));
    EXPECT_EQ(r.sample_iou, scoring::sample_iou_score(gts, dets, 100, 4));
    const auto empty = scoring::score_pairs({}, {}, 100, 4);
    EXPECT_EQ(empty.n_pairs, 0u);
}

}  // namespace
}  // namespace utrack
