#include "utrack/probdet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "utrack/error.hpp"

namespace utrack::probdet {

double gaussian_entropy(const Mat4& cov) {
    const double det = std::max(cov.determinant(), kMinDet);
    return 0.5 * (4.0 * std::log(2.0 * std::numbers::pi * std::numbers::e) + std::log(det));
}

double gaussian_entropy(const GaussianBox& d) { return gaussian_entropy(d.cov); }

CornerEllipse ellipse_from_block(const Eigen::Matrix2d& block, double quantile) {
    const double sxx = block(0, 0);
    const double syy = block(1, 1);
    const double sxy = 0.5 * (block(0, 1) + block(1, 0));
    const double mid = 0.5 * (sxx + syy);
    const double rad = std::hypot(0.5 * (sxx - syy), sxy);
    const double l1 = std::max(mid + rad, 0.0);
    const double l2 = std::max(mid - rad, 0.0);
    CornerEllipse e;
    e.a = 2.0 * std::sqrt(quantile * l1);
    e.b = 2.0 * std::sqrt(quantile * l2);
    e.orientation = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    return e;
}

CornerEllipses corner_ellipses_95(const GaussianBox& d) {
    return {ellipse_from_block(d.cov.block<2, 2>(0, 0)), ellipse_from_block(d.cov.block<2, 2>(2, 2))};
}

bool passes_ellipse_filter(const GaussianBox& d, double tau) {
    const double w = d.mean.width();
    const double h = d.mean.height();
    if (!(w > 0.0) || !(h > 0.0)) return false;
    const auto [tl, br] = corner_ellipses_95(d);
    return std::max(tl.a, br.a) <= tau * w && std::max(tl.b, br.b) <= tau * h;
}

std::vector<GaussianBox> ellipse_filter(std::span<const GaussianBox> dets, double tau) {
    std::vector<GaussianBox> kept;
    kept.reserve(dets.size());
    for (const auto& d : dets) {
        if (passes_ellipse_filter(d, tau)) kept.push_back(d);
    }
    return kept;
}

BoxTlbr relax_box(const GaussianBox& d) {
    auto extent = [&](int k) { return std::sqrt(kChi2Quantile95 * std::max(d.cov(k, k), 0.0)); };
    return {d.mean.x1 - extent(0), d.mean.y1 - extent(1), d.mean.x2 + extent(2), d.mean.y2 + extent(3)};
}

SampleStats sample_stats(std::span<const Vec4> samples) {
    if (samples.size() < 2) throw Error("sample_stats needs at least two samples");
    const double n = static_cast<double>(samples.size());
    Vec4 mean = Vec4::Zero();
    for (const auto& s : samples) mean += s;
    mean /= n;
    Mat4 cov = Mat4::Zero();
    for (const auto& s : samples) {
        const Vec4 d = s - mean;
        cov += d * d.transpose();
    }
    cov /= (n - 1.0);
    return {mean, cov};
}

Mat4 sqrt_factor(const Mat4& cov) {
    const Mat4 sym = 0.5 * (cov + cov.transpose());
    if (sym.isZero(0.0)) return Mat4::Zero();
    Eigen::SelfAdjointEigenSolver<Mat4> es(sym);
    const Vec4 root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal();
}

namespace {

Mat4 information(const Mat4& cov) {
    Mat4 sym = 0.5 * (cov + cov.transpose());
    Eigen::LLT<Mat4> llt(sym);
    if (llt.info() != Eigen::Success) {
        sym += kRegularizer * Mat4::Identity();
        llt.compute(sym);
        if (llt.info() != Eigen::Success) throw Error("member covariance is not positive semi-definite");
    }
    Mat4 info = llt.solve(Mat4::Identity());
    return 0.5 * (info + info.transpose());
}

}  // namespace

std::vector<double> ifci_weights(std::span<const Mat4> informations) {
    const std::size_t n = informations.size();
    if (n == 0) return {};
    if (n == 1) return {1.0};
    Mat4 total = Mat4::Zero();
    for (const auto& info : informations) total += info;
    const double det_total = total.determinant();
    std::vector<double> numer(n);
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double det_i = informations[i].determinant();
        const double det_rest = (total - informations[i]).determinant();
        numer[i] = det_total - det_rest + det_i;
        denom += det_i - det_rest;
    }
    denom += static_cast<double>(n) * det_total;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::max(numer[i], 0.0) / denom;
    // renormalize against rounding in the determinant sums
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) x /= sum;
    return w;
}

GaussianBox fuse_ifci(std::span<const GaussianBox> members) {
    if (members.empty()) throw Error("fuse_ifci needs at least one member");
    if (members.size() == 1) return members.front();

    std::vector<Mat4> infos;
    infos.reserve(members.size());
    for (const auto& m : members) {
        if (m.label != members.front().label) throw Error("fuse_ifci members must share a label");
        infos.push_back(information(m.cov));
    }
    const auto w = ifci_weights(infos);

    Mat4 fused_info = Mat4::Zero();
    Vec4 fused_eta = Vec4::Zero();
    for (std::size_t i = 0; i < members.size(); ++i) {
        fused_info += w[i] * infos[i];
        fused_eta += w[i] * (infos[i] * members[i].mean.vec());
    }
    fused_info = 0.5 * (fused_info + fused_info.transpose()).eval();
    Eigen::LLT<Mat4> llt(fused_info);
    Mat4 cov = llt.solve(Mat4::Identity());
    cov = 0.5 * (cov + cov.transpose()).eval();

    GaussianBox out;
    out.mean = BoxTlbr::from_vec(cov * fused_eta);
    out.cov = cov;
    out.label = members.front().label;
    out.has_cov = std::all_of(members.begin(), members.end(), [](const auto& m) { return m.has_cov; });
    out.score = 0.0;
    for (const auto& m : members) out.score = std::max(out.score, m.score);
    return out;
}

std::vector<std::vector<std::size_t>> prob_nms_clusters(std::span<const GaussianBox> dets, double iou_thr) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

    std::vector<bool> claimed(dets.size(), false);
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const std::size_t c = order[oi];
        if (claimed[c]) continue;
        claimed[c] = true;
        std::vector<std::size_t> cluster{c};
        for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
            const std::size_t m = order[oj];
            if (claimed[m] || dets[m].label != dets[c].label) continue;
            if (geometry::iou(dets[c].mean, dets[m].mean) >= iou_thr) {
                claimed[m] = true;
                cluster.push_back(m);
            }
        }
        clusters.push_back(std::move(cluster));
    }
    return clusters;
}

std::vector<GaussianBox> prob_nms(std::span<const GaussianBox> dets, double iou_thr) {
    std::vector<GaussianBox> out;
    for (const auto& cluster : prob_nms_clusters(dets, iou_thr)) {
        std::vector<GaussianBox> members;
        members.reserve(cluster.size());
        for (auto i : cluster) members.push_back(dets[i]);
        out.push_back(fuse_ifci(members));
    }
    return out;
}

}  // namespace utrack::probdet
