#include "utrack/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "utrack/assignment.hpp"
#include "utrack/error.hpp"

namespace utrack {

const char* to_string(TrackStatus s) {
    switch (s) {
        case TrackStatus::Tentative: return "tentative";
        case TrackStatus::Active: return "active";
        case TrackStatus::Lost: return "lost";
        case TrackStatus::Removed: return "removed";
    }
    return "unknown";
}

TrackerConfig TrackerConfig::base() {
    TrackerConfig c;
    c.enable_kfcov = false;
    c.enable_ellipse = false;
    c.enable_relax = false;
    c.enable_greedy = false;
    return c;
}

void TrackerConfig::validate() const {
    auto unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    if (!(tau2 > 0.0) || !(tau2 <= tau1) || !std::isfinite(tau1)) throw Error("config: need 0 < tau2 <= tau1");
    if (!unit(score_low) || !unit(score_high) || score_low > score_high)
        throw Error("config: need 0 <= score_low <= score_high <= 1");
    for (double g : {match_thr_1, match_thr_tentative, match_thr_2, match_thr_relax})
        if (!std::isfinite(g) || g < 0.0) throw Error("config: cost gates must be finite and non-negative");
    if (max_lost < 0) throw Error("config: max_lost must be non-negative");
    if (min_hits < 1) throw Error("config: min_hits must be at least 1");
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::optional<Mat4> Tracker::measurement_cov(const GaussianBox& d) {
    if (!cfg_.enable_kfcov) return std::nullopt;
    if (!d.has_cov) {
        ++cov_fallbacks_;
        return std::nullopt;
    }
    return geometry::tlbr_to_cah_with_cov(d.mean, d.cov).cov;
}

void Tracker::update_track(Track& t, const GaussianBox& d) {
    t.kf = kalman::update(t.kf, geometry::tlbr_to_cah(d.mean), measurement_cov(d), cfg_.noise);
    t.last_det = d;
    t.frames_since_update = 0;
    ++t.hits;
    if (t.status == TrackStatus::Lost) {
        t.status = TrackStatus::Active;
    } else if (t.status == TrackStatus::Tentative && t.hits >= cfg_.min_hits) {
        t.status = TrackStatus::Active;
    }
}

Track Tracker::spawn(const GaussianBox& d, bool activate) {
    Track t;
    t.id = next_id_++;
    std::optional<Mat4> r;
    if (cfg_.kfcov_init) r = measurement_cov(d);
    t.kf = kalman::init(geometry::tlbr_to_cah(d.mean), r, cfg_.noise);
    t.last_det = d;
    t.hits = 1;
    t.status = (activate || cfg_.min_hits <= 1) ? TrackStatus::Active : TrackStatus::Tentative;
    return t;
}

namespace {

bool usable(const GaussianBox& d) {
    return d.mean.valid() && d.mean.width() > 0.0 && d.mean.height() > geometry::kMinHeight &&
           std::isfinite(d.score) && d.cov.allFinite();
}

}  // namespace

FrameResult Tracker::step(const FrameDetections& frame) {
    if (started_ && frame.frame <= last_frame_) {
        throw Error("frame " + std::to_string(frame.frame) + " arrived after frame " + std::to_string(last_frame_));
    }
    const bool first_frame = !started_;
    started_ = true;
    last_frame_ = frame.frame;
    trace_ = {};

    const auto& dets = frame.dets;

    // (1) intake and first ellipse pass
    std::vector<std::size_t> high;
    std::vector<std::size_t> low;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        const auto& d = dets[i];
        if (!usable(d) || (cfg_.enable_ellipse && !probdet::passes_ellipse_filter(d, cfg_.tau1))) {
            trace_.rejected_intake.push_back(i);
            continue;
        }
        // (2) score split
        if (d.score > cfg_.score_high) {
            high.push_back(i);
        } else if (d.score > cfg_.score_low) {
            low.push_back(i);
        }
    }

    // (3) motion prediction
    for (auto& t : tracks_) t.kf = kalman::predict(t.kf, cfg_.noise);

    std::vector<bool> track_matched(tracks_.size(), false);
    std::vector<bool> det_matched(dets.size(), false);

    auto associate = [&](const std::vector<std::size_t>& track_idx, const std::vector<std::size_t>& det_idx,
                         double gate, auto& trace_out) {
        std::vector<BoxTlbr> tboxes;
        std::vector<int> tlabels;
        for (auto ti : track_idx) {
            tboxes.push_back(tracks_[ti].kf.box().to_tlbr());
            tlabels.push_back(tracks_[ti].last_det.label);
        }
        std::vector<BoxTlbr> dboxes;
        std::vector<int> dlabels;
        for (auto di : det_idx) {
            dboxes.push_back(dets[di].mean);
            dlabels.push_back(dets[di].label);
        }
        auto cost = assignment::iou_cost(tboxes, dboxes);
        assignment::forbid_label_mismatch(cost, tlabels, dlabels);
        const auto a = assignment::hungarian(cost, gate);
        for (const auto& [r, c] : a.pairs) {
            const std::size_t ti = track_idx[r];
            const std::size_t di = det_idx[c];
            track_matched[ti] = true;
            det_matched[di] = true;
            trace_out.emplace_back(tracks_[ti].id, di);
        }
    };

    auto remaining = [&](const std::vector<std::size_t>& idx, const std::vector<bool>& matched) {
        std::vector<std::size_t> out;
        for (auto i : idx)
            if (!matched[i]) out.push_back(i);
        return out;
    };

    std::vector<std::size_t> confirmed;
    std::vector<std::size_t> tentative;
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        if (tracks_[i].status == TrackStatus::Tentative) {
            tentative.push_back(i);
        } else {
            confirmed.push_back(i);
        }
    }

    // first association: confirmed tracks against the primary set
    associate(confirmed, high, cfg_.match_thr_1, trace_.stage1);
    // tentative tracks against what is left of the primary set
    associate(tentative, remaining(high, det_matched), cfg_.match_thr_tentative, trace_.tentative);

    // (4) second association: tracks that were tracked in the previous frame against the secondary set
    std::vector<std::size_t> recent;
    for (auto ti : remaining(confirmed, track_matched))
        if (tracks_[ti].status == TrackStatus::Active) recent.push_back(ti);
    associate(recent, low, cfg_.match_thr_2, trace_.stage2);

    std::vector<std::size_t> leftover = remaining(high, det_matched);

    // (5) second ellipse pass: only detections that pass it are enlarged and matched again
    std::vector<std::size_t> relaxable = leftover;
    if (cfg_.enable_ellipse) {
        relaxable.clear();
        for (auto di : leftover) {
            if (probdet::passes_ellipse_filter(dets[di], cfg_.tau2)) {
                relaxable.push_back(di);
            } else {
                trace_.rejected_second_pass.push_back(di);
            }
        }
    }

    // (6) relaxed matching on enlarged boxes
    if (cfg_.enable_relax) {
        const auto rtracks = remaining(confirmed, track_matched);
        if (!rtracks.empty() && !relaxable.empty()) {
            std::vector<BoxTlbr> tboxes;
            std::vector<int> tlabels;
            for (auto ti : rtracks) {
                tboxes.push_back(probdet::relax_box(tracks_[ti].last_det));
                tlabels.push_back(tracks_[ti].last_det.label);
            }
            std::vector<BoxTlbr> dboxes;
            std::vector<int> dlabels;
            std::vector<double> entropy;
            for (auto di : relaxable) {
                dboxes.push_back(probdet::relax_box(dets[di]));
                dlabels.push_back(dets[di].label);
                entropy.push_back(probdet::gaussian_entropy(dets[di]));
            }
            auto cost = assignment::giou_cost(tboxes, dboxes);
            assignment::forbid_label_mismatch(cost, tlabels, dlabels);
            const auto a = cfg_.enable_greedy ? assignment::greedy_by_priority(cost, entropy, cfg_.match_thr_relax)
                                              : assignment::hungarian(cost, cfg_.match_thr_relax);
            for (const auto& [r, c] : a.pairs) {
                track_matched[rtracks[r]] = true;
                det_matched[relaxable[c]] = true;
                trace_.relaxed.emplace_back(tracks_[rtracks[r]].id, relaxable[c]);
            }
            leftover = remaining(leftover, det_matched);
        }
    }

    // (7) measurement updates for every matched pair
    auto apply = [&](const auto& pairs) {
        for (const auto& [id, di] : pairs) {
            auto it = std::find_if(tracks_.begin(), tracks_.end(), [id = id](const Track& t) { return t.id == id; });
            update_track(*it, dets[di]);
        }
    };
    apply(trace_.stage1);
    apply(trace_.tentative);
    apply(trace_.stage2);
    apply(trace_.relaxed);

    // (8) lifecycle
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        if (track_matched[i]) continue;
        auto& t = tracks_[i];
        ++t.frames_since_update;
        if (t.status == TrackStatus::Tentative) {
            t.status = TrackStatus::Removed;
        } else if (t.status == TrackStatus::Active) {
            t.status = TrackStatus::Lost;
        }
        if (t.status == TrackStatus::Lost && t.frames_since_update > cfg_.max_lost) t.status = TrackStatus::Removed;
    }
    std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::Removed; });

    for (auto di : leftover) {
        tracks_.push_back(spawn(dets[di], first_frame));
        trace_.spawned.push_back(tracks_.back().id);
    }

    FrameResult out;
    out.frame = frame.frame;
    for (const auto& t : tracks_) {
        if (t.status != TrackStatus::Active || t.frames_since_update != 0) continue;
        out.outputs.push_back({t.id, t.kf.box().to_tlbr(), t.last_det.score, t.last_det.label});
    }
    return out;
}

std::vector<FrameResult> run_sequence(const Sequence& frames, const TrackerConfig& cfg) {
    Tracker tracker(cfg);
    std::vector<FrameResult> out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(tracker.step(f));
    return out;
}

}  // namespace utrack
