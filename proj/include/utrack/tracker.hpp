#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "utrack/kalman.hpp"
#include "utrack/probdet.hpp"

namespace utrack {

struct FrameDetections {
    int frame = 1;
    std::vector<GaussianBox> dets;
};

using Sequence = std::vector<FrameDetections>;

enum class TrackStatus { Tentative, Active, Lost, Removed };

const char* to_string(TrackStatus s);

struct Track {
    std::int64_t id = 0;
    KfState kf;
    GaussianBox last_det;
    TrackStatus status = TrackStatus::Tentative;
    int frames_since_update = 0;
    int hits = 0;
};

/// Every threshold of the two-stage associator plus the four uncertainty
/// extensions. The defaults are the full pipeline; base() turns every extension off.
struct TrackerConfig {
    // ellipse filter ratios for the intake pass and the pass before relaxed matching
    double tau1 = 0.65;
    double tau2 = 0.3;
    // score split between the primary and secondary detection sets
    double score_high = 0.6;
    double score_low = 0.1;
    // cost gates: 1 - IoU for the first, tentative and second stages, 1 - GIoU for the relaxed one
    double match_thr_1 = 0.9;
    double match_thr_tentative = 0.7;
    double match_thr_2 = 0.5;
    double match_thr_relax = 0.8;
    int max_lost = 30;
    int min_hits = 2;

    bool enable_kfcov = true;
    bool enable_ellipse = true;
    bool enable_relax = true;
    bool enable_greedy = true;
    // adds the detection covariance to the initial position covariance of new tracks (kfcov mode only)
    bool kfcov_init = true;

    KalmanNoise noise;

    static TrackerConfig base();
    static TrackerConfig full() { return {}; }

    /// Throws utrack::Error on out-of-range values.
    void validate() const;
};

struct TrackOutput {
    std::int64_t id = 0;
    BoxTlbr box;
    double score = 0.0;
    int label = 0;
};

struct FrameResult {
    int frame = 0;
    std::vector<TrackOutput> outputs;  // ascending id
};

/// Which (track id, detection index) pairs each stage produced in the last step.
/// Detection indices refer to the incoming frame's detection list.
struct StepTrace {
    std::vector<std::pair<std::int64_t, std::size_t>> stage1;
    std::vector<std::pair<std::int64_t, std::size_t>> tentative;
    std::vector<std::pair<std::int64_t, std::size_t>> stage2;
    std::vector<std::pair<std::int64_t, std::size_t>> relaxed;
    std::vector<std::size_t> rejected_intake;  // failed validity or the first ellipse pass
    std::vector<std::size_t> rejected_second_pass;  // kept out of relaxed matching, may still spawn
    std::vector<std::int64_t> spawned;
};

/// Online tracking-by-detection state machine for one sequence.
class Tracker {
public:
    explicit Tracker(TrackerConfig cfg);

    /// Frames must arrive with strictly increasing indices; throws otherwise.
    FrameResult step(const FrameDetections& frame);

    const std::vector<Track>& tracks() const { return tracks_; }
    const StepTrace& last_trace() const { return trace_; }
    const TrackerConfig& config() const { return cfg_; }
    /// Detections that asked for covariance-aware updates but carried no covariance.
    std::size_t covariance_fallbacks() const { return cov_fallbacks_; }

private:
    std::optional<Mat4> measurement_cov(const GaussianBox& d);
    void update_track(Track& t, const GaussianBox& d);
    Track spawn(const GaussianBox& d, bool activate);

    TrackerConfig cfg_;
    std::vector<Track> tracks_;
    std::int64_t next_id_ = 1;
    int last_frame_ = 0;
    bool started_ = false;
    std::size_t cov_fallbacks_ = 0;
    StepTrace trace_;
};

std::vector<FrameResult> run_sequence(const Sequence& frames, const TrackerConfig& cfg);

}  // namespace utrack
