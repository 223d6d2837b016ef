#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "utrack/tracker.hpp"

namespace utrack {

struct GtObject {
    std::int64_t id = 0;
    BoxTlbr box;
    int label = 0;
    bool visible = true;
};

struct GtFrame {
    int frame = 1;
    std::vector<GtObject> objects;
};

using GtSequence = std::vector<GtFrame>;

/// Per-frame outcome of the CLEAR MOT matching, as indices into the frame's gt and prediction lists.
struct FrameEvents {
    int frame = 0;
    std::vector<std::pair<std::size_t, std::size_t>> matches;  // (gt, pred)
    std::vector<std::size_t> false_positives;                  // pred
    std::vector<std::size_t> misses;                           // gt
    std::vector<std::size_t> switches;                         // pred indices whose match changed identity
};

struct MotTally {
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t ids = 0;
    std::size_t matches = 0;
    std::size_t gt_count = 0;
    std::map<std::int64_t, std::int64_t> last_match;  // gt id -> most recent track id

    double mota() const;
};

struct ClearMotResult {
    MotTally tally;
    std::vector<FrameEvents> frames;

    double mota() const { return tally.mota(); }
};

struct Idf1Result {
    double idf1 = 0.0;
    std::size_t idtp = 0;
    std::size_t idfp = 0;
    std::size_t idfn = 0;
};

namespace motmetrics {

inline constexpr double kDefaultIouThreshold = 0.5;

/// CLEAR MOT over the gt frame range. Throws utrack::Error when a prediction
/// frame falls outside the ground-truth frame range.
ClearMotResult clear_mot(const GtSequence& gt, std::span<const FrameResult> pred,
                         double iou_thr = kDefaultIouThreshold);

/// Identity F1 from the global one-to-one trajectory matching that maximizes
/// the number of frames on which matched trajectories overlap at iou_thr.
Idf1Result idf1(const GtSequence& gt, std::span<const FrameResult> pred, double iou_thr = kDefaultIouThreshold);

/// Unweighted mean of per-class values over the classes in `present`; other keys are ignored.
double multiclass_mean(const std::map<int, double>& per_class, const std::set<int>& present);

struct ClassMetrics {
    double mota = 0.0;
    double idf1 = 0.0;
    MotTally tally;
    Idf1Result id;
};

struct EvalReport {
    std::map<int, ClassMetrics> per_class;  // classes present in gt
    double mmota = 0.0;
    double midf1 = 0.0;
    ClassMetrics overall;  // all classes pooled, labels ignored
};

GtSequence filter_label(const GtSequence& gt, int label);
std::vector<FrameResult> filter_label(std::span<const FrameResult> pred, int label);

EvalReport evaluate(const GtSequence& gt, std::span<const FrameResult> pred, double iou_thr = kDefaultIouThreshold);

}  // namespace motmetrics
}  // namespace utrack
