#include "utrack/motmetrics.hpp"

#include <algorithm>

#include "utrack/assignment.hpp"
#include "utrack/error.hpp"

namespace utrack {

double MotTally::mota() const {
    if (gt_count == 0) return 0.0;
    return 1.0 - static_cast<double>(fp + fn + ids) / static_cast<double>(gt_count);
}

namespace motmetrics {

namespace {

struct AlignedFrame {
    int frame = 0;
    const std::vector<GtObject>* gt = nullptr;
    const std::vector<TrackOutput>* pred = nullptr;
};

std::vector<AlignedFrame> align(const GtSequence& gt, std::span<const FrameResult> pred) {
    static const std::vector<GtObject> no_gt;
    static const std::vector<TrackOutput> no_pred;
    std::map<int, AlignedFrame> frames;
    int first = 0;
    int last = -1;
    for (const auto& g : gt) {
        if (frames.empty() || g.frame < first) first = g.frame;
        last = std::max(last, g.frame);
        auto& f = frames[g.frame];
        f.frame = g.frame;
        if (f.gt != nullptr) throw Error("duplicate ground-truth frame " + std::to_string(g.frame));
        f.gt = &g.objects;
    }
    for (const auto& p : pred) {
        if (gt.empty() || p.frame < first || p.frame > last) {
            throw Error("prediction frame " + std::to_string(p.frame) + " outside the ground-truth frame range");
        }
        auto& f = frames[p.frame];
        f.frame = p.frame;
        if (f.pred != nullptr) throw Error("duplicate prediction frame " + std::to_string(p.frame));
        f.pred = &p.outputs;
    }
    std::vector<AlignedFrame> out;
    out.reserve(frames.size());
    for (auto& [k, f] : frames) {
        if (f.gt == nullptr) f.gt = &no_gt;
        if (f.pred == nullptr) f.pred = &no_pred;
        out.push_back(f);
    }
    return out;
}

}  // namespace

ClearMotResult clear_mot(const GtSequence& gt, std::span<const FrameResult> pred, double iou_thr) {
    ClearMotResult res;
    auto& tally = res.tally;
    std::map<std::int64_t, std::int64_t> previous;  // correspondences of the previous frame

    for (const auto& f : align(gt, pred)) {
        const auto& gts = *f.gt;
        const auto& preds = *f.pred;
        FrameEvents ev;
        ev.frame = f.frame;
        tally.gt_count += gts.size();

        std::vector<bool> gt_used(gts.size(), false);
        std::vector<bool> pred_used(preds.size(), false);

        // keep last frame's correspondences that are still valid
        for (std::size_t g = 0; g < gts.size(); ++g) {
            auto it = previous.find(gts[g].id);
            if (it == previous.end()) continue;
            for (std::size_t p = 0; p < preds.size(); ++p) {
                if (pred_used[p] || preds[p].id != it->second) continue;
                if (geometry::iou(gts[g].box, preds[p].box) >= iou_thr) {
                    gt_used[g] = true;
                    pred_used[p] = true;
                    ev.matches.emplace_back(g, p);
                }
                break;
            }
        }

        std::vector<std::size_t> free_gt;
        std::vector<std::size_t> free_pred;
        for (std::size_t g = 0; g < gts.size(); ++g)
            if (!gt_used[g]) free_gt.push_back(g);
        for (std::size_t p = 0; p < preds.size(); ++p)
            if (!pred_used[p]) free_pred.push_back(p);

        CostMatrix cost(static_cast<Eigen::Index>(free_gt.size()), static_cast<Eigen::Index>(free_pred.size()));
        for (int r = 0; r < cost.rows(); ++r) {
            for (int c = 0; c < cost.cols(); ++c) {
                const double overlap = geometry::iou(gts[free_gt[r]].box, preds[free_pred[c]].box);
                cost(r, c) = overlap >= iou_thr ? 1.0 - overlap : CostMatrix::kForbidden;
            }
        }
        const auto a = assignment::hungarian(cost, 1.0);
        for (const auto& [r, c] : a.pairs) ev.matches.emplace_back(free_gt[r], free_pred[c]);
        std::sort(ev.matches.begin(), ev.matches.end());

        std::map<std::int64_t, std::int64_t> current;
        for (const auto& [g, p] : ev.matches) {
            gt_used[g] = true;
            pred_used[p] = true;
            const auto gid = gts[g].id;
            const auto tid = preds[p].id;
            auto it = tally.last_match.find(gid);
            if (it != tally.last_match.end() && it->second != tid) {
                ++tally.ids;
                ev.switches.push_back(p);
            }
            tally.last_match[gid] = tid;
            current[gid] = tid;
        }
        for (std::size_t g = 0; g < gts.size(); ++g)
            if (!gt_used[g]) ev.misses.push_back(g);
        for (std::size_t p = 0; p < preds.size(); ++p)
            if (!pred_used[p]) ev.false_positives.push_back(p);

        tally.matches += ev.matches.size();
        tally.fn += ev.misses.size();
        tally.fp += ev.false_positives.size();
        previous = std::move(current);
        res.frames.push_back(std::move(ev));
    }
    return res;
}

Idf1Result idf1(const GtSequence& gt, std::span<const FrameResult> pred, double iou_thr) {
    std::map<std::int64_t, int> gt_index;
    std::map<std::int64_t, int> pred_index;
    std::size_t total_gt = 0;
    std::size_t total_pred = 0;
    const auto frames = align(gt, pred);
    for (const auto& f : frames) {
        for (const auto& g : *f.gt) gt_index.emplace(g.id, 0);
        for (const auto& p : *f.pred) pred_index.emplace(p.id, 0);
        total_gt += f.gt->size();
        total_pred += f.pred->size();
    }
    int k = 0;
    for (auto& [id, idx] : gt_index) idx = k++;
    k = 0;
    for (auto& [id, idx] : pred_index) idx = k++;

    Eigen::MatrixXd overlap_frames = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(gt_index.size()),
                                                           static_cast<Eigen::Index>(pred_index.size()));
    for (const auto& f : frames) {
        for (const auto& g : *f.gt) {
            for (const auto& p : *f.pred) {
                if (geometry::iou(g.box, p.box) >= iou_thr) overlap_frames(gt_index[g.id], pred_index[p.id]) += 1.0;
            }
        }
    }

    Idf1Result res;
    if (overlap_frames.size() > 0) {
        // every pair is feasible, so the assignment is complete and maximizes the overlap sum
        const auto a = assignment::hungarian(CostMatrix(-overlap_frames), 0.0);
        double idtp = 0.0;
        for (const auto& [r, c] : a.pairs) idtp += overlap_frames(r, c);
        res.idtp = static_cast<std::size_t>(idtp);
    }
    res.idfn = total_gt - res.idtp;
    res.idfp = total_pred - res.idtp;
    const std::size_t denom = total_gt + total_pred;
    res.idf1 = denom == 0 ? 0.0 : 2.0 * static_cast<double>(res.idtp) / static_cast<double>(denom);
    return res;
}

double multiclass_mean(const std::map<int, double>& per_class, const std::set<int>& present) {
    double sum = 0.0;
    std::size_t n = 0;
    for (int c : present) {
        auto it = per_class.find(c);
        if (it == per_class.end()) continue;
        sum += it->second;
        ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

GtSequence filter_label(const GtSequence& gt, int label) {
    GtSequence out;
    out.reserve(gt.size());
    for (const auto& f : gt) {
        GtFrame g{f.frame, {}};
        for (const auto& o : f.objects)
            if (o.label == label) g.objects.push_back(o);
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<FrameResult> filter_label(std::span<const FrameResult> pred, int label) {
    std::vector<FrameResult> out;
    out.reserve(pred.size());
    for (const auto& f : pred) {
        FrameResult r{f.frame, {}};
        for (const auto& o : f.outputs)
            if (o.label == label) r.outputs.push_back(o);
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

ClassMetrics metrics_for(const GtSequence& gt, std::span<const FrameResult> pred, double iou_thr) {
    ClassMetrics m;
    const auto cm = clear_mot(gt, pred, iou_thr);
    m.tally = cm.tally;
    m.mota = cm.mota();
    m.id = idf1(gt, pred, iou_thr);
    m.idf1 = m.id.idf1;
    return m;
}

}  // namespace

EvalReport evaluate(const GtSequence& gt, std::span<const FrameResult> pred, double iou_thr) {
    EvalReport report;
    std::set<int> present;
    for (const auto& f : gt)
        for (const auto& o : f.objects) present.insert(o.label);

    std::map<int, double> motas;
    std::map<int, double> idf1s;
    for (int label : present) {
        const auto m = metrics_for(filter_label(gt, label), filter_label(pred, label), iou_thr);
        motas[label] = m.mota;
        idf1s[label] = m.idf1;
        report.per_class[label] = m;
    }
    report.mmota = multiclass_mean(motas, present);
    report.midf1 = multiclass_mean(idf1s, present);
    report.overall = metrics_for(gt, pred, iou_thr);
    return report;
}

}  // namespace motmetrics
}  // namespace utrack
