#include "utrack/synth.hpp"

#include <algorithm>
#include <cmath>

#include "utrack/error.hpp"
#include "utrack/rng.hpp"

namespace utrack {

void ScenarioSpec::validate() const {
    auto unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    if (frame_count < 1) throw Error("scenario: frame_count must be at least 1");
    if (objects.empty() && n_objects < 0) throw Error("scenario: n_objects must be non-negative");
    if (!(image_w > 0.0) || !(image_h > 0.0)) throw Error("scenario: image size must be positive");
    if (!unit(dropout) || !unit(clutter_rate) || !unit(occlusion_overlap))
        throw Error("scenario: rates must lie in [0, 1]");
    if (sigma_px < 0.0 || sigma_rel < 0.0 || clutter_sigma < 0.0) throw Error("scenario: noise must be non-negative");
    if (occlusion_factor < 1.0 || small_factor < 1.0 || !(miscalibration > 0.0))
        throw Error("scenario: inflation factors must be >= 1 and miscalibration > 0");
    if (!(min_height > 0.0) || max_height < min_height) throw Error("scenario: need 0 < min_height <= max_height");
    if (n_labels < 1) throw Error("scenario: n_labels must be at least 1");
    for (const auto& o : objects)
        if (!(o.w > 0.0) || !(o.h > 0.0)) throw Error("scenario: object sizes must be positive");
}

namespace synth {

namespace {

std::vector<ObjectSpec> layout(const ScenarioSpec& spec, Rng& rng) {
    if (!spec.objects.empty()) return spec.objects;
    std::vector<ObjectSpec> objs;
    for (int i = 0; i < spec.n_objects; ++i) {
        ObjectSpec o;
        o.h = rng.uniform(spec.min_height, spec.max_height);
        o.w = o.h * rng.uniform(0.4, 1.0);
        o.x = rng.uniform(0.0, std::max(0.0, spec.image_w - o.w));
        o.y = rng.uniform(0.0, std::max(0.0, spec.image_h - o.h));
        o.vx = rng.uniform(-spec.max_speed, spec.max_speed);
        o.vy = rng.uniform(-spec.max_speed, spec.max_speed) * 0.5;
        o.label = i % spec.n_labels;
        objs.push_back(o);
    }
    return objs;
}

}  // namespace

SynthOutput generate(const ScenarioSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const auto objs = layout(spec, rng);
    const BoxTlbr image{0.0, 0.0, spec.image_w, spec.image_h};

    SynthOutput out;
    out.gt.reserve(spec.frame_count);
    out.dets.reserve(spec.frame_count);
    for (int f = 1; f <= spec.frame_count; ++f) {
        const double t = static_cast<double>(f - 1);
        GtFrame gframe{f, {}};
        for (std::size_t i = 0; i < objs.size(); ++i) {
            const auto& o = objs[i];
            const BoxTlbr b = BoxTlbr::from_xywh(o.x + o.vx * t, o.y + o.vy * t, o.w, o.h);
            const BoxTlbr clipped{std::clamp(b.x1, image.x1, image.x2), std::clamp(b.y1, image.y1, image.y2),
                                  std::clamp(b.x2, image.x1, image.x2), std::clamp(b.y2, image.y1, image.y2)};
            if (clipped.width() < 1.0 || clipped.height() < 1.0) continue;
            gframe.objects.push_back({static_cast<std::int64_t>(i + 1), clipped, o.label, true});
        }

        FrameDetections dframe{f, {}};
        const auto& gobjs = gframe.objects;
        for (std::size_t i = 0; i < gobjs.size(); ++i) {
            const BoxTlbr& g = gobjs[i].box;
            bool occluded = false;
            for (std::size_t j = 0; j < gobjs.size() && !occluded; ++j) {
                if (j == i) continue;
                const BoxTlbr& other = gobjs[j].box;
                const bool closer = other.y2 > g.y2 || (other.y2 == g.y2 && j > i);
                if (closer && geometry::intersection_area(g, other) > spec.occlusion_overlap * g.area())
                    occluded = true;
            }
            double var_scale = 1.0;
            if (occluded) var_scale *= spec.occlusion_factor;
            if (spec.small_height > 0.0 && g.height() < spec.small_height) var_scale *= spec.small_factor;
            const double sd = (spec.sigma_px + spec.sigma_rel * g.height()) * std::sqrt(var_scale);

            const bool dropped = rng.bernoulli(spec.dropout);
            const Vec4 noise = rng.normal_vec<4>();
            const double score = occluded ? rng.uniform(spec.score_occluded_min, spec.score_occluded_max)
                                          : rng.uniform(spec.score_visible_min, spec.score_visible_max);
            if (dropped) continue;

            GaussianBox d;
            d.mean = geometry::sorted_corners(BoxTlbr::from_vec(g.vec() + sd * noise));
            d.cov = (spec.miscalibration * sd * sd) * Mat4::Identity();
            d.score = score;
            d.label = gobjs[i].label;
            dframe.dets.push_back(d);
        }

        if (rng.bernoulli(spec.clutter_rate)) {
            GaussianBox c;
            const double h = rng.uniform(spec.min_height, spec.max_height);
            const double w = h * rng.uniform(0.4, 1.0);
            const double x = rng.uniform(0.0, std::max(0.0, spec.image_w - w));
            const double y = rng.uniform(0.0, std::max(0.0, spec.image_h - h));
            c.mean = BoxTlbr::from_xywh(x, y, w, h);
            c.cov = (spec.clutter_sigma * spec.clutter_sigma) * Mat4::Identity();
            c.score = rng.uniform(spec.score_visible_min, spec.score_visible_max);
            c.label = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.n_labels)));
            dframe.dets.push_back(c);
        }

        out.gt.push_back(std::move(gframe));
        out.dets.push_back(std::move(dframe));
    }
    return out;
}

ScenarioSpec scenario_noiseless() {
    ScenarioSpec s;
    s.name = "noiseless";
    s.n_objects = 5;
    s.frame_count = 60;
    s.sigma_px = 0.0;
    s.max_speed = 3.0;
    s.seed = 7;
    return s;
}

ScenarioSpec scenario_low_overlap_crossing() {
    ScenarioSpec s;
    s.name = "low_overlap_crossing";
    s.frame_count = 60;
    s.image_w = 640.0;
    s.image_h = 360.0;
    s.objects = {
        {40.0, 140.0, 24.0, 48.0, 9.0, 0.0, 0},
        {560.0, 150.0, 24.0, 48.0, -9.0, 0.0, 0},
    };
    s.n_objects = 2;
    s.sigma_px = 8.0;
    s.seed = 24;
    return s;
}

ScenarioSpec scenario_suite(int k) {
    if (k < 0 || k > 9) throw Error("suite index must be in [0, 9]");
    ScenarioSpec s;
    s.name = "suite" + std::to_string(k);
    s.n_objects = 12 + k % 3;
    s.frame_count = 80;
    s.image_w = 960.0;
    s.image_h = 540.0;
    s.min_height = 60.0;
    s.max_height = 160.0;
    s.max_speed = 8.0;
    s.sigma_px = 1.0;
    s.sigma_rel = 0.04;
    s.occlusion_factor = 4.0;
    s.clutter_rate = 0.2;
    s.dropout = 0.1;
    s.seed = 1000 + static_cast<std::uint64_t>(k);
    return s;
}

ScenarioSpec scenario_benchmark() {
    ScenarioSpec s;
    s.name = "benchmark";
    s.n_objects = 10;
    s.frame_count = 100;
    s.sigma_px = 2.0;
    s.clutter_rate = 0.3;
    s.dropout = 0.05;
    s.n_labels = 2;
    s.seed = 2024;
    return s;
}

ScenarioSpec named(const std::string& name) {
    if (name == "noiseless") return scenario_noiseless();
    if (name == "low_overlap_crossing") return scenario_low_overlap_crossing();
    if (name == "benchmark") return scenario_benchmark();
    if (name.size() == 6 && name.rfind("suite", 0) == 0 && name[5] >= '0' && name[5] <= '9')
        return scenario_suite(name[5] - '0');
    throw Error("unknown scenario '" + name + "'");
}

std::vector<std::string> scenario_names() {
    std::vector<std::string> names{"noiseless", "low_overlap_crossing", "benchmark"};
    for (int k = 0; k < 10; ++k) names.push_back("suite" + std::to_string(k));
    return names;
}

}  // namespace synth
}  // namespace utrack
