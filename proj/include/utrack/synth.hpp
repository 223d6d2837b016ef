#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "utrack/motmetrics.hpp"
#include "utrack/tracker.hpp"

namespace utrack {

/// Constant-velocity object: initial top-left + size, velocity in px/frame.
struct ObjectSpec {
    double x = 0.0;
    double y = 0.0;
    double w = 10.0;
    double h = 10.0;
    double vx = 0.0;
    double vy = 0.0;
    int label = 0;
};

struct ScenarioSpec {
    std::string name = "custom";
    int n_objects = 5;
    int frame_count = 50;
    double image_w = 1280.0;
    double image_h = 720.0;
    /// Explicit layout; when empty, n_objects are drawn from the seed.
    std::vector<ObjectSpec> objects;
    double min_height = 60.0;
    double max_height = 160.0;
    double max_speed = 4.0;
    int n_labels = 1;

    /// Per-coordinate noise std: sigma_px + sigma_rel * height.
    double sigma_px = 2.0;
    double sigma_rel = 0.0;
    /// Variance multiplier while more than occlusion_overlap of the box is covered by a closer object.
    double occlusion_factor = 9.0;
    double occlusion_overlap = 0.5;
    /// Variance multiplier for boxes shorter than small_height (0 disables).
    double small_height = 0.0;
    double small_factor = 4.0;
    /// Declared covariance = miscalibration * generating covariance.
    double miscalibration = 1.0;

    double dropout = 0.0;
    /// Per-frame probability of one clutter detection.
    double clutter_rate = 0.0;
    double clutter_sigma = 30.0;

    double score_visible_min = 0.65;
    double score_visible_max = 1.0;
    double score_occluded_min = 0.15;
    double score_occluded_max = 0.55;

    std::uint64_t seed = 0;

    /// Throws utrack::Error when a field is out of range.
    void validate() const;
};

struct SynthOutput {
    GtSequence gt;
    Sequence dets;
};

namespace synth {

SynthOutput generate(const ScenarioSpec& spec);

/// Two identical objects on crossing paths with noise large enough that
/// consecutive detections intermittently barely overlap.
ScenarioSpec scenario_low_overlap_crossing();

/// Noise-free, clutter-free scene.
ScenarioSpec scenario_noiseless();

/// Member k (0-based, k < 10) of the comparison suite.
ScenarioSpec scenario_suite(int k);

/// 100 frames, 10 objects.
ScenarioSpec scenario_benchmark();

/// Named lookup used by the CLI: noiseless, low_overlap_crossing, benchmark, suite0..suite9.
ScenarioSpec named(const std::string& name);
std::vector<std::string> scenario_names();

}  // namespace synth
}  // namespace utrack
