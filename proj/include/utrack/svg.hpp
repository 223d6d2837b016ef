#pragma once

#include <span>
#include <string>

#include "utrack/motmetrics.hpp"

namespace utrack::svg {

// Box colors of the error legend.
inline constexpr const char* kColorMiss = "orange";    // false negative (gt box)
inline constexpr const char* kColorFalsePos = "red";   // false positive (track box)
inline constexpr const char* kColorSwitch = "blue";    // identity switch (track box)
inline constexpr const char* kColorCorrect = "gray";   // correctly tracked / plain detection
inline constexpr const char* kColorEllipse = "green";  // 95% corner ellipses

struct Scene {
    double width = 1280.0;
    double height = 720.0;
    int frame = 0;
    /// Probabilistic detections: corner ellipses always, boxes only when no evaluation layer is drawn.
    std::span<const GaussianBox> dets;
    /// Evaluation layer: gt, predictions, and the frame's CLEAR MOT events indexing into them.
    std::span<const GtObject> gt;
    std::span<const TrackOutput> pred;
    const FrameEvents* events = nullptr;
};

std::string render(const Scene& scene);

}  // namespace utrack::svg
