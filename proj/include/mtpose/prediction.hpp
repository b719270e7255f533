#pragma once

#include <optional>

#include "mtpose/geometry.hpp"

namespace mtpose {

/// One detected hand: box, 21 keypoints, optional confidence.
struct Detection {
    BoundingBox bbox;
    HandLandmarks keypoints;
    std::optional<double> confidence;

    bool operator==(const Detection&) const = default;
};

/// Adapter output for one test case. An empty optional is an explicit
/// no-detection and carries no geometry.
using Prediction = std::optional<Detection>;

}  // namespace mtpose
