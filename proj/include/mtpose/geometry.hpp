#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "mtpose/error.hpp"

namespace mtpose {

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

/// Axis-aligned box in pixel coordinates, continuous.
struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }

    bool operator==(const BoundingBox&) const = default;
};

/// 21 ordered keypoints annotating one hand.
///
/// Index semantics are fixed:
///   0      wrist
///   1..4   thumb
///   5..8   index finger
///   9..12  middle finger
///   13..16 ring finger
///   17..20 pinky
class HandLandmarks {
public:
    static constexpr std::size_t kCount = 21;

    HandLandmarks() = default;
    explicit HandLandmarks(const std::array<Point, kCount>& points) : points_(points) {}

    /// Validating constructor for externally supplied annotations.
    static HandLandmarks from_points(const std::vector<Point>& points) {
        if (points.size() != kCount) {
            throw ValidationError("hand annotation must have exactly 21 keypoints, got " +
                                  std::to_string(points.size()));
        }
        HandLandmarks lm;
        std::copy(points.begin(), points.end(), lm.points_.begin());
        return lm;
    }

    const Point& operator[](std::size_t i) const { return points_[i]; }
    Point& operator[](std::size_t i) { return points_[i]; }

    const std::array<Point, kCount>& points() const { return points_; }

    auto begin() const { return points_.begin(); }
    auto end() const { return points_.end(); }

    bool operator==(const HandLandmarks&) const = default;

private:
    std::array<Point, kCount> points_{};
};

enum class Finger { Thumb, Index, Middle, Ring, Pinky };

constexpr std::size_t kWristIndex = 0;

/// The four landmark indices belonging to one finger.
inline std::array<int, 4> finger_indices(Finger f) {
    const int base = 1 + 4 * static_cast<int>(f);
    return {base, base + 1, base + 2, base + 3};
}

/// Tightest box enclosing all 21 keypoints.
inline BoundingBox tight_bbox(const HandLandmarks& lm) {
    BoundingBox box{lm[0].x, lm[0].y, lm[0].x, lm[0].y};
    for (const Point& p : lm) {
        box.x_min = std::min(box.x_min, p.x);
        box.y_min = std::min(box.y_min, p.y);
        box.x_max = std::max(box.x_max, p.x);
        box.y_max = std::max(box.y_max, p.y);
    }
    return box;
}

}  // namespace mtpose
