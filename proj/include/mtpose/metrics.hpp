#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "mtpose/error.hpp"
#include "mtpose/geometry.hpp"
#include "mtpose/prediction.hpp"

namespace mtpose {

/// TP / FP / FN tallies for one (model, test-case group, task) cell.
/// There is no true-negative slot: every test image contains a hand, so no
/// outcome can be a true negative.
struct ConfusionCounts {
    long tp = 0;
    long fp = 0;
    long fn = 0;

    long total() const { return tp + fp + fn; }

    ConfusionCounts& operator+=(const ConfusionCounts& other) {
        tp += other.tp;
        fp += other.fp;
        fn += other.fn;
        return *this;
    }

    bool operator==(const ConfusionCounts&) const = default;
};

enum class Task { Segmentation, Localisation };

inline std::string to_string(Task t) {
    return t == Task::Segmentation ? "segmentation" : "localisation";
}

inline Task task_from_string(const std::string& s) {
    if (s == "segmentation") return Task::Segmentation;
    if (s == "localisation") return Task::Localisation;
    throw ParseError("unknown task '" + s + "'");
}

enum class Outcome { TP, FP, FN };

inline std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::TP: return "TP";
        case Outcome::FP: return "FP";
        default: return "FN";
    }
}

inline Outcome outcome_from_string(const std::string& s) {
    if (s == "TP") return Outcome::TP;
    if (s == "FP") return Outcome::FP;
    if (s == "FN") return Outcome::FN;
    throw ParseError("unknown outcome '" + s + "'");
}

/// Intersection over union of two boxes. Coincident zero-area boxes rate 1,
/// disjoint degenerate boxes rate 0.
inline double iou(const BoundingBox& a, const BoundingBox& b) {
    const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    const double inter = std::max(0.0, ix) * std::max(0.0, iy);
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) {
        return a == b ? 1.0 : 0.0;
    }
    return inter / uni;
}

/// Mean Euclidean distance over the 21 index-matched keypoint pairs.
inline double mean_ed(const HandLandmarks& pred, const HandLandmarks& gt) {
    double sum = 0.0;
    for (std::size_t i = 0; i < HandLandmarks::kCount; ++i) {
        const double dx = pred[i].x - gt[i].x;
        const double dy = pred[i].y - gt[i].y;
        sum += std::sqrt(dx * dx + dy * dy);
    }
    return sum / static_cast<double>(HandLandmarks::kCount);
}

struct ClassifyResult {
    Outcome segmentation;
    Outcome localisation;
};

/// Score one prediction against ground truth.
///
/// No detection counts as FN for both tasks. A detection is a segmentation
/// TP iff IoU with the tightest ground-truth box is strictly above the
/// threshold, and a localisation TP iff the mean keypoint distance is
/// strictly below the threshold; otherwise FP.
inline ClassifyResult classify(const Prediction& pred, const HandLandmarks& gt,
                               double iou_threshold = 0.5, double ed_threshold = 10.0) {
    if (!(iou_threshold > 0) || !(ed_threshold > 0)) {
        throw ConfigError("classification thresholds must be positive");
    }
    if (!pred.has_value()) {
        return {Outcome::FN, Outcome::FN};
    }
    const double overlap = iou(pred->bbox, tight_bbox(gt));
    const double dist = mean_ed(pred->keypoints, gt);
    return {overlap > iou_threshold ? Outcome::TP : Outcome::FP,
            dist < ed_threshold ? Outcome::TP : Outcome::FP};
}

inline ConfusionCounts accumulate(std::span<const Outcome> outcomes) {
    ConfusionCounts counts;
    for (Outcome o : outcomes) {
        switch (o) {
            case Outcome::TP: ++counts.tp; break;
            case Outcome::FP: ++counts.fp; break;
            case Outcome::FN: ++counts.fn; break;
        }
    }
    return counts;
}

/// Confusion counts plus the derived ratios for one cell.
struct MetricRecord {
    std::string model;
    std::string tc_id;
    Task task = Task::Segmentation;
    ConfusionCounts counts;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Derive precision/recall/F1 with zero denominators mapping to 0.
inline MetricRecord derive(const std::string& model, const std::string& tc_id, Task task,
                           const ConfusionCounts& counts) {
    MetricRecord rec;
    rec.model = model;
    rec.tc_id = tc_id;
    rec.task = task;
    rec.counts = counts;
    rec.precision = (counts.tp + counts.fp) > 0
                        ? static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fp)
                        : 0.0;
    rec.recall = (counts.tp + counts.fn) > 0
                     ? static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn)
                     : 0.0;
    const double sum = rec.precision + rec.recall;
    rec.f1 = sum > 0 ? 2.0 * rec.precision * rec.recall / sum : 0.0;
    return rec;
}

}  // namespace mtpose
