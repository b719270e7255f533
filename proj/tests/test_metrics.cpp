#include <mtpose/metrics.hpp>

#include <vector>

#include <gtest/gtest.h>

#include "testutil.hpp"

using mtpose::BoundingBox;
using mtpose::ConfusionCounts;
using mtpose::Detection;
using mtpose::HandLandmarks;
using mtpose::Outcome;
using mtpose::Point;
using mtpose::Prediction;
using mtpose::Task;

namespace {

HandLandmarks shifted(const HandLandmarks& lm, double dx, double dy) {
    std::vector<Point> pts;
    for (const Point& p : lm) {
        pts.push_back({p.x + dx, p.y + dy});
    }
    return HandLandmarks::from_points(pts);
}

Prediction detection_for(const HandLandmarks& keypoints) {
    return Detection{tight_bbox(keypoints), keypoints, std::nullopt};
}

}  // namespace

TEST(IouTest, IdenticalBoxesRateOne) {
    const BoundingBox box{3.0, 4.0, 10.0, 12.0};
    EXPECT_DOUBLE_EQ(mtpose::iou(box, box), 1.0);
}

TEST(IouTest, DisjointBoxesRateZero) {
    EXPECT_DOUBLE_EQ(mtpose::iou({0, 0, 2, 2}, {5, 5, 8, 8}), 0.0);
    EXPECT_DOUBLE_EQ(mtpose::iou({0, 0, 2, 2}, {2, 0, 4, 2}), 0.0);  // touching edges
}

TEST(IouTest, KnownOverlap) {
    // 4x4 and 4x4 overlapping in a 2x4 strip: 8 / (16 + 16 - 8)
    EXPECT_DOUBLE_EQ(mtpose::iou({0, 0, 4, 4}, {2, 0, 6, 4}), 8.0 / 24.0);
}

TEST(IouTest, MatchesRasterOracleOnRandomIntegerBoxes) {
    mtpose::SplitMix64 rng(23);
    for (int rep = 0; rep < 300; ++rep) {
        auto make_box = [&rng] {
            const double x0 = static_cast<double>(rng.next_in(0, 62));
            const double y0 = static_cast<double>(rng.next_in(0, 62));
            const double x1 = static_cast<double>(rng.next_in(static_cast<int64_t>(x0) + 1, 63));
            const double y1 = static_cast<double>(rng.next_in(static_cast<int64_t>(y0) + 1, 63));
            return BoundingBox{x0, y0, x1, y1};
        };
        const BoundingBox a = make_box();
        const BoundingBox b = make_box();
        EXPECT_NEAR(mtpose::iou(a, b), testutil::iou_raster_oracle(a, b, 64), 1e-12);
    }
}

TEST(MeanEdTest, UniformShiftGivesItsNorm) {
    const HandLandmarks gt = testutil::grid_landmarks(10.0, 10.0);
    EXPECT_DOUBLE_EQ(mean_ed(shifted(gt, 3.0, 4.0), gt), 5.0);  // 3-4-5 triangle
    EXPECT_DOUBLE_EQ(mean_ed(gt, gt), 0.0);
}

TEST(ClassifyTest, NoDetectionIsFalseNegativeForBothTasks) {
    const HandLandmarks gt = testutil::grid_landmarks(10.0, 10.0);
    const auto result = classify(std::nullopt, gt);
    EXPECT_EQ(result.segmentation, Outcome::FN);
    EXPECT_EQ(result.localisation, Outcome::FN);
}

TEST(ClassifyTest, PerfectPredictionIsTruePositiveTwice) {
    const HandLandmarks gt = testutil::grid_landmarks(10.0, 10.0);
    const auto result = classify(detection_for(gt), gt);
    EXPECT_EQ(result.segmentation, Outcome::TP);
    EXPECT_EQ(result.localisation, Outcome::TP);
}

TEST(ClassifyTest, IouExactlyAtThresholdIsFalsePositive) {
    // gt box [0,0]x[20,20]; prediction box [0,0]x[10,20] -> IoU exactly 0.5
    const HandLandmarks gt = testutil::grid_landmarks(0.0, 0.0, 5.0, 5.0);
    ASSERT_DOUBLE_EQ(tight_bbox(gt).x_max, 20.0);
    ASSERT_DOUBLE_EQ(tight_bbox(gt).y_max, 20.0);
    const Prediction pred = Detection{{0.0, 0.0, 10.0, 20.0}, gt, std::nullopt};
    ASSERT_DOUBLE_EQ(mtpose::iou(pred.value().bbox, tight_bbox(gt)), 0.5);
    const auto result = classify(pred, gt);
    EXPECT_EQ(result.segmentation, Outcome::FP);
    EXPECT_EQ(result.localisation, Outcome::TP);  // keypoints are exact
    // nudge the overlap strictly above the threshold
    const Prediction wider = Detection{{0.0, 0.0, 10.5, 20.0}, gt, std::nullopt};
    EXPECT_EQ(classify(wider, gt).segmentation, Outcome::TP);
}

TEST(ClassifyTest, DistanceExactlyAtThresholdIsFalsePositive) {
    const HandLandmarks gt = testutil::grid_landmarks(30.0, 30.0);
    const HandLandmarks at10 = shifted(gt, 10.0, 0.0);
    const Prediction pred = Detection{tight_bbox(gt), at10, std::nullopt};
    ASSERT_DOUBLE_EQ(mean_ed(at10, gt), 10.0);
    const auto result = classify(pred, gt);
    EXPECT_EQ(result.localisation, Outcome::FP);
    EXPECT_EQ(result.segmentation, Outcome::TP);  // box is exact
    const HandLandmarks closer = shifted(gt, 9.99, 0.0);
    EXPECT_EQ(classify(Detection{tight_bbox(gt), closer, std::nullopt}, gt).localisation,
              Outcome::TP);
}

TEST(ClassifyTest, ThresholdsAreConfigurable) {
    const HandLandmarks gt = testutil::grid_landmarks(30.0, 30.0);
    const HandLandmarks at10 = shifted(gt, 10.0, 0.0);
    const Prediction pred = Detection{tight_bbox(gt), at10, std::nullopt};
    EXPECT_EQ(classify(pred, gt, 0.5, 10.5).localisation, Outcome::TP);
    EXPECT_THROW(classify(pred, gt, 0.0, 10.0), mtpose::ConfigError);
    EXPECT_THROW(classify(pred, gt, 0.5, -1.0), mtpose::ConfigError);
}

TEST(AccumulateTest, CountsEachOutcomeKind) {
    const std::vector<Outcome> outcomes{Outcome::TP, Outcome::TP, Outcome::FP, Outcome::FN,
                                        Outcome::TP};
    const ConfusionCounts counts = mtpose::accumulate(outcomes);
    EXPECT_EQ(counts.tp, 3);
    EXPECT_EQ(counts.fp, 1);
    EXPECT_EQ(counts.fn, 1);
    EXPECT_EQ(counts.total(), 5);
}

TEST(AccumulateTest, MergeIsOrderIndependent) {
    mtpose::SplitMix64 rng(29);
    std::vector<Outcome> all;
    for (int i = 0; i < 60; ++i) {
        all.push_back(static_cast<Outcome>(rng.next_in(0, 2)));
    }
    const ConfusionCounts whole = mtpose::accumulate(all);
    ConfusionCounts pieces;
    std::span<const Outcome> span(all);
    pieces += mtpose::accumulate(span.subspan(0, 20));
    pieces += mtpose::accumulate(span.subspan(20, 25));
    pieces += mtpose::accumulate(span.subspan(45));
    EXPECT_EQ(pieces, whole);
}

TEST(DeriveTest, TextbookRatios) {
    const auto rec = mtpose::derive("m", "BASELINE", Task::Segmentation, {90, 0, 10});
    EXPECT_DOUBLE_EQ(rec.precision, 1.0);
    EXPECT_DOUBLE_EQ(rec.recall, 0.9);
    EXPECT_NEAR(rec.f1, 0.9473684210526316, 1e-15);
}

TEST(DeriveTest, ZeroDenominatorsMapToZero) {
    const auto none = mtpose::derive("m", "TC2", Task::Localisation, {0, 0, 0});
    EXPECT_DOUBLE_EQ(none.precision, 0.0);
    EXPECT_DOUBLE_EQ(none.recall, 0.0);
    EXPECT_DOUBLE_EQ(none.f1, 0.0);
    const auto all_fn = mtpose::derive("m", "TC2", Task::Localisation, {0, 0, 7});
    EXPECT_DOUBLE_EQ(all_fn.precision, 0.0);
    EXPECT_DOUBLE_EQ(all_fn.recall, 0.0);
    EXPECT_DOUBLE_EQ(all_fn.f1, 0.0);
    const auto all_fp = mtpose::derive("m", "TC2", Task::Segmentation, {0, 4, 0});
    EXPECT_DOUBLE_EQ(all_fp.precision, 0.0);
    EXPECT_DOUBLE_EQ(all_fp.recall, 0.0);
    EXPECT_DOUBLE_EQ(all_fp.f1, 0.0);
}

TEST(DeriveTest, PerfectCellIsAllOnes) {
    const auto rec = mtpose::derive("m", "TC7", Task::Segmentation, {25, 0, 0});
    EXPECT_DOUBLE_EQ(rec.precision, 1.0);
    EXPECT_DOUBLE_EQ(rec.recall, 1.0);
    EXPECT_DOUBLE_EQ(rec.f1, 1.0);
}

TEST(TaskTest, StringRoundTrip) {
    EXPECT_EQ(to_string(Task::Segmentation), "segmentation");
    EXPECT_EQ(to_string(Task::Localisation), "localisation");
    EXPECT_EQ(mtpose::task_from_string("segmentation"), Task::Segmentation);
    EXPECT_EQ(mtpose::task_from_string("localisation"), Task::Localisation);
    EXPECT_THROW(mtpose::task_from_string("detection"), mtpose::ParseError);
}
