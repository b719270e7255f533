#include <mtpose/geometry.hpp>

#include <algorithm>
#include <vector>

#include <gtest/gtest.h>

#include "testutil.hpp"

using mtpose::BoundingBox;
using mtpose::Finger;
using mtpose::HandLandmarks;
using mtpose::Point;

TEST(BoundingBoxTest, WidthHeightArea) {
    const BoundingBox box{1.0, 2.0, 4.0, 8.0};
    EXPECT_DOUBLE_EQ(box.width(), 3.0);
    EXPECT_DOUBLE_EQ(box.height(), 6.0);
    EXPECT_DOUBLE_EQ(box.area(), 18.0);
}

TEST(HandLandmarksTest, RequiresExactly21Points) {
    std::vector<Point> pts(20, Point{0.0, 0.0});
    EXPECT_THROW(HandLandmarks::from_points(pts), mtpose::ValidationError);
    pts.resize(22, Point{0.0, 0.0});
    EXPECT_THROW(HandLandmarks::from_points(pts), mtpose::ValidationError);
    pts.resize(21);
    EXPECT_NO_THROW(HandLandmarks::from_points(pts));
}

TEST(HandLandmarksTest, PreservesOrderAndValues) {
    std::vector<Point> pts;
    for (int i = 0; i < 21; ++i) {
        pts.push_back({static_cast<double>(i), static_cast<double>(2 * i)});
    }
    const HandLandmarks lm = HandLandmarks::from_points(pts);
    for (std::size_t i = 0; i < HandLandmarks::kCount; ++i) {
        EXPECT_DOUBLE_EQ(lm[i].x, static_cast<double>(i));
        EXPECT_DOUBLE_EQ(lm[i].y, static_cast<double>(2 * i));
    }
}

TEST(FingerIndicesTest, FourConsecutiveJointsPerFinger) {
    EXPECT_EQ(finger_indices(Finger::Thumb), (std::array<int, 4>{1, 2, 3, 4}));
    EXPECT_EQ(finger_indices(Finger::Index), (std::array<int, 4>{5, 6, 7, 8}));
    EXPECT_EQ(finger_indices(Finger::Middle), (std::array<int, 4>{9, 10, 11, 12}));
    EXPECT_EQ(finger_indices(Finger::Ring), (std::array<int, 4>{13, 14, 15, 16}));
    EXPECT_EQ(finger_indices(Finger::Pinky), (std::array<int, 4>{17, 18, 19, 20}));
}

TEST(FingerIndicesTest, FingersPartitionAllNonWristLandmarks) {
    std::vector<int> seen;
    for (Finger f :
         {Finger::Thumb, Finger::Index, Finger::Middle, Finger::Ring, Finger::Pinky}) {
        for (int i : finger_indices(f)) {
            seen.push_back(i);
        }
    }
    std::sort(seen.begin(), seen.end());
    std::vector<int> expected;
    for (int i = 1; i <= 20; ++i) {
        expected.push_back(i);
    }
    EXPECT_EQ(seen, expected);
}

TEST(TightBboxTest, MatchesBruteForceMinMax) {
    mtpose::SplitMix64 rng(7);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<Point> pts;
        for (int i = 0; i < 21; ++i) {
            pts.push_back({static_cast<double>(rng.next_in(-100, 100)) / 3.0,
                           static_cast<double>(rng.next_in(-100, 100)) / 7.0});
        }
        const HandLandmarks lm = HandLandmarks::from_points(pts);
        double x_min = pts[0].x, x_max = pts[0].x, y_min = pts[0].y, y_max = pts[0].y;
        for (const Point& p : pts) {
            x_min = std::min(x_min, p.x);
            x_max = std::max(x_max, p.x);
            y_min = std::min(y_min, p.y);
            y_max = std::max(y_max, p.y);
        }
        const BoundingBox box = tight_bbox(lm);
        EXPECT_DOUBLE_EQ(box.x_min, x_min);
        EXPECT_DOUBLE_EQ(box.x_max, x_max);
        EXPECT_DOUBLE_EQ(box.y_min, y_min);
        EXPECT_DOUBLE_EQ(box.y_max, y_max);
    }
}

TEST(TightBboxTest, EveryLandmarkInsideItsBox) {
    const HandLandmarks lm = testutil::grid_landmarks(5.0, 6.0);
    const BoundingBox box = tight_bbox(lm);
    for (const Point& p : lm) {
        EXPECT_GE(p.x, box.x_min);
        EXPECT_LE(p.x, box.x_max);
        EXPECT_GE(p.y, box.y_min);
        EXPECT_LE(p.y, box.y_max);
    }
}
