#include <mtpose/preprocess.hpp>

#include <gtest/gtest.h>

#include "testutil.hpp"

using mtpose::HandLandmarks;
using mtpose::ImageBuffer;
using mtpose::Point;
using mtpose::Sample;

TEST(CropTest, PatchIsSquareAndScaledToTheHand) {
    const ImageBuffer img = testutil::patterned_image(200, 160, 3);
    // grid spans 40 x 36, so max dimension 40 and default scale 2.2 -> 88
    const HandLandmarks lm = testutil::grid_landmarks(80.0, 60.0);
    const Sample patch = crop_square_patch(img, lm);
    EXPECT_EQ(patch.image.width(), 88);
    EXPECT_EQ(patch.image.height(), 88);
}

TEST(CropTest, LandmarksShiftWithTheOrigin) {
    const ImageBuffer img = testutil::patterned_image(200, 160, 3);
    const HandLandmarks lm = testutil::grid_landmarks(80.0, 60.0);
    const Sample patch = crop_square_patch(img, lm);
    // all pairwise offsets survive, and interior pixels are copied verbatim
    const double dx = lm[0].x - patch.landmarks[0].x;
    const double dy = lm[0].y - patch.landmarks[0].y;
    for (std::size_t i = 0; i < HandLandmarks::kCount; ++i) {
        EXPECT_DOUBLE_EQ(lm[i].x - patch.landmarks[i].x, dx);
        EXPECT_DOUBLE_EQ(lm[i].y - patch.landmarks[i].y, dy);
    }
    const int ox = static_cast<int>(dx);
    const int oy = static_cast<int>(dy);
    const int px = static_cast<int>(patch.landmarks[0].x);
    const int py = static_cast<int>(patch.landmarks[0].y);
    EXPECT_EQ(patch.image.at(px, py, 1), img.at(px + ox, py + oy, 1));
}

TEST(CropTest, OutOfBoundsRegionsAreZeroFilled) {
    const ImageBuffer img = testutil::patterned_image(60, 60, 3);
    // hand in the top-left corner: the patch extends past the image
    const HandLandmarks lm = testutil::grid_landmarks(2.0, 2.0);
    const Sample patch = crop_square_patch(img, lm);
    EXPECT_EQ(patch.image.at(0, 0, 0), 0);
    EXPECT_EQ(patch.image.at(0, 0, 2), 0);
}

TEST(CropTest, DegenerateHandRejected) {
    const ImageBuffer img = testutil::patterned_image(60, 60, 3);
    const HandLandmarks lm =
        HandLandmarks::from_points(std::vector<Point>(21, Point{30.0, 30.0}));
    EXPECT_THROW(crop_square_patch(img, lm), mtpose::GeometryError);
}

TEST(CropTest, NonPositiveScaleRejected) {
    const ImageBuffer img = testutil::patterned_image(60, 60, 3);
    const HandLandmarks lm = testutil::grid_landmarks(10.0, 10.0);
    EXPECT_THROW(crop_square_patch(img, lm, 0.0), mtpose::ConfigError);
    EXPECT_THROW(crop_square_patch(img, lm, -1.0), mtpose::ConfigError);
}

TEST(ResizeTest, ProducesRequestedSquareAndScalesLandmarks) {
    const ImageBuffer img = testutil::patterned_image(100, 50, 3);
    const HandLandmarks lm = testutil::grid_landmarks(20.0, 10.0);
    const Sample out = resize(img, lm, 244);
    EXPECT_EQ(out.image.width(), 244);
    EXPECT_EQ(out.image.height(), 244);
    for (std::size_t i = 0; i < HandLandmarks::kCount; ++i) {
        EXPECT_DOUBLE_EQ(out.landmarks[i].x, lm[i].x * 244.0 / 100.0);
        EXPECT_DOUBLE_EQ(out.landmarks[i].y, lm[i].y * 244.0 / 50.0);
    }
}

TEST(ResizeTest, AlreadySizedInputIsByteIdentical) {
    const ImageBuffer img = testutil::patterned_image(244, 244, 3);
    const HandLandmarks lm = testutil::grid_landmarks(100.0, 100.0);
    const Sample out = resize(img, lm, 244);
    EXPECT_EQ(out.image, img);
    for (std::size_t i = 0; i < HandLandmarks::kCount; ++i) {
        EXPECT_DOUBLE_EQ(out.landmarks[i].x, lm[i].x);
        EXPECT_DOUBLE_EQ(out.landmarks[i].y, lm[i].y);
    }
}

TEST(ResizeTest, DefaultSideIs244) {
    const ImageBuffer img = testutil::patterned_image(32, 32, 1);
    const HandLandmarks lm = testutil::grid_landmarks(5.0, 5.0, 5.0, 5.0);
    const Sample out = resize(img, lm);
    EXPECT_EQ(out.image.width(), 244);
    EXPECT_EQ(out.image.height(), 244);
}
