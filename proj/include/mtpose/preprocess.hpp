#pragma once

#include <cmath>
#include <cstring>

#include "mtpose/error.hpp"
#include "mtpose/geometry.hpp"
#include "mtpose/image.hpp"

namespace mtpose {

struct Sample {
    ImageBuffer image;
    HandLandmarks landmarks;
};

/// Extract a square patch of side scale * max(bbox width, bbox height),
/// centered on the center of the tightest keypoint box. Regions falling
/// outside the source image are zero-filled. Landmarks are shifted into
/// patch coordinates.
inline Sample crop_square_patch(const ImageBuffer& image, const HandLandmarks& landmarks,
                                double scale = 2.2) {
    if (scale <= 0) {
        throw ConfigError("crop scale must be positive");
    }
    if (image.empty()) {
        throw ValidationError("cannot crop an empty image");
    }
    const BoundingBox box = tight_bbox(landmarks);
    const double max_dim = std::max(box.width(), box.height());
    if (max_dim <= 0) {
        throw GeometryError("all landmarks coincide; patch geometry is degenerate");
    }
    const double side_f = scale * max_dim;
    const int side = std::max(1, static_cast<int>(std::llround(side_f)));
    const double cx = (box.x_min + box.x_max) / 2.0;
    const double cy = (box.y_min + box.y_max) / 2.0;
    const long ox = std::llround(cx - side_f / 2.0);
    const long oy = std::llround(cy - side_f / 2.0);

    const int ch = image.channels();
    ImageBuffer patch(side, side, ch, 0);
    for (int py = 0; py < side; ++py) {
        const long sy = oy + py;
        if (sy < 0 || sy >= image.height()) continue;
        // clip the copied span to the source width
        long x_begin = std::max(0L, -ox);
        long x_end = std::min<long>(side, image.width() - ox);
        if (x_begin >= x_end) continue;
        const uint8_t* src = &image.data()[((static_cast<std::size_t>(sy) * image.width()) +
                                            (ox + x_begin)) * ch];
        uint8_t* dst = &patch.data()[((static_cast<std::size_t>(py) * side) + x_begin) * ch];
        std::memcpy(dst, src, static_cast<std::size_t>(x_end - x_begin) * ch);
    }

    Sample out;
    out.image = std::move(patch);
    HandLandmarks remapped = landmarks;
    for (std::size_t i = 0; i < HandLandmarks::kCount; ++i) {
        remapped[i].x -= static_cast<double>(ox);
        remapped[i].y -= static_cast<double>(oy);
    }
    out.landmarks = remapped;
    return out;
}

/// Resize to side x side with bilinear sampling; landmarks scale by
/// (side/width, side/height).
inline Sample resize(const ImageBuffer& image, const HandLandmarks& landmarks, int side = 244) {
    if (image.empty()) {
        throw ValidationError("cannot resize an empty image");
    }
    if (side < 1) {
        throw ConfigError("target side must be at least 1 pixel");
    }
    Sample out;
    out.image = (side == image.width() && side == image.height())
                    ? image
                    : resample_bilinear(image, side, side);
    const double fx = static_cast<double>(side) / image.width();
    const double fy = static_cast<double>(side) / image.height();
    HandLandmarks scaled = landmarks;
    for (std::size_t i = 0; i < HandLandmarks::kCount; ++i) {
        scaled[i].x *= fx;
        scaled[i].y *= fy;
    }
    out.landmarks = scaled;
    return out;
}

}  // namespace mtpose
