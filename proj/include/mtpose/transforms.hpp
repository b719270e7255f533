#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mtpose/error.hpp"
#include "mtpose/geometry.hpp"
#include "mtpose/image.hpp"

namespace mtpose {

/// Disc painted over a keypoint to occlude it.
struct OcclusionArtifact {
    double radius = 10.0;
    uint8_t color = 0;  // applied to every channel

    void validate() const {
        if (!(radius > 0)) {
            throw ConfigError("occlusion radius must be positive");
        }
    }
};

/// Power-law exposure parameter. gamma > 1 darkens, gamma < 1 brightens.
struct GammaParam {
    double gamma = 1.0;

    void validate() const {
        if (!(gamma > 0.0) || gamma > 5.5) {
            throw ConfigError("gamma must lie in (0, 5.5], got " + std::to_string(gamma));
        }
    }
};

enum class BlurDirection { Horizontal, Vertical, Diagonal };

inline std::string to_string(BlurDirection d) {
    switch (d) {
        case BlurDirection::Horizontal: return "horizontal";
        case BlurDirection::Vertical: return "vertical";
        default: return "diagonal";
    }
}

inline BlurDirection blur_direction_from_string(const std::string& s) {
    if (s == "horizontal") return BlurDirection::Horizontal;
    if (s == "vertical") return BlurDirection::Vertical;
    if (s == "diagonal") return BlurDirection::Diagonal;
    throw ParseError("unknown blur direction '" + s + "'");
}

/// m x m binary correlation kernel whose line of 1s defines the motion
/// direction. The anchor sits at (m/2, m/2).
class MotionKernel {
public:
    MotionKernel(int size, BlurDirection direction, std::vector<uint8_t> grid)
        : size_(size), direction_(direction), grid_(std::move(grid)) {}

    int size() const { return size_; }
    BlurDirection direction() const { return direction_; }
    int anchor() const { return size_ / 2; }
    const std::vector<uint8_t>& grid() const { return grid_; }

    uint8_t cell(int row, int col) const {
        return grid_[static_cast<std::size_t>(row) * size_ + col];
    }

    int ones_count() const {
        int n = 0;
        for (uint8_t v : grid_) n += v;
        return n;
    }

private:
    int size_;
    BlurDirection direction_;
    std::vector<uint8_t> grid_;  // row-major, values 0/1
};

/// Build the line kernel for one blur direction; the number of 1s equals size.
inline MotionKernel build_motion_kernel(int size, BlurDirection direction) {
    if (size < 1) {
        throw ConfigError("kernel size must be at least 1, got " + std::to_string(size));
    }
    std::vector<uint8_t> grid(static_cast<std::size_t>(size) * size, 0);
    const int a = size / 2;
    for (int i = 0; i < size; ++i) {
        switch (direction) {
            case BlurDirection::Horizontal:
                grid[static_cast<std::size_t>(a) * size + i] = 1;
                break;
            case BlurDirection::Vertical:
                grid[static_cast<std::size_t>(i) * size + a] = 1;
                break;
            case BlurDirection::Diagonal:
                grid[static_cast<std::size_t>(i) * size + i] = 1;
                break;
        }
    }
    return MotionKernel(size, direction, std::move(grid));
}

/// Paint a disc of the artifact's color over every selected keypoint.
/// A pixel (px, py) is covered when (px-kx)^2 + (py-ky)^2 <= radius^2 with
/// the landmark coordinates taken at full precision. Discs clip at borders.
inline ImageBuffer occlude(const ImageBuffer& image, const HandLandmarks& landmarks,
                           const std::vector<int>& indices, const OcclusionArtifact& artifact) {
    artifact.validate();
    for (int idx : indices) {
        if (idx < 0 || idx >= static_cast<int>(HandLandmarks::kCount)) {
            throw ValidationError("occlusion index " + std::to_string(idx) +
                                  " outside the landmark range 0..20");
        }
    }
    ImageBuffer out = image;
    const double r = artifact.radius;
    const double r2 = r * r;
    for (int idx : indices) {
        const Point& k = landmarks[static_cast<std::size_t>(idx)];
        const int x_lo = std::max(0, static_cast<int>(std::ceil(k.x - r)));
        const int x_hi = std::min(image.width() - 1, static_cast<int>(std::floor(k.x + r)));
        const int y_lo = std::max(0, static_cast<int>(std::ceil(k.y - r)));
        const int y_hi = std::min(image.height() - 1, static_cast<int>(std::floor(k.y + r)));
        for (int py = y_lo; py <= y_hi; ++py) {
            const double dy = py - k.y;
            for (int px = x_lo; px <= x_hi; ++px) {
                const double dx = px - k.x;
                if (dx * dx + dy * dy <= r2) {
                    for (int c = 0; c < image.channels(); ++c) {
                        out.at(px, py, c) = artifact.color;
                    }
                }
            }
        }
    }
    return out;
}

/// Per-sample power-law exposure: v -> round(255 * (v/255)^gamma), applied
/// through a lookup table, each channel independently.
inline ImageBuffer adjust_gamma(const ImageBuffer& image, const GammaParam& param) {
    param.validate();
    std::array<uint8_t, 256> lut;
    for (int v = 0; v < 256; ++v) {
        const double scaled = 255.0 * std::pow(v / 255.0, param.gamma);
        long q = std::lround(scaled);
        if (q < 0) q = 0;
        if (q > 255) q = 255;
        lut[static_cast<std::size_t>(v)] = static_cast<uint8_t>(q);
    }
    ImageBuffer out = image;
    for (uint8_t& v : out.data()) {
        v = lut[v];
    }
    return out;
}

/// Slide the kernel across the image; each output sample is the count-
/// normalized sum of the input samples under the kernel's 1 cells, rounded
/// half away from zero. Out-of-range samples replicate the nearest edge.
inline ImageBuffer correlate(const ImageBuffer& image, const MotionKernel& kernel) {
    const int count = kernel.ones_count();
    if (count < 1) {
        throw ConfigError("correlation kernel has no 1 cells");
    }
    // offsets of the 1 cells relative to the anchor
    std::vector<std::pair<int, int>> taps;  // (dy, dx)
    const int a = kernel.anchor();
    for (int row = 0; row < kernel.size(); ++row) {
        for (int col = 0; col < kernel.size(); ++col) {
            if (kernel.cell(row, col)) {
                taps.emplace_back(row - a, col - a);
            }
        }
    }
    const int w = image.width();
    const int h = image.height();
    const int ch = image.channels();
    ImageBuffer out(w, h, ch);
    std::vector<long> acc(static_cast<std::size_t>(ch));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::fill(acc.begin(), acc.end(), 0L);
            for (const auto& [dy, dx] : taps) {
                int sy = y + dy;
                int sx = x + dx;
                if (sy < 0) sy = 0;
                if (sy >= h) sy = h - 1;
                if (sx < 0) sx = 0;
                if (sx >= w) sx = w - 1;
                for (int c = 0; c < ch; ++c) {
                    acc[static_cast<std::size_t>(c)] += image.at(sx, sy, c);
                }
            }
            for (int c = 0; c < ch; ++c) {
                // integer round-half-away-from-zero of acc/count (acc >= 0)
                const long q = (2 * acc[static_cast<std::size_t>(c)] + count) / (2L * count);
                out.at(x, y, c) = static_cast<uint8_t>(q);
            }
        }
    }
    return out;
}

}  // namespace mtpose
