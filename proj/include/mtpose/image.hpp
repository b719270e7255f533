#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mtpose/error.hpp"

namespace mtpose {

/// Owned row-major 8-bit raster, 1 (gray) or 3 (RGB) channels.
class ImageBuffer {
public:
    ImageBuffer() = default;

    ImageBuffer(int width, int height, int channels, uint8_t fill = 0)
        : width_(width), height_(height), channels_(channels) {
        check_shape(width, height, channels);
        data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
    }

    static ImageBuffer wrap(int width, int height, int channels, std::vector<uint8_t> data) {
        check_shape(width, height, channels);
        if (data.size() != static_cast<std::size_t>(width) * height * channels) {
            throw ValidationError("pixel data length does not match width*height*channels");
        }
        ImageBuffer img;
        img.width_ = width;
        img.height_ = height;
        img.channels_ = channels;
        img.data_ = std::move(data);
        return img;
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    bool empty() const { return data_.empty(); }

    uint8_t at(int x, int y, int c = 0) const {
        return data_[index(x, y, c)];
    }
    uint8_t& at(int x, int y, int c = 0) {
        return data_[index(x, y, c)];
    }

    const std::vector<uint8_t>& data() const { return data_; }
    std::vector<uint8_t>& data() { return data_; }

    bool operator==(const ImageBuffer&) const = default;

private:
    static void check_shape(int width, int height, int channels) {
        if (width < 0 || height < 0) {
            throw ValidationError("image dimensions must be non-negative");
        }
        if (channels != 1 && channels != 3) {
            throw ValidationError("image must have 1 or 3 channels, got " +
                                  std::to_string(channels));
        }
    }

    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<uint8_t> data_;
};

/// Width, height and channel count of a PNG without decoding pixel data.
inline std::tuple<int, int, int> probe_png(const std::filesystem::path& path) {
    png_image pi;
    std::memset(&pi, 0, sizeof(pi));
    pi.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&pi, path.string().c_str())) {
        std::string msg = pi.message;
        png_image_free(&pi);
        throw IoError("cannot read PNG '" + path.string() + "': " + msg);
    }
    const int channels = (pi.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
    const int w = static_cast<int>(pi.width);
    const int h = static_cast<int>(pi.height);
    png_image_free(&pi);
    return {w, h, channels};
}

/// Decode an 8-bit PNG. Grayscale files load as 1 channel, everything else
/// (palette, RGB, RGBA) as 3 channels with alpha composited away.
inline ImageBuffer read_png(const std::filesystem::path& path) {
    png_image pi;
    std::memset(&pi, 0, sizeof(pi));
    pi.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&pi, path.string().c_str())) {
        std::string msg = pi.message;
        png_image_free(&pi);
        throw IoError("cannot read PNG '" + path.string() + "': " + msg);
    }
    const bool color = (pi.format & PNG_FORMAT_FLAG_COLOR) != 0;
    pi.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int channels = color ? 3 : 1;
    std::vector<uint8_t> data(PNG_IMAGE_SIZE(pi));
    if (!png_image_finish_read(&pi, nullptr, data.data(), 0, nullptr)) {
        std::string msg = pi.message;
        png_image_free(&pi);
        throw IoError("cannot decode PNG '" + path.string() + "': " + msg);
    }
    const int w = static_cast<int>(pi.width);
    const int h = static_cast<int>(pi.height);
    png_image_free(&pi);
    return ImageBuffer::wrap(w, h, channels, std::move(data));
}

/// Encode an ImageBuffer as 8-bit gray or RGB PNG.
inline void write_png(const std::filesystem::path& path, const ImageBuffer& img) {
    if (img.empty()) {
        throw ValidationError("refusing to write empty image '" + path.string() + "'");
    }
    png_image pi;
    std::memset(&pi, 0, sizeof(pi));
    pi.version = PNG_IMAGE_VERSION;
    pi.width = static_cast<png_uint_32>(img.width());
    pi.height = static_cast<png_uint_32>(img.height());
    pi.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&pi, path.string().c_str(), 0, img.data().data(), 0, nullptr)) {
        std::string msg = pi.message;
        png_image_free(&pi);
        throw IoError("cannot write PNG '" + path.string() + "': " + msg);
    }
    png_image_free(&pi);
}

/// Bilinear resample to out_w x out_h using half-pixel-center source mapping.
/// Identity by construction when the output shape equals the input shape.
inline ImageBuffer resample_bilinear(const ImageBuffer& img, int out_w, int out_h) {
    if (img.empty()) {
        throw ValidationError("cannot resample an empty image");
    }
    if (out_w < 1 || out_h < 1) {
        throw ConfigError("resample target must be at least 1x1");
    }
    const int w = img.width();
    const int h = img.height();
    const int ch = img.channels();
    ImageBuffer out(out_w, out_h, ch);
    const double sx = static_cast<double>(w) / out_w;
    const double sy = static_cast<double>(h) / out_h;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        if (fy < 0) fy = 0;
        if (fy > h - 1) fy = h - 1;
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, h - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            if (fx < 0) fx = 0;
            if (fx > w - 1) fx = w - 1;
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, w - 1);
            const double wx = fx - x0;
            for (int c = 0; c < ch; ++c) {
                const double top = img.at(x0, y0, c) * (1.0 - wx) + img.at(x1, y0, c) * wx;
                const double bot = img.at(x0, y1, c) * (1.0 - wx) + img.at(x1, y1, c) * wx;
                const double v = top * (1.0 - wy) + bot * wy;
                long q = std::lround(v);
                if (q < 0) q = 0;
                if (q > 255) q = 255;
                out.at(x, y, c) = static_cast<uint8_t>(q);
            }
        }
    }
    return out;
}

}  // namespace mtpose
