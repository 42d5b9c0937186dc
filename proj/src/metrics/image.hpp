#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace chatvis::metrics {

// Row-major 8-bit samples, 1 (gray) or 3 (RGB) channels interleaved.
struct ImageBuffer {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> data;

    ImageBuffer() = default;
    ImageBuffer(int width, int height, int channels);
    ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> data);

    std::uint8_t& at(int x, int y, int c = 0) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
    std::uint8_t at(int x, int y, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool same_shape(const ImageBuffer& o) const noexcept {
        return width == o.width && height == o.height && channels == o.channels;
    }
    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;
};

// 8-bit RGB or gray; alpha is dropped without compositing.
ImageBuffer read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageBuffer& image);

// BT.601 luma (0.299 R + 0.587 G + 0.114 B) as doubles; gray passes through.
std::vector<double> luma(const ImageBuffer& image);

// Nearest-neighbour resample to width x height.
ImageBuffer resize_nearest(const ImageBuffer& image, int width, int height);

}  // namespace chatvis::metrics
