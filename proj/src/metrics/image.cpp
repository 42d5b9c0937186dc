#include "metrics/image.hpp"

#include <png.h>

#include <cstring>

#include "common/error.hpp"

namespace chatvis::metrics {

ImageBuffer::ImageBuffer(int w, int h, int c)
    : ImageBuffer(w, h, c, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * c, 0)) {}

ImageBuffer::ImageBuffer(int w, int h, int c, std::vector<std::uint8_t> d)
    : width(w), height(h), channels(c), data(std::move(d)) {
    if (width <= 0 || height <= 0) throw Error(Errc::InvalidArgument, "image dimensions must be positive");
    if (channels != 1 && channels != 3) throw Error(Errc::InvalidArgument, "image must have 1 or 3 channels");
    if (data.size() != static_cast<std::size_t>(width) * height * channels)
        throw Error(Errc::InvalidArgument, "sample count does not match width x height x channels");
}

ImageBuffer read_png(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw Error(Errc::IoFailure, path.string() + ": " + image.message);

    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGBA : PNG_FORMAT_GA;
    const int src_channels = color ? 4 : 2;
    std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw Error(Errc::IoFailure, path.string() + ": " + msg);
    }

    const int out_channels = color ? 3 : 1;
    ImageBuffer out(static_cast<int>(image.width), static_cast<int>(image.height), out_channels);
    const std::size_t pixels = static_cast<std::size_t>(image.width) * image.height;
    for (std::size_t p = 0; p < pixels; ++p) {
        for (int c = 0; c < out_channels; ++c) out.data[p * out_channels + c] = raw[p * src_channels + c];
    }
    return out;
}

void write_png(const std::filesystem::path& path, const ImageBuffer& img) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, img.data.data(), 0, nullptr))
        throw Error(Errc::IoFailure, path.string() + ": " + image.message);
}

std::vector<double> luma(const ImageBuffer& image) {
    const std::size_t pixels = static_cast<std::size_t>(image.width) * image.height;
    std::vector<double> y(pixels);
    if (image.channels == 1) {
        for (std::size_t p = 0; p < pixels; ++p) y[p] = image.data[p];
        return y;
    }
    for (std::size_t p = 0; p < pixels; ++p) {
        const auto* px = &image.data[p * 3];
        y[p] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
    }
    return y;
}

ImageBuffer resize_nearest(const ImageBuffer& image, int width, int height) {
    ImageBuffer out(width, height, image.channels);
    for (int y = 0; y < height; ++y) {
        int sy = static_cast<int>(static_cast<long long>(y) * image.height / height);
        for (int x = 0; x < width; ++x) {
            int sx = static_cast<int>(static_cast<long long>(x) * image.width / width);
            for (int c = 0; c < image.channels; ++c) out.at(x, y, c) = image.at(sx, sy, c);
        }
    }
    return out;
}

}  // namespace chatvis::metrics
