#include "gateseed/imagecore/image.hpp"

#include <algorithm>
#include <string>

#include "gateseed/common/errors.hpp"

namespace gateseed::imagecore {
namespace {

void check_dims(int width, int height, int channels) {
    if (width <= 0 || height <= 0)
        throw InvalidArgument("image dimensions must be positive, got " + std::to_string(width) +
                              "x" + std::to_string(height));
    if (channels != 1 && channels != 3)
        throw InvalidArgument("image must have 1 or 3 channels, got " + std::to_string(channels));
}

}  // namespace

Image::Image(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
    check_dims(width, height, channels);
    data_.assign(pixel_count() * static_cast<std::size_t>(channels), fill);
}

Image::Image(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    check_dims(width, height, channels);
    if (data_.size() != pixel_count() * static_cast<std::size_t>(channels))
        throw InvalidArgument("image buffer holds " + std::to_string(data_.size()) +
                              " samples, expected " +
                              std::to_string(pixel_count() * static_cast<std::size_t>(channels)));
}

std::uint8_t Image::at_clamped(int x, int y, int c) const {
    return at(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1), c);
}

Image to_grayscale(const Image& rgb) {
    if (rgb.channels() != 3)
        throw InvalidArgument("to_grayscale expects 3 channels, got " +
                              std::to_string(rgb.channels()));
    Image gray(rgb.width(), rgb.height(), 1);
    auto src = rgb.data();
    auto dst = gray.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        // Integer weights per mille make the half-up rounding exact.
        const unsigned r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
        const unsigned v = (299u * r + 587u * g + 114u * b + 500u) / 1000u;
        dst[i] = static_cast<std::uint8_t>(std::min(v, 255u));
    }
    return gray;
}

Image ensure_gray(const Image& img) {
    return img.channels() == 1 ? img : to_grayscale(img);
}

}  // namespace gateseed::imagecore
