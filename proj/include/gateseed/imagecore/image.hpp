#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gateseed::imagecore {

// Row-major 8-bit raster with 1 (gray) or 3 (RGB, interleaved) channels.
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels, std::uint8_t fill = 0);
    Image(int width, int height, int channels, std::vector<std::uint8_t> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    bool empty() const noexcept { return data_.empty(); }

    std::uint8_t& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
    std::uint8_t at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

    // Coordinates clamped to the image edge.
    std::uint8_t at_clamped(int x, int y, int c = 0) const;

    std::span<std::uint8_t> data() noexcept { return data_; }
    std::span<const std::uint8_t> data() const noexcept { return data_; }

    bool operator==(const Image&) const = default;

private:
    std::size_t index(int x, int y, int c) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) * static_cast<std::size_t>(channels_) +
               static_cast<std::size_t>(c);
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<std::uint8_t> data_;
};

// BT.601 luma, round-half-up. Requires a 3-channel image.
Image to_grayscale(const Image& rgb);

// Gray input is returned unchanged; RGB is converted.
Image ensure_gray(const Image& img);

}  // namespace gateseed::imagecore
