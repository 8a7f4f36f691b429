#pragma once

#include <vector>

#include "gateseed/imagecore/image.hpp"

namespace gateseed::imagecore {

class StructuringElement {
public:
    // Cells whose centers fall inside the inscribed ellipse with semi-axes
    // width/2 and height/2. Both sizes must be odd and >= 1.
    static StructuringElement ellipse(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool member(int col, int row) const { return mask_[static_cast<std::size_t>(row * width_ + col)]; }
    int member_count() const noexcept;

private:
    StructuringElement(int w, int h, std::vector<bool> mask)
        : width_(w), height_(h), mask_(std::move(mask)) {}

    int width_;
    int height_;
    std::vector<bool> mask_;
};

// Grayscale dilation (neighborhood max) with clamp-to-edge borders.
Image dilate(const Image& gray, const StructuringElement& elem);

}  // namespace gateseed::imagecore
