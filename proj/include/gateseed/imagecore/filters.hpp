#pragma once

#include <string>

#include "gateseed/imagecore/image.hpp"
#include "gateseed/imagecore/morphology.hpp"

namespace gateseed::imagecore {

inline constexpr int kDefaultPencilKernel = 5;

// 255 * G / dilate(G), truncated; 255 where the dilation is zero.
// RGB input is converted to gray first.
Image pencil_filter(const Image& img,
                    const StructuringElement& elem =
                        StructuringElement::ellipse(kDefaultPencilKernel, kDefaultPencilKernel));

// Gradient magnitude of the 3x3 Sobel pair, rounded and clamped to [0, 255].
Image sobel_filter(const Image& img);

// Gaussian 5x5 (sigma 1.4), Sobel, non-maximum suppression and hysteresis.
// Output is binary {0, 255}. Thresholds apply to the L2 gradient magnitude.
Image canny_filter(const Image& img, double low_thresh, double high_thresh);

enum class FilterKind { Pencil, Sobel, Canny, None };

FilterKind parse_filter_kind(const std::string& name);
std::string to_string(FilterKind kind);

struct FilterSettings {
    FilterKind kind = FilterKind::Pencil;
    int pencil_kernel = kDefaultPencilKernel;
    double canny_low = 50.0;
    double canny_high = 150.0;
};

// Applies the configured input filter; `None` yields plain grayscale.
Image apply_filter(const Image& img, const FilterSettings& settings);

}  // namespace gateseed::imagecore
