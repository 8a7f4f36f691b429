#pragma once

#include "gateseed/imagecore/image.hpp"

namespace gateseed::imagecore {

// Every sample becomes round(s * value) (half up). s must lie in (0, 1].
Image scale_intensity(const Image& img, double s);

// Normalized line kernel of `length` taps along `angle` (radians, 0 = +x),
// taps snapped to the nearest pixel, borders clamped.
Image apply_motion_blur(const Image& img, int length, double angle);

}  // namespace gateseed::imagecore
