#pragma once

#include <cmath>
#include <numbers>

namespace gateseed {

// Wraps an angle to (-pi, pi].
inline double normalize_angle(double a) {
    double r = std::remainder(a, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
    return r;
}

}  // namespace gateseed
