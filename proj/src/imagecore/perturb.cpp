#include "gateseed/imagecore/perturb.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gateseed/common/errors.hpp"

namespace gateseed::imagecore {

Image scale_intensity(const Image& img, double s) {
    if (!(s > 0.0 && s <= 1.0))
        throw InvalidArgument("intensity scale must lie in (0, 1], got " + std::to_string(s));
    Image out = img;
    for (auto& v : out.data()) v = static_cast<std::uint8_t>(std::floor(s * v + 0.5));
    return out;
}

Image apply_motion_blur(const Image& img, int length, double angle) {
    if (length < 1) throw InvalidArgument("motion blur length must be >= 1");
    if (length == 1) return img;

    std::vector<std::pair<int, int>> taps;
    const double half = (length - 1) / 2.0;
    for (int k = 0; k < length; ++k) {
        const double t = k - half;
        taps.emplace_back(static_cast<int>(std::lround(t * std::cos(angle))),
                          static_cast<int>(std::lround(t * std::sin(angle))));
    }

    Image out(img.width(), img.height(), img.channels());
    const unsigned n = static_cast<unsigned>(length);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < img.channels(); ++c) {
                unsigned sum = 0;
                for (const auto& [dx, dy] : taps) sum += img.at_clamped(x + dx, y + dy, c);
                out.at(x, y, c) = static_cast<std::uint8_t>((2 * sum + n) / (2 * n));
            }
        }
    }
    return out;
}

}  // namespace gateseed::imagecore
