#include "gateseed/imagecore/morphology.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "gateseed/common/errors.hpp"

namespace gateseed::imagecore {

StructuringElement StructuringElement::ellipse(int width, int height) {
    if (width < 1 || height < 1 || width % 2 == 0 || height % 2 == 0)
        throw InvalidArgument("structuring element sizes must be odd and >= 1, got " +
                              std::to_string(width) + "x" + std::to_string(height));
    const double a = width / 2.0;
    const double b = height / 2.0;
    const int cx = width / 2;
    const int cy = height / 2;
    std::vector<bool> mask(static_cast<std::size_t>(width * height), false);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const double dx = (c - cx) / a;
            const double dy = (r - cy) / b;
            mask[static_cast<std::size_t>(r * width + c)] = dx * dx + dy * dy <= 1.0;
        }
    }
    return StructuringElement(width, height, std::move(mask));
}

int StructuringElement::member_count() const noexcept {
    return static_cast<int>(std::count(mask_.begin(), mask_.end(), true));
}

Image dilate(const Image& gray, const StructuringElement& elem) {
    if (gray.channels() != 1)
        throw InvalidArgument("dilate expects a 1-channel image, got " +
                              std::to_string(gray.channels()));
    const int w = gray.width();
    const int h = gray.height();
    const int rx = elem.width() / 2;
    const int ry = elem.height() / 2;

    // Replicate-padded copy so the inner loop needs no clamping.
    const int pw = w + 2 * rx;
    const int ph = h + 2 * ry;
    std::vector<std::uint8_t> padded(static_cast<std::size_t>(pw) * static_cast<std::size_t>(ph));
    for (int y = 0; y < ph; ++y)
        for (int x = 0; x < pw; ++x)
            padded[static_cast<std::size_t>(y * pw + x)] = gray.at_clamped(x - rx, y - ry);

    std::vector<std::pair<int, int>> offsets;
    for (int r = 0; r < elem.height(); ++r)
        for (int c = 0; c < elem.width(); ++c)
            if (elem.member(c, r)) offsets.emplace_back(c, r);

    Image out(w, h, 1);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w));
    for (int y = 0; y < h; ++y) {
        std::fill(row.begin(), row.end(), std::uint8_t{0});
        for (const auto& [ox, oy] : offsets) {
            const std::uint8_t* src = padded.data() + static_cast<std::size_t>((y + oy) * pw + ox);
            for (int x = 0; x < w; ++x) row[static_cast<std::size_t>(x)] = std::max(row[static_cast<std::size_t>(x)], src[x]);
        }
        std::copy(row.begin(), row.end(), out.data().begin() + static_cast<std::ptrdiff_t>(y) * w);
    }
    return out;
}

}  // namespace gateseed::imagecore
