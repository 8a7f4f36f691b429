#include "gateseed/imagecore/filters.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "gateseed/common/errors.hpp"

namespace gateseed::imagecore {
namespace {

using FloatPlane = std::vector<float>;

FloatPlane to_float(const Image& gray) {
    auto d = gray.data();
    return FloatPlane(d.begin(), d.end());
}

float sample_clamped(const FloatPlane& p, int w, int h, int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return p[static_cast<std::size_t>(y * w + x)];
}

void sobel_gradients(const FloatPlane& src, int w, int h, FloatPlane& gx, FloatPlane& gy) {
    gx.assign(src.size(), 0.0f);
    gy.assign(src.size(), 0.0f);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            auto p = [&](int dx, int dy) { return sample_clamped(src, w, h, x + dx, y + dy); };
            const float sx = (p(1, -1) + 2.0f * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0f * p(-1, 0) + p(-1, 1));
            const float sy = (p(-1, 1) + 2.0f * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0f * p(0, -1) + p(1, -1));
            gx[static_cast<std::size_t>(y * w + x)] = sx;
            gy[static_cast<std::size_t>(y * w + x)] = sy;
        }
    }
}

std::array<float, 25> gaussian_5x5(double sigma) {
    std::array<float, 25> k{};
    double sum = 0.0;
    for (int r = -2; r <= 2; ++r)
        for (int c = -2; c <= 2; ++c) sum += std::exp(-(r * r + c * c) / (2.0 * sigma * sigma));
    for (int r = -2; r <= 2; ++r)
        for (int c = -2; c <= 2; ++c)
            k[static_cast<std::size_t>((r + 2) * 5 + (c + 2))] =
                static_cast<float>(std::exp(-(r * r + c * c) / (2.0 * sigma * sigma)) / sum);
    return k;
}

}  // namespace

Image pencil_filter(const Image& img, const StructuringElement& elem) {
    const Image gray = ensure_gray(img);
    const Image dilated = dilate(gray, elem);
    Image out(gray.width(), gray.height(), 1);
    auto g = gray.data();
    auto p = dilated.data();
    auto o = out.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        // dilation is extensive, so the ratio never exceeds 1
        o[i] = p[i] == 0 ? std::uint8_t{255}
                         : static_cast<std::uint8_t>((255u * g[i]) / p[i]);
    }
    return out;
}

Image sobel_filter(const Image& img) {
    const Image gray = ensure_gray(img);
    const int w = gray.width();
    const int h = gray.height();
    FloatPlane gx, gy;
    sobel_gradients(to_float(gray), w, h, gx, gy);
    Image out(w, h, 1);
    auto o = out.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        const double mag = std::sqrt(double(gx[i]) * gx[i] + double(gy[i]) * gy[i]);
        o[i] = static_cast<std::uint8_t>(std::lround(std::min(mag, 255.0)));
    }
    return out;
}

Image canny_filter(const Image& img, double low_thresh, double high_thresh) {
    if (low_thresh < 0.0 || high_thresh > 255.0 || low_thresh > high_thresh)
        throw InvalidArgument("canny thresholds must satisfy 0 <= low <= high <= 255");
    const Image gray = ensure_gray(img);
    const int w = gray.width();
    const int h = gray.height();
    const FloatPlane src = to_float(gray);

    static const auto kernel = gaussian_5x5(1.4);
    FloatPlane smooth(src.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int r = -2; r <= 2; ++r)
                for (int c = -2; c <= 2; ++c)
                    acc += kernel[static_cast<std::size_t>((r + 2) * 5 + c + 2)] *
                           sample_clamped(src, w, h, x + c, y + r);
            smooth[static_cast<std::size_t>(y * w + x)] = acc;
        }
    }

    FloatPlane gx, gy;
    sobel_gradients(smooth, w, h, gx, gy);
    FloatPlane mag(src.size());
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::hypot(gx[i], gy[i]);

    auto mag_at = [&](int x, int y) -> float {
        if (x < 0 || y < 0 || x >= w || y >= h) return 0.0f;
        return mag[static_cast<std::size_t>(y * w + x)];
    };

    // Non-maximum suppression along the gradient direction quantized to 45 deg.
    FloatPlane thin(src.size(), 0.0f);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y * w + x);
            const float m = mag[i];
            if (m <= 0.0f) continue;
            double deg = std::atan2(gy[i], gx[i]) * 180.0 / 3.14159265358979323846;
            if (deg < 0.0) deg += 180.0;
            int dx = 1, dy = 0;
            if (deg >= 22.5 && deg < 67.5) {
                dx = 1; dy = 1;
            } else if (deg >= 67.5 && deg < 112.5) {
                dx = 0; dy = 1;
            } else if (deg >= 112.5 && deg < 157.5) {
                dx = -1; dy = 1;
            }
            const float before = mag_at(x - dx, y - dy);
            const float after = mag_at(x + dx, y + dy);
            // strict on one side, inclusive on the other: plateaus keep one pixel
            if (m > before && m >= after) thin[i] = m;
        }
    }

    Image out(w, h, 1, 0);
    auto o = out.data();
    std::vector<int> stack;
    for (std::size_t i = 0; i < thin.size(); ++i) {
        if (thin[i] >= high_thresh && o[i] == 0) {
            o[i] = 255;
            stack.push_back(static_cast<int>(i));
        }
    }
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        const int x = i % w;
        const int y = i / w;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = x + dx, ny = y + dy;
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                const std::size_t j = static_cast<std::size_t>(ny * w + nx);
                if (o[j] == 0 && thin[j] >= low_thresh && thin[j] > 0.0f) {
                    o[j] = 255;
                    stack.push_back(static_cast<int>(j));
                }
            }
        }
    }
    return out;
}

FilterKind parse_filter_kind(const std::string& name) {
    if (name == "pencil") return FilterKind::Pencil;
    if (name == "sobel") return FilterKind::Sobel;
    if (name == "canny") return FilterKind::Canny;
    if (name == "none" || name == "raw") return FilterKind::None;
    throw InvalidArgument("unknown filter '" + name + "' (expected pencil|sobel|canny|none)");
}

std::string to_string(FilterKind kind) {
    switch (kind) {
        case FilterKind::Pencil: return "pencil";
        case FilterKind::Sobel: return "sobel";
        case FilterKind::Canny: return "canny";
        case FilterKind::None: return "none";
    }
    return "none";
}

Image apply_filter(const Image& img, const FilterSettings& settings) {
    switch (settings.kind) {
        case FilterKind::Pencil:
            return pencil_filter(img, StructuringElement::ellipse(settings.pencil_kernel,
                                                                  settings.pencil_kernel));
        case FilterKind::Sobel: return sobel_filter(img);
        case FilterKind::Canny: return canny_filter(img, settings.canny_low, settings.canny_high);
        case FilterKind::None: return ensure_gray(img);
    }
    return ensure_gray(img);
}

}  // namespace gateseed::imagecore
