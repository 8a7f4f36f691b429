#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "gateseed/common/errors.hpp"
#include "gateseed/datagen/scene.hpp"
#include "scene_rng.hpp"

namespace gateseed::datagen {

namespace {

using detail::SceneRng;
using imagecore::Image;

void put(Image& img, int x, int y, const Rgb& c) {
    for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = c[static_cast<std::size_t>(ch)];
}

void fill_rect(Image& img, int x0, int y0, int x1, int y1, const Rgb& c) {
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, img.width());
    y1 = std::min(y1, img.height());
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) put(img, x, y, c);
}

void fill_circle(Image& img, int cx, int cy, int r, const Rgb& c) {
    for (int y = std::max(cy - r, 0); y <= std::min(cy + r, img.height() - 1); ++y)
        for (int x = std::max(cx - r, 0); x <= std::min(cx + r, img.width() - 1); ++x)
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) put(img, x, y, c);
}

Rgb mix(const Rgb& a, const Rgb& b, double t) {
    Rgb out{};
    for (std::size_t i = 0; i < 3; ++i)
        out[i] = static_cast<std::uint8_t>(std::lround(a[i] + (b[i] - a[i]) * t));
    return out;
}

Rgb jitter(SceneRng& rng, const Rgb& c, int amount) {
    Rgb out{};
    for (std::size_t i = 0; i < 3; ++i)
        out[i] = static_cast<std::uint8_t>(std::clamp(c[i] + rng.range(-amount, amount), 0, 255));
    return out;
}

// Stepped gradient between two colors along rows [y0, y1).
void banded_rows(Image& img, SceneRng& rng, int y0, int y1, const Rgb& from, const Rgb& to) {
    int y = y0;
    while (y < y1) {
        int band = rng.range(6, 14);
        double t = (y1 - y0) > 1 ? static_cast<double>(y - y0) / (y1 - y0 - 1) : 0.0;
        fill_rect(img, 0, y, img.width(), std::min(y + band, y1), mix(from, to, t));
        y += band;
    }
}

void random_rects(Image& img, SceneRng& rng, int count, int min_size, int max_size) {
    for (int i = 0; i < count; ++i) {
        int w = rng.range(min_size, max_size);
        int h = rng.range(min_size, max_size);
        int x = rng.range(-w / 2, img.width() - w / 2);
        int y = rng.range(-h / 2, img.height() - h / 2);
        fill_rect(img, x, y, x + w, y + h, rng.color());
    }
}

// Value noise on a coarse lattice, each block flat.
void block_noise(Image& img, SceneRng& rng, int block, const Rgb& base, int amplitude, int x0 = 0, int y0 = 0,
                 int x1 = -1, int y1 = -1) {
    if (x1 < 0) x1 = img.width();
    if (y1 < 0) y1 = img.height();
    for (int by = y0; by < y1; by += block)
        for (int bx = x0; bx < x1; bx += block) {
            int delta = rng.range(-amplitude, amplitude);
            Rgb c{};
            for (std::size_t i = 0; i < 3; ++i) c[i] = static_cast<std::uint8_t>(std::clamp(base[i] + delta, 0, 255));
            fill_rect(img, bx, by, std::min(bx + block, x1), std::min(by + block, y1), c);
        }
}

void sky_ground(Image& img, SceneRng& rng) {
    int horizon = rng.range(30, 90);
    Rgb sky_top{static_cast<std::uint8_t>(rng.range(60, 140)), static_cast<std::uint8_t>(rng.range(110, 180)),
                static_cast<std::uint8_t>(rng.range(170, 240))};
    banded_rows(img, rng, 0, horizon, sky_top, jitter(rng, Rgb{215, 220, 230}, 15));
    Rgb ground = rng.color(50, 170);
    banded_rows(img, rng, horizon, img.height(), ground, mix(ground, Rgb{20, 20, 20}, 0.5));
}

void vertical_bands(Image& img, SceneRng& rng) {
    Rgb a = rng.color(), b = rng.color();
    int x = 0;
    while (x < img.width()) {
        int band = rng.range(8, 20);
        fill_rect(img, x, 0, x + band, img.height(), mix(a, b, static_cast<double>(x) / img.width()));
        x += band;
    }
}

void rectangles(Image& img, SceneRng& rng) {
    fill_rect(img, 0, 0, img.width(), img.height(), rng.color());
    random_rects(img, rng, rng.range(10, 25), 6, 60);
}

void fine_noise(Image& img, SceneRng& rng) { block_noise(img, rng, 8, rng.color(60, 190), 30); }

void coarse_noise(Image& img, SceneRng& rng) {
    for (int by = 0; by < img.height(); by += 16)
        for (int bx = 0; bx < img.width(); bx += 16) fill_rect(img, bx, by, bx + 16, by + 16, rng.color(40, 210));
}

void diagonal_stripes(Image& img, SceneRng& rng) {
    Rgb a = rng.color(), b = rng.color();
    double width = rng.uniform(10.0, 24.0);
    double angle = rng.uniform(0.0, M_PI);
    double ca = std::cos(angle), sa = std::sin(angle);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            auto k = static_cast<long>(std::floor((x * ca + y * sa) / width));
            put(img, x, y, (k & 1) ? a : b);
        }
}

void tiled_floor(Image& img, SceneRng& rng) {
    int horizon = rng.range(35, 70);
    fill_rect(img, 0, 0, img.width(), horizon, rng.color(80, 220));
    Rgb a = rng.color(60, 200), b = jitter(rng, a, 40);
    int y = horizon, row = 0, h = 3;
    while (y < img.height()) {
        int tile_w = 8 + 4 * h;
        for (int x = 0, col = 0; x < img.width(); x += tile_w, ++col)
            fill_rect(img, x, y, x + tile_w, y + h, ((row + col) & 1) ? a : b);
        y += h;
        ++row;
        h = std::min(h + 2, 20);
    }
}

void blobs(Image& img, SceneRng& rng) {
    fill_rect(img, 0, 0, img.width(), img.height(), rng.color());
    int n = rng.range(6, 15);
    for (int i = 0; i < n; ++i)
        fill_circle(img, rng.range(0, img.width()), rng.range(0, img.height()), rng.range(5, 30), rng.color());
}

void bricks(Image& img, SceneRng& rng) {
    Rgb mortar = rng.color(150, 220);
    Rgb brick = Rgb{static_cast<std::uint8_t>(rng.range(120, 200)), static_cast<std::uint8_t>(rng.range(50, 90)),
                    static_cast<std::uint8_t>(rng.range(30, 70))};
    fill_rect(img, 0, 0, img.width(), img.height(), mortar);
    int row_h = rng.range(8, 12), brick_w = rng.range(20, 32), gap = rng.range(1, 2);
    for (int y = 0, row = 0; y < img.height(); y += row_h, ++row) {
        int offset = (row & 1) ? brick_w / 2 : 0;
        for (int x = -offset; x < img.width(); x += brick_w)
            fill_rect(img, x + gap, y + gap, x + brick_w, y + row_h, jitter(rng, brick, 12));
    }
}

void large_checker(Image& img, SceneRng& rng) {
    Rgb a = rng.color(60, 200), b = jitter(rng, a, 50);
    int cell = rng.range(20, 40);
    for (int y = 0; y < img.height(); y += cell)
        for (int x = 0; x < img.width(); x += cell) fill_rect(img, x, y, x + cell, y + cell, ((x / cell + y / cell) & 1) ? a : b);
}

void room(Image& img, SceneRng& rng) {
    const int w = img.width(), h = img.height();
    Rgb wall = rng.color(90, 220), side = mix(wall, Rgb{0, 0, 0}, 0.3), floor = rng.color(40, 150);
    fill_rect(img, 0, 0, w, h, wall);
    int bx0 = rng.range(30, 55), bx1 = w - rng.range(30, 55), by1 = rng.range(70, 95);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool below = y >= by1;
            if (x < bx0 || x >= bx1) put(img, x, y, below ? floor : side);
            else if (below) put(img, x, y, floor);
        }
    int panels = rng.range(1, 4);
    for (int i = 0; i < panels; ++i) {
        int pw = rng.range(10, 30), ph = rng.range(10, 40);
        int px = rng.range(bx0, std::max(bx0, bx1 - pw)), py = rng.range(5, std::max(5, by1 - ph));
        fill_rect(img, px, py, px + pw, py + ph, rng.color());
    }
}

void gradient_rects_noise(Image& img, SceneRng& rng) {
    banded_rows(img, rng, 0, img.height(), rng.color(), rng.color());
    random_rects(img, rng, rng.range(3, 8), 10, 40);
    int px = rng.range(0, img.width() - 48), py = rng.range(0, img.height() - 48);
    block_noise(img, rng, 8, rng.color(60, 190), 25, px, py, px + 48, py + 48);
}

void poles(Image& img, SceneRng& rng) {
    sky_ground(img, rng);
    int n = rng.range(4, 12);
    for (int i = 0; i < n; ++i) {
        int x = rng.range(0, img.width()), w = rng.range(3, 10), top = rng.range(0, 40);
        fill_rect(img, x, top, x + w, img.height(), rng.color(20, 120));
    }
}

void horizon_boxes(Image& img, SceneRng& rng) {
    int horizon = rng.range(45, 80);
    fill_rect(img, 0, 0, img.width(), horizon, rng.color(140, 235));
    fill_rect(img, 0, horizon, img.width(), img.height(), rng.color(40, 140));
    int n = rng.range(3, 9);
    for (int i = 0; i < n; ++i) {
        int w = rng.range(8, 40), h = rng.range(5, 30), x = rng.range(-10, img.width());
        fill_rect(img, x, horizon - h, x + w, horizon + 2, rng.color(30, 200));
    }
}

const std::vector<std::function<void(Image&, SceneRng&)>>& generators() {
    static const std::vector<std::function<void(Image&, SceneRng&)>> table{
        sky_ground,   vertical_bands, rectangles, fine_noise,           coarse_noise, diagonal_stripes, tiled_floor,
        blobs,        bricks,         large_checker, room,             gradient_rects_noise, poles,     horizon_boxes,
    };
    return table;
}

}  // namespace

int background_count() { return static_cast<int>(generators().size()); }

imagecore::Image render_background(int id, std::uint64_t seed, int width, int height) {
    if (id < 0 || id >= background_count())
        throw InvalidArgument("background id " + std::to_string(id) + " outside [0, " +
                              std::to_string(background_count()) + ")");
    Image img(width, height, 3);
    SceneRng rng(seed);
    generators()[static_cast<std::size_t>(id)](img, rng);
    return img;
}

}  // namespace gateseed::datagen
