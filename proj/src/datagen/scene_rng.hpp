#pragma once

#include <cstdint>
#include <random>

#include "gateseed/datagen/scene.hpp"

namespace gateseed::datagen::detail {

// Portable draws on top of mt19937_64; the standard distributions are
// implementation-defined and would make datasets toolchain dependent.
class SceneRng {
public:
    explicit SceneRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    // [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // [0, n)
    int index(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }
    int range(int lo, int hi) { return lo + index(hi - lo + 1); }

    Rgb color(int lo = 30, int hi = 230) {
        return {static_cast<std::uint8_t>(range(lo, hi)), static_cast<std::uint8_t>(range(lo, hi)),
                static_cast<std::uint8_t>(range(lo, hi))};
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace gateseed::datagen::detail
