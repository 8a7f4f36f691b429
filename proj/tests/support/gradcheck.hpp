#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gateseed/nn/layers.hpp"
#include "gateseed/nn/loss.hpp"
#include "gateseed/nn/network.hpp"

namespace gateseed::testing {

using DTensor = nn::BasicTensor<double>;

inline constexpr double kFdEps = 1e-3;

struct GradCheck {
    std::string name;
    double max_rel = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;  // stencil crossed a ReLU or max-pool switch
};

// Below this magnitude the error is measured in absolute terms: with eps = 1e-3
// the O(eps^2) truncation term of a central difference is around 1e-7, which
// swamps the relative error of a near-zero gradient.
inline constexpr double kRelFloor = 1e-3;

// Relative error with a floor so that two tiny gradients compare as equal.
inline double rel_error(double analytic, double numeric) {
    double scale = std::max({std::abs(analytic), std::abs(numeric), kRelFloor});
    return std::abs(analytic - numeric) / scale;
}

// Central differences of `loss` against `analytic` for every element of `param`.
// When `crossed` is given, `loss` sets it if the evaluation left the piecewise
// linear region of the unperturbed point; such elements are skipped, since a
// finite difference across a kink says nothing about the derivative.
inline GradCheck check_tensor(const std::string& name, DTensor& param, const DTensor& analytic,
                              const std::function<double()>& loss, double eps = kFdEps, bool* crossed = nullptr) {
    GradCheck r{name, 0.0, 0, 0};
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double saved = param[i];
        if (crossed) *crossed = false;
        param[i] = saved + eps;
        const double up = loss();
        param[i] = saved - eps;
        const double down = loss();
        param[i] = saved;
        if (crossed && *crossed) {
            ++r.skipped;
            continue;
        }
        r.max_rel = std::max(r.max_rel, rel_error(analytic[i], (up - down) / (2.0 * eps)));
        ++r.checked;
    }
    return r;
}

inline DTensor random_tensor(const nn::Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    DTensor t(shape);
    for (auto& v : t.values()) v = u(rng);
    return t;
}

inline double dot(const DTensor& a, const DTensor& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Values at least `gap` from zero, so ReLU kinks stay outside the stencil.
inline DTensor away_from_zero(const nn::Shape& shape, std::mt19937_64& rng, double gap = 0.05) {
    DTensor t = random_tensor(shape, rng);
    for (auto& v : t.values()) v = v < 0 ? v - gap : v + gap;
    return t;
}

// Pairwise distinct values spaced well above the stencil width.
inline DTensor distinct_values(const nn::Shape& shape, std::mt19937_64& rng) {
    DTensor t(shape);
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.01 * static_cast<double>(i);
    std::shuffle(v.begin(), v.end(), rng);
    std::copy(v.begin(), v.end(), t.data());
    return t;
}

// Each layer is checked with the scalar probe L = <forward(...), R>.
inline std::vector<GradCheck> check_layers(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<GradCheck> out;

    {  // convolution
        DTensor x = random_tensor({2, 3, 5, 6}, rng);
        DTensor w = random_tensor({4, 3, 3, 3}, rng);
        DTensor b = random_tensor({4}, rng);
        DTensor r = random_tensor({2, 4, 5, 6}, rng);
        DTensor dx, dw, db;
        nn::conv2d_backward(x, w, r, &dx, dw, db);
        auto loss = [&] { return dot(nn::conv2d_forward(x, w, b), r); };
        out.push_back(check_tensor("conv2d.input", x, dx, loss));
        out.push_back(check_tensor("conv2d.weight", w, dw, loss));
        out.push_back(check_tensor("conv2d.bias", b, db, loss));
    }
    {  // batch norm, training statistics
        DTensor x = random_tensor({3, 2, 3, 4}, rng);
        DTensor g = random_tensor({2}, rng, 0.5, 1.5);
        DTensor be = random_tensor({2}, rng);
        DTensor r = random_tensor({3, 2, 3, 4}, rng);
        nn::BatchNormCache<double> cache;
        nn::batchnorm_forward_train(x, g, be, 1e-5, cache);
        DTensor dg, dbe;
        DTensor dx = nn::batchnorm_backward(r, g, cache, dg, dbe);
        auto loss = [&] {
            nn::BatchNormCache<double> c;
            return dot(nn::batchnorm_forward_train(x, g, be, 1e-5, c), r);
        };
        out.push_back(check_tensor("batchnorm.input", x, dx, loss));
        out.push_back(check_tensor("batchnorm.gamma", g, dg, loss));
        out.push_back(check_tensor("batchnorm.beta", be, dbe, loss));
    }
    {  // relu
        DTensor x = away_from_zero({2, 3, 4, 4}, rng);
        DTensor r = random_tensor({2, 3, 4, 4}, rng);
        DTensor dx = nn::relu_backward(nn::relu_forward(x), r);
        out.push_back(check_tensor("relu.input", x, dx, [&] { return dot(nn::relu_forward(x), r); }));
    }
    {  // max pool, odd trailing row and column
        DTensor x = distinct_values({2, 2, 5, 7}, rng);
        std::vector<std::int32_t> arg;
        DTensor y = nn::maxpool2x2_forward(x, arg);
        DTensor r = random_tensor(y.shape(), rng);
        DTensor dx = nn::maxpool2x2_backward(r, arg, x.shape());
        auto loss = [&] {
            std::vector<std::int32_t> a;
            return dot(nn::maxpool2x2_forward(x, a), r);
        };
        out.push_back(check_tensor("maxpool.input", x, dx, loss));
    }
    {  // dense over a 4-d input
        DTensor x = random_tensor({3, 2, 2, 3}, rng);
        DTensor w = random_tensor({5, 12}, rng);
        DTensor b = random_tensor({5}, rng);
        DTensor r = random_tensor({3, 5}, rng);
        DTensor dx, dw, db;
        nn::dense_backward(x, w, r, &dx, dw, db);
        auto loss = [&] { return dot(nn::dense_forward(x, w, b), r); };
        out.push_back(check_tensor("dense.input", x, dx, loss));
        out.push_back(check_tensor("dense.weight", w, dw, loss));
        out.push_back(check_tensor("dense.bias", b, db, loss));
    }
    {  // output heads
        DTensor z = random_tensor({2, 4, 3, 5}, rng, -2.0, 2.0);
        DTensor r = random_tensor({2, 4, 3, 5}, rng);
        DTensor dz = nn::heads_backward(nn::heads_forward(z), r);
        out.push_back(check_tensor("heads.input", z, dz, [&] { return dot(nn::heads_forward(z), r); }));
    }
    {  // loss
        DTensor y = random_tensor({3, 4, 3, 5}, rng, 0.0, 1.0);
        std::vector<nn::GridPrediction> targets(3);
        std::vector<nn::GridMask> masks(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int s = 0; s < 3; ++s) {
            for (auto& v : targets[static_cast<std::size_t>(s)].values) v = static_cast<float>(u(rng));
            for (auto& m : masks[static_cast<std::size_t>(s)]) m = u(rng) < 0.4 ? 1 : 0;
        }
        nn::LossWeights w{1.5, 2.0, 0.7, 1.2, 0.3};
        DTensor dy;
        nn::batch_loss(y, std::span<const nn::GridPrediction>(targets), std::span<const nn::GridMask>(masks), w, &dy);
        auto loss = [&] {
            return nn::batch_loss(y, std::span<const nn::GridPrediction>(targets),
                                  std::span<const nn::GridMask>(masks), w)
                .total;
        };
        out.push_back(check_tensor("loss.output", y, dy, loss));
    }
    return out;
}

// 8x8 input, two 4-channel conv blocks, one pooled block, dense 64 -> 60.
inline nn::Architecture reduced_architecture() {
    nn::Architecture a;
    a.input_height = 8;
    a.input_width = 8;
    a.conv_layers = 2;
    a.channels = 4;
    a.pooled_layers = 1;
    return a;
}

// Whole-network check: every trainable tensor, through the
// training loss, with batch-norm batch statistics.
inline std::vector<GradCheck> check_reduced_network(std::uint64_t seed, double eps = kFdEps) {
    std::mt19937_64 rng(seed);
    const nn::Architecture arch = reduced_architecture();
    auto params = nn::NetworkParams<double>::init(arch, seed);
    for (auto* t : params.trainable())
        for (auto& v : t->values()) v += 0.05 * std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    DTensor x = random_tensor({3, 1, 8, 8}, rng, 0.0, 1.0);

    std::vector<nn::GridPrediction> targets(3);
    std::vector<nn::GridMask> masks(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 3; ++s) {
        for (auto& v : targets[static_cast<std::size_t>(s)].values) v = static_cast<float>(u(rng));
        for (auto& m : masks[static_cast<std::size_t>(s)]) m = u(rng) < 0.4 ? 1 : 0;
    }
    const nn::LossWeights w;

    // ReLU on/off pattern and max-pool winners identify the linear region
    auto region = [](const nn::ForwardCache<double>& c) {
        std::vector<std::int32_t> key;
        for (const auto& b : c.blocks) {
            for (std::size_t i = 0; i < b.activated.size(); ++i) key.push_back(b.activated[i] > 0.0);
            key.insert(key.end(), b.argmax.begin(), b.argmax.end());
        }
        return key;
    };
    nn::ForwardCache<double> cache;
    DTensor y = nn::forward(params, x, nn::Mode::Train, &cache);
    const auto base_region = region(cache);
    bool crossed = false;
    auto loss = [&] {
        nn::ForwardCache<double> c;
        DTensor out = nn::forward(params, x, nn::Mode::Train, &c);
        if (region(c) != base_region) crossed = true;
        return nn::batch_loss(out, std::span<const nn::GridPrediction>(targets), std::span<const nn::GridMask>(masks), w)
            .total;
    };

    DTensor dy;
    nn::batch_loss(y, std::span<const nn::GridPrediction>(targets), std::span<const nn::GridMask>(masks), w, &dy);
    nn::Gradients<double> grads = nn::backward(params, cache, dy);

    std::vector<GradCheck> out;
    auto tensors = params.trainable();
    auto names = params.trainable_names();
    for (std::size_t i = 0; i < tensors.size(); ++i)
        out.push_back(check_tensor("network." + names[i], *tensors[i], grads.tensors[i], loss, eps, &crossed));
    return out;
}

}  // namespace gateseed::testing
