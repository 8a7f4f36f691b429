#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "gateseed/common/errors.hpp"
#include "gateseed/nn/adam.hpp"
#include "gateseed/nn/checkpoint.hpp"
#include "gateseed/nn/grid.hpp"
#include "gateseed/nn/trainer.hpp"
#include "gradcheck.hpp"

using namespace gateseed;
using namespace gateseed::nn;
using gateseed::testing::DTensor;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "gateseed_nn";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::vector<TrainingSample> tiny_dataset(int n, int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> px(0, 255);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<TrainingSample> out;
    for (int i = 0; i < n; ++i) {
        TrainingSample s;
        s.input = imagecore::Image(w, h, 1);
        for (auto& v : s.input.data()) v = static_cast<std::uint8_t>(px(rng));
        GateLabelSet labels{{u(rng) * (w - 1), u(rng) * (h - 1), 1.0 + 8.0 * u(rng), u(rng) - 0.5}};
        EncodedLabels enc = encode_grid_labels(labels, {w, h}, 12.0);
        s.target = enc.target;
        s.mask = enc.mask;
        out.push_back(std::move(s));
    }
    return out;
}

Architecture small_arch(int w, int h) {
    Architecture a;
    a.input_width = w;
    a.input_height = h;
    a.conv_layers = 2;
    a.channels = 4;
    a.pooled_layers = 2;
    return a;
}

}  // namespace

TEST(GradientCheck, EveryLayerType) {
    for (const auto& r : gateseed::testing::check_layers(21)) {
        EXPECT_LT(r.max_rel, 1e-3) << r.name;
        EXPECT_GT(r.checked, 0u) << r.name;
    }
}

TEST(GradientCheck, ReducedNetwork) {
    for (std::uint64_t seed : {5u, 7u}) {
        auto results = gateseed::testing::check_reduced_network(seed);
        EXPECT_EQ(results.size(), 2u * 4u + 2u);
        for (const auto& r : results) {
            EXPECT_LT(r.max_rel, 1e-3) << r.name;
            // at least half of every tensor lies clear of kinks
            EXPECT_GE(r.checked, r.skipped) << r.name;
        }
    }
}

TEST(GradientCheck, ReducedNetworkSmallStep) {
    // a finer stencil shrinks the truncation term well below the floor
    for (const auto& r : gateseed::testing::check_reduced_network(4, 1e-5)) EXPECT_LT(r.max_rel, 1e-4) << r.name;
}

TEST(Backward, ZeroLossGradientGivesZeroGradients) {
    auto params = NetworkParams<double>::init(gateseed::testing::reduced_architecture(), 3);
    std::mt19937_64 rng(1);
    DTensor x = gateseed::testing::random_tensor({2, 1, 8, 8}, rng, 0, 1);
    ForwardCache<double> cache;
    DTensor y = forward(params, x, Mode::Train, &cache);
    Gradients<double> g = backward(params, cache, DTensor(y.shape()));
    for (const auto& t : g.tensors)
        for (double v : t.values()) EXPECT_EQ(v, 0.0);
}

TEST(Backward, LinearInTheLossGradient) {
    auto params = NetworkParams<double>::init(gateseed::testing::reduced_architecture(), 4);
    std::mt19937_64 rng(2);
    DTensor x = gateseed::testing::random_tensor({2, 1, 8, 8}, rng, 0, 1);
    ForwardCache<double> cache;
    DTensor y = forward(params, x, Mode::Train, &cache);
    DTensor dy = gateseed::testing::random_tensor(y.shape(), rng);
    DTensor dy2 = dy;
    for (auto& v : dy2.values()) v *= 2.0;
    auto g1 = backward(params, cache, dy);
    auto g2 = backward(params, cache, dy2);
    for (std::size_t t = 0; t < g1.tensors.size(); ++t)
        for (std::size_t i = 0; i < g1.tensors[t].size(); ++i) EXPECT_EQ(g2.tensors[t][i], 2.0 * g1.tensors[t][i]);
}

TEST(Backward, RequiresTrainCache) {
    auto params = NetworkParams<double>::init(gateseed::testing::reduced_architecture(), 4);
    DTensor x({1, 1, 8, 8}, 0.5);
    ForwardCache<double> cache;
    DTensor y = forward(params, x, Mode::Infer, &cache);
    EXPECT_THROW(backward(params, cache, y), StateError);
}

TEST(Architecture, ShapeContract) {
    Architecture a = Architecture::detector();
    EXPECT_EQ(a.pre_flatten_shape(), (Shape{16, 3, 5}));
    EXPECT_EQ(a.flatten_size(), 240);
    EXPECT_EQ(a.output_size(), 60);
    auto params = NetworkParams<float>::init(a, 1);
    EXPECT_EQ(params.dense_weight.shape(), (Shape{60, 240}));
    Tensor x({2, 1, 120, 160}, 0.3f);
    ForwardCache<float> cache;
    Tensor y = forward(params, x, Mode::Train, &cache);
    EXPECT_EQ(y.shape(), (Shape{2, 4, 3, 5}));
    EXPECT_EQ(cache.flat.shape(), (Shape{2, 16, 3, 5}));
    EXPECT_THROW(forward(params, Tensor({1, 1, 100, 160}), Mode::Infer), ShapeError);
}

TEST(Architecture, ZeroNetworkHeads) {
    auto params = NetworkParams<float>::zeros(Architecture::detector());
    Tensor y = forward(params, Tensor({1, 1, 120, 160}, 0.7f), Mode::Infer);
    GridPrediction g = grid_from_output(y, 0);
    for (int c = 0; c < kGridCells; ++c) {
        EXPECT_FLOAT_EQ(g.at(c, kFeatureX), 0.5f);
        EXPECT_FLOAT_EQ(g.at(c, kFeatureY), 0.5f);
        EXPECT_FLOAT_EQ(g.at(c, kFeatureConfidence), 0.5f);
        EXPECT_FLOAT_EQ(g.at(c, kFeatureDistance), 0.0f);
        EXPECT_FLOAT_EQ(g.at(c, kFeatureYaw), 0.0f);
    }
}

TEST(Architecture, Validation) {
    Architecture a;
    a.kernel = 4;
    EXPECT_THROW(a.validate(), InvalidArgument);
    a = Architecture{};
    a.pooled_layers = 9;
    EXPECT_THROW(a.validate(), InvalidArgument);
    EXPECT_NE(Architecture{}.digest(), gateseed::testing::reduced_architecture().digest());
}

TEST(Loss, HandValues) {
    GridPrediction p, t;
    GridMask empty{};
    LossWeights w;
    EXPECT_EQ(compute_loss(p, p, empty, w).total, 0.0);

    for (int c = 0; c < kGridCells; ++c) p.at(c, kFeatureConfidence) = 0.5f;
    LossBreakdown l = compute_loss(p, t, empty, w);
    EXPECT_NEAR(l.c, 1.5, 1e-12);
    EXPECT_EQ(l.xy, 0.0);
    EXPECT_EQ(l.d, 0.0);
    EXPECT_EQ(l.theta, 0.0);

    GridPrediction q, tq;
    GridMask one{};
    one[4] = 1;
    tq.at(4, kFeatureConfidence) = 1.0f;
    q.at(4, kFeatureConfidence) = 1.0f;
    q.at(4, kFeatureX) = 0.1f;
    EXPECT_NEAR(compute_loss(q, tq, one, w).xy, 0.01, 1e-8);
}

TEST(Loss, BatchMatchesPerSample) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<GridPrediction> targets(4), preds(4);
    std::vector<GridMask> masks(4);
    Tensor out({4, 4, 3, 5});
    for (int s = 0; s < 4; ++s) {
        for (int i = 0; i < kGridValues; ++i) {
            targets[static_cast<std::size_t>(s)].values[static_cast<std::size_t>(i)] = static_cast<float>(u(rng));
            preds[static_cast<std::size_t>(s)].values[static_cast<std::size_t>(i)] = static_cast<float>(u(rng));
            out[static_cast<std::size_t>(s * kGridValues + i)] = preds[static_cast<std::size_t>(s)].values[static_cast<std::size_t>(i)];
        }
        for (auto& m : masks[static_cast<std::size_t>(s)]) m = u(rng) < 0.3;
    }
    LossWeights w{2.0, 3.0, 0.5, 1.0, 0.25};
    double mean = 0;
    for (int s = 0; s < 4; ++s)
        mean += compute_loss(preds[static_cast<std::size_t>(s)], targets[static_cast<std::size_t>(s)],
                             masks[static_cast<std::size_t>(s)], w).total / 4;
    EXPECT_NEAR(batch_loss(out, std::span<const GridPrediction>(targets), std::span<const GridMask>(masks), w).total,
                mean, 1e-9);
    EXPECT_THROW((LossWeights{1, 1, 1, 1, 1.5}.validate()), InvalidArgument);
}

TEST(Adam, FirstStepHandValue) {
    std::vector<double> p{0.5}, g{1.0}, m{0.0}, v{0.0};
    adam_update<double>(p, g, m, v, 1, 0.01, AdamConfig{});
    // m_hat = v_hat = 1, step = lr * 1 / (1 + eps)
    EXPECT_NEAR(p[0], 0.5 - 0.01 / (1.0 + 1e-8), 1e-15);
    EXPECT_NEAR(m[0], 0.1, 1e-15);
    EXPECT_NEAR(v[0], 0.001, 1e-15);
}

TEST(Adam, TwoStepReference) {
    // independent scalar recomputation of the bias-corrected rule
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.003;
    std::vector<double> p{1.0, -2.0}, m{0, 0}, v{0, 0};
    std::vector<std::vector<double>> grads{{0.3, -1.5}, {-0.2, 0.7}};
    std::vector<double> rp = p, rm = m, rv = v;
    for (int t = 1; t <= 2; ++t) {
        adam_update<double>(p, grads[static_cast<std::size_t>(t - 1)], m, v, t, lr, AdamConfig{});
        for (std::size_t i = 0; i < 2; ++i) {
            double gi = grads[static_cast<std::size_t>(t - 1)][i];
            rm[i] = b1 * rm[i] + (1 - b1) * gi;
            rv[i] = b2 * rv[i] + (1 - b2) * gi * gi;
            double mh = rm[i] / (1 - std::pow(b1, t)), vh = rv[i] / (1 - std::pow(b2, t));
            rp[i] -= lr * mh / (std::sqrt(vh) + eps);
        }
    }
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(p[i], rp[i], 1e-14);
}

TEST(Adam, ZeroGradientLeavesParametersAndDecaysMoments) {
    std::vector<double> p{0.25}, g{0.0}, m{0.4}, v{0.09};
    adam_update<double>(p, g, m, v, 3, 0.01, AdamConfig{});
    EXPECT_NEAR(m[0], 0.36, 1e-15);
    EXPECT_NEAR(v[0], 0.09 * 0.999, 1e-15);
    // nonzero moments still move the parameter: only fresh zero state stays put
    std::vector<double> p2{0.25}, m2{0.0}, v2{0.0};
    adam_update<double>(p2, g, m2, v2, 1, 0.01, AdamConfig{});
    EXPECT_EQ(p2[0], 0.25);
}

TEST(Adam, StepCounterAndDeterminism) {
    auto a = NetworkParams<float>::init(gateseed::testing::reduced_architecture(), 9);
    auto b = a;
    auto sa = AdamState<float>::for_params(a);
    auto sb = AdamState<float>::for_params(b);
    Gradients<float> g;
    for (const auto* t : a.trainable()) g.tensors.emplace_back(t->shape(), 0.01f);
    adam_step(a, g, sa, 0.01);
    adam_step(b, g, sb, 0.01);
    EXPECT_EQ(sa.step, 1);
    EXPECT_EQ(a.dense_weight, b.dense_weight);
    EXPECT_NE(a.dense_weight, NetworkParams<float>::init(gateseed::testing::reduced_architecture(), 9).dense_weight);
}

TEST(LearningRate, StepSchedule) {
    EXPECT_DOUBLE_EQ(lr_at_epoch(0), 0.01);
    EXPECT_DOUBLE_EQ(lr_at_epoch(4), 0.01);
    EXPECT_NEAR(lr_at_epoch(5), 0.001, 1e-15);
    EXPECT_NEAR(lr_at_epoch(7), 0.001, 1e-15);
    EXPECT_NEAR(lr_at_epoch(8), 0.0001, 1e-16);
    EXPECT_NEAR(lr_at_epoch(9), 0.0001, 1e-16);
    std::vector<int> ms{2};
    EXPECT_NEAR(lr_at_epoch(3, 0.1, ms, 0.5), 0.05, 1e-15);
    EXPECT_THROW(lr_at_epoch(-1), InvalidArgument);
}

TEST(Grid, EncodeHandValues) {
    GateLabelSet labels{{100, 70, 6.0, 0.5}};
    EncodedLabels e = encode_grid_labels(labels, {160, 120}, 12.0);
    int cell = 2 * kGridCols + 1;
    EXPECT_EQ(e.mask[static_cast<std::size_t>(cell)], 1);
    EXPECT_NEAR(e.target.at(2, 1, kFeatureX), (100 - 160.0 / 3) / (160.0 / 3), 1e-6);
    EXPECT_NEAR(e.target.at(2, 1, kFeatureY), (70 - 60.0) / 30.0, 1e-6);
    EXPECT_NEAR(e.target.at(2, 1, kFeatureDistance), 0.5, 1e-7);
    EXPECT_NEAR(e.target.at(2, 1, kFeatureYaw), 0.5 / (M_PI / 2), 1e-6);
    EXPECT_FLOAT_EQ(e.target.at(2, 1, kFeatureConfidence), 1.0f);

    EncodedLabels corner = encode_grid_labels({{0, 0, 3, 0}}, {160, 120}, 12.0);
    EXPECT_EQ(corner.mask[0], 1);
    EXPECT_EQ(corner.target.at(0, 0, kFeatureX), 0.0f);

    EncodedLabels none = encode_grid_labels({}, {160, 120}, 12.0);
    EXPECT_EQ(none.target, GridPrediction{});
    for (auto m : none.mask) EXPECT_EQ(m, 0);
}

TEST(Grid, CollisionKeepsNearerGate) {
    EncodedLabels e = encode_grid_labels({{10, 10, 8, 0}, {12, 11, 3, 0}}, {160, 120}, 12.0);
    EXPECT_EQ(e.collisions, 1);
    EXPECT_NEAR(e.target.at(0, 0, kFeatureDistance), 3.0 / 12.0, 1e-7);
}

TEST(Grid, ClippingAndValidation) {
    EncodedLabels e = encode_grid_labels({{50, 50, 20, 2.5}}, {160, 120}, 12.0);
    EXPECT_FLOAT_EQ(e.target.at(1, 0, kFeatureDistance), 1.0f);
    EXPECT_FLOAT_EQ(e.target.at(1, 0, kFeatureYaw), 1.0f);
    EXPECT_THROW(encode_grid_labels({{160.5, 50, 3, 0}}, {160, 120}, 12.0), ValidationError);
    EXPECT_THROW(encode_grid_labels({{10, 50, 0, 0}}, {160, 120}, 12.0), ValidationError);
    EXPECT_THROW(encode_grid_labels({}, {160, 120}, 0.0), InvalidArgument);
}

TEST(Grid, DecodeRoundTripAndThresholds) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uu(0, 159.99), uv(0, 119.99), ud(0.5, 12), ut(-1.5, 1.5);
    for (int i = 0; i < 200; ++i) {
        GateLabel g{uu(rng), uv(rng), ud(rng), ut(rng)};
        auto e = encode_grid_labels({g}, {160, 120}, 12.0);
        auto obs = decode_predictions(e.target, 0.5, {160, 120}, 12.0);
        ASSERT_EQ(obs.size(), 1u);
        EXPECT_LT(std::abs(obs[0].u - g.u), 0.5);
        EXPECT_LT(std::abs(obs[0].v - g.v), 0.5);
        EXPECT_NEAR(obs[0].distance, g.d, 1e-5);
        EXPECT_NEAR(obs[0].yaw, g.theta, 1e-5);
    }
    GridPrediction low;
    for (int c = 0; c < kGridCells; ++c) low.at(c, kFeatureConfidence) = 0.2f;
    EXPECT_TRUE(decode_predictions(low, 0.5, {160, 120}, 12.0).empty());
    EXPECT_EQ(decode_predictions(low, 0.0, {160, 120}, 12.0).size(), 12u);
    EXPECT_THROW(decode_predictions(low, 1.1, {160, 120}, 12.0), InvalidArgument);
}

TEST(Checkpoint, RoundTripWithOptimizerState) {
    auto params = NetworkParams<float>::init(Architecture::detector(), 17);
    params.blocks[0].running_mean[3] = 0.25f;
    auto adam = AdamState<float>::for_params(params);
    adam.step = 42;
    adam.m[0][0] = 0.5f;
    auto path = temp_file("ok.ckpt").string();
    save_checkpoint(path, params, &adam);
    Checkpoint ck = load_checkpoint(path);
    auto a = params.named_tensors();
    auto b = ck.params.named_tensors();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].first, b[i].first);
        EXPECT_EQ(*a[i].second, *b[i].second) << a[i].first;
    }
    ASSERT_TRUE(ck.adam.has_value());
    EXPECT_EQ(ck.adam->step, 42);
    EXPECT_EQ(ck.adam->m[0][0], 0.5f);

    save_checkpoint(path, params);
    EXPECT_FALSE(load_checkpoint(path).adam.has_value());
}

TEST(Checkpoint, CorruptionIsDetected) {
    auto params = NetworkParams<float>::init(Architecture::detector(), 2);
    auto path = temp_file("good.ckpt").string();
    save_checkpoint(path, params);
    std::ifstream in(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), {});

    auto write = [](const std::string& p, const std::vector<char>& b) {
        std::ofstream out(p, std::ios::binary);
        out.write(b.data(), static_cast<std::streamsize>(b.size()));
    };
    auto bad = bytes;
    bad[0] = 'X';
    write(temp_file("magic.ckpt").string(), bad);
    EXPECT_THROW(load_checkpoint(temp_file("magic.ckpt").string()), IoError);

    bad = bytes;
    bad.resize(bad.size() / 2);
    write(temp_file("trunc.ckpt").string(), bad);
    EXPECT_THROW(load_checkpoint(temp_file("trunc.ckpt").string()), IoError);

    EXPECT_THROW(load_checkpoint(path, gateseed::testing::reduced_architecture()), InvalidArgument);
    EXPECT_THROW(load_checkpoint(temp_file("missing.ckpt").string()), IoError);
}

TEST(Trainer, ZeroEpochsLeaveParameters) {
    auto data = tiny_dataset(4, 16, 16, 1);
    auto params = NetworkParams<float>::init(small_arch(16, 16), 1);
    auto before = params;
    auto adam = AdamState<float>::for_params(params);
    TrainConfig cfg;
    cfg.epochs = 0;
    EXPECT_TRUE(train(data, params, adam, cfg).history.empty());
    EXPECT_EQ(params.dense_weight, before.dense_weight);
}

TEST(Trainer, SameSeedSameLog) {
    auto data = tiny_dataset(12, 16, 16, 2);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 4;
    cfg.seed = 5;
    auto run = [&] {
        auto params = NetworkParams<float>::init(small_arch(16, 16), 3);
        auto adam = AdamState<float>::for_params(params);
        auto r = train(data, params, adam, cfg);
        return std::pair{r, params};
    };
    auto [r1, p1] = run();
    auto [r2, p2] = run();
    ASSERT_EQ(r1.history.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r1.history[i].mean.total, r2.history[i].mean.total);
    EXPECT_EQ(p1.dense_weight, p2.dense_weight);
    EXPECT_NEAR(r1.history[0].lr, 0.01, 1e-15);
}

TEST(Trainer, OverfitsEightImages) {
    auto data = tiny_dataset(8, 16, 16, 3);
    auto params = NetworkParams<float>::init(small_arch(16, 16), 4);
    auto adam = AdamState<float>::for_params(params);
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 8;
    cfg.lr_milestones = {150, 180};
    cfg.initial_lr = 0.003;
    auto r = train(data, params, adam, cfg);
    EXPECT_LT(r.history.back().mean.xy, 1e-3);
}

TEST(Trainer, RejectsBadInput) {
    auto params = NetworkParams<float>::init(small_arch(16, 16), 1);
    auto adam = AdamState<float>::for_params(params);
    TrainConfig cfg;
    EXPECT_THROW(train({}, params, adam, cfg), InvalidArgument);
    auto data = tiny_dataset(2, 16, 16, 1);
    cfg.batch_size = 0;
    EXPECT_THROW(train(data, params, adam, cfg), InvalidArgument);
}

TEST(Trainer, PredictMatchesInferForward) {
    auto params = NetworkParams<float>::init(small_arch(16, 16), 8);
    auto data = tiny_dataset(5, 16, 16, 4);
    std::vector<imagecore::Image> imgs;
    for (auto& s : data) imgs.push_back(s.input);
    auto preds = predict(params, imgs, 2);
    Tensor y = forward(params, make_batch(imgs), Mode::Infer);
    // batch size changes the GEMM blocking, so compare to float round-off
    for (int n = 0; n < 5; ++n) {
        GridPrediction g = grid_from_output(y, n);
        for (int cell = 0; cell < kGridCells; ++cell)
            for (int f = 0; f < kGridFeatures; ++f)
                EXPECT_NEAR(preds[static_cast<std::size_t>(n)].at(cell, f), g.at(cell, f), 1e-5);
    }
}
