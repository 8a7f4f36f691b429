#include "gateseed/nn/trainer.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace gateseed::nn {
namespace {

// Fisher-Yates with explicit index draws so the order depends only on the seed.
void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace

Tensor make_batch(std::span<const TrainingSample> samples, std::span<const std::size_t> indices) {
    if (indices.empty()) throw InvalidArgument("empty batch");
    const auto& first = samples[indices[0]].input;
    const int h = first.height(), w = first.width();
    Tensor batch({static_cast<int>(indices.size()), 1, h, w});
    const std::size_t plane = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    for (std::size_t b = 0; b < indices.size(); ++b) {
        const auto& img = samples[indices[b]].input;
        if (img.channels() != 1 || img.width() != w || img.height() != h)
            throw ShapeError("training inputs must be single-channel images of equal size");
        auto px = img.data();
        float* dst = batch.data() + b * plane;
        for (std::size_t i = 0; i < plane; ++i) dst[i] = px[i] / 255.0f;
    }
    return batch;
}

Tensor make_batch(std::span<const imagecore::Image> images) {
    if (images.empty()) throw InvalidArgument("empty batch");
    const int h = images[0].height(), w = images[0].width();
    Tensor batch({static_cast<int>(images.size()), 1, h, w});
    const std::size_t plane = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    for (std::size_t b = 0; b < images.size(); ++b) {
        if (images[b].channels() != 1 || images[b].width() != w || images[b].height() != h)
            throw ShapeError("inputs must be single-channel images of equal size");
        auto px = images[b].data();
        float* dst = batch.data() + b * plane;
        for (std::size_t i = 0; i < plane; ++i) dst[i] = px[i] / 255.0f;
    }
    return batch;
}

TrainResult train(std::span<const TrainingSample> data, NetworkParams<float>& params, AdamState<float>& adam,
                  const TrainConfig& cfg) {
    if (data.empty()) throw InvalidArgument("training set is empty");
    if (cfg.batch_size < 1) throw InvalidArgument("batch size must be >= 1");
    if (cfg.epochs < 0) throw InvalidArgument("epoch count must be >= 0");
    cfg.weights.validate();
    if (adam.m.size() != params.trainable().size()) adam = AdamState<float>::for_params(params);

    TrainResult result;
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(data.size());
    std::vector<GridPrediction> targets;
    std::vector<GridMask> masks;
    ForwardCache<float> cache;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle_indices(order, rng);
        const double lr = lr_at_epoch(epoch, cfg.initial_lr, cfg.lr_milestones, cfg.lr_factor);
        EpochLog log{epoch, lr, {}};
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::span<const std::size_t> idx(order.data() + start, end - start);
            const Tensor input = make_batch(data, idx);
            targets.clear();
            masks.clear();
            for (std::size_t i : idx) {
                targets.push_back(data[i].target);
                masks.push_back(data[i].mask);
            }

            const Tensor output = forward(params, input, Mode::Train, &cache);
            Tensor grad;
            const LossBreakdown loss = batch_loss<float>(output, targets, masks, cfg.weights, &grad);
            if (!std::isfinite(loss.total)) {
                std::ostringstream msg;
                msg << "non-finite loss at epoch " << epoch << ", batch " << batches << " (xy=" << loss.xy
                    << " d=" << loss.d << " theta=" << loss.theta << " c=" << loss.c << ")";
                throw NumericError(msg.str(), loss.total);
            }
            const Gradients<float> grads = backward(params, cache, grad);
            adam_step(params, grads, adam, lr, cfg.adam);
            update_running_stats(params, cache, cfg.bn_momentum);

            log.mean.xy += loss.xy;
            log.mean.d += loss.d;
            log.mean.theta += loss.theta;
            log.mean.c += loss.c;
            log.mean.total += loss.total;
            ++batches;
        }
        log.mean.xy /= batches;
        log.mean.d /= batches;
        log.mean.theta /= batches;
        log.mean.c /= batches;
        log.mean.total /= batches;
        result.history.push_back(log);
        if (cfg.on_epoch) cfg.on_epoch(log);
    }
    return result;
}

std::vector<GridPrediction> predict(const NetworkParams<float>& params, std::span<const imagecore::Image> inputs,
                                    int batch_size) {
    std::vector<GridPrediction> out;
    out.reserve(inputs.size());
    for (std::size_t start = 0; start < inputs.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(inputs.size(), start + static_cast<std::size_t>(batch_size));
        const Tensor batch = make_batch(inputs.subspan(start, end - start));
        const Tensor y = forward(params, batch, Mode::Infer);
        for (int n = 0; n < y.dim(0); ++n) out.push_back(grid_from_output(y, n));
    }
    return out;
}

}  // namespace gateseed::nn
