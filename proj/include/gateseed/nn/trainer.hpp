#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gateseed/imagecore/image.hpp"
#include "gateseed/nn/adam.hpp"
#include "gateseed/nn/grid.hpp"
#include "gateseed/nn/loss.hpp"
#include "gateseed/nn/network.hpp"

namespace gateseed::nn {

// A filtered single-channel input image with its encoded grid target.
struct TrainingSample {
    imagecore::Image input;
    GridPrediction target;
    GridMask mask{};
};

struct EpochLog {
    int epoch = 0;
    double lr = 0.0;
    LossBreakdown mean;  // averaged over batches of the epoch
};

struct TrainConfig {
    int epochs = 10;
    int batch_size = 32;
    std::uint64_t seed = 0;
    LossWeights weights;
    double initial_lr = 0.01;
    std::vector<int> lr_milestones{5, 8};
    double lr_factor = 0.1;
    AdamConfig adam;
    double bn_momentum = 0.9;
    std::function<void(const EpochLog&)> on_epoch;  // optional progress hook
};

struct TrainResult {
    std::vector<EpochLog> history;
};

// Packs samples[indices] into a [N, 1, H, W] tensor scaled to [0, 1].
Tensor make_batch(std::span<const TrainingSample> samples, std::span<const std::size_t> indices);
Tensor make_batch(std::span<const imagecore::Image> images);

// Mini-batch Adam training with per-epoch shuffling keyed to cfg.seed and the
// lr_at_epoch schedule. A non-finite loss aborts with NumericError naming the
// epoch, batch and loss terms.
TrainResult train(std::span<const TrainingSample> data, NetworkParams<float>& params, AdamState<float>& adam,
                  const TrainConfig& cfg);

// Inference-mode predictions, evaluated in chunks of `batch_size`.
std::vector<GridPrediction> predict(const NetworkParams<float>& params, std::span<const imagecore::Image> inputs,
                                    int batch_size = 64);

}  // namespace gateseed::nn
