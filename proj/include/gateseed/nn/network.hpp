#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gateseed/nn/layers.hpp"
#include "gateseed/nn/tensor.hpp"

namespace gateseed::nn {

// Conv stack shape. Every conv block is conv(KxK, same) -> batch norm -> ReLU,
// followed by a 2x2 max pool for the first `pooled_layers` blocks; the result
// is flattened into one dense layer producing the R x C x F grid.
struct Architecture {
    int input_channels = 1;
    int input_height = 120;
    int input_width = 160;
    int conv_layers = 6;
    int channels = 16;
    int kernel = 3;
    int pooled_layers = 5;
    int grid_rows = 4;
    int grid_cols = 3;
    int grid_features = 5;
    double bn_eps = 1e-5;

    static Architecture detector() { return {}; }

    // Shape (C, H, W) of the last conv block output.
    Shape pre_flatten_shape() const;
    int flatten_size() const;
    int output_size() const { return grid_rows * grid_cols * grid_features; }

    void validate() const;
    std::string describe() const;
    // FNV-1a over describe(); stored in checkpoints.
    std::uint64_t digest() const;
};

template <typename T>
struct ConvBlock {
    BasicTensor<T> weight;  // [Co, Ci, K, K]
    BasicTensor<T> bias;    // [Co]
    BasicTensor<T> bn_scale;
    BasicTensor<T> bn_shift;
    BasicTensor<T> running_mean;
    BasicTensor<T> running_var;
};

template <typename T>
struct NetworkParams {
    Architecture arch;
    std::vector<ConvBlock<T>> blocks;
    BasicTensor<T> dense_weight;  // [out, flatten]
    BasicTensor<T> dense_bias;

    // Kaiming-uniform fan-in weights, zero biases, unit scale, zero shift,
    // running statistics (0, 1).
    static NetworkParams init(const Architecture& arch, std::uint64_t seed);
    // All weights and biases zero; batch-norm scale 1 and running var 1.
    static NetworkParams zeros(const Architecture& arch);

    // Trainable tensors in a fixed order (per block: weight, bias, scale,
    // shift; then dense weight, dense bias).
    std::vector<BasicTensor<T>*> trainable();
    std::vector<const BasicTensor<T>*> trainable() const;
    std::vector<std::string> trainable_names() const;
    std::size_t trainable_scalar_count() const;

    // Every tensor including running statistics, with stable names.
    std::vector<std::pair<std::string, const BasicTensor<T>*>> named_tensors() const;
    std::vector<std::pair<std::string, BasicTensor<T>*>> named_tensors();

    template <typename U>
    NetworkParams<U> cast() const {
        NetworkParams<U> out;
        out.arch = arch;
        for (const auto& b : blocks)
            out.blocks.push_back({b.weight.template cast<U>(), b.bias.template cast<U>(),
                                  b.bn_scale.template cast<U>(), b.bn_shift.template cast<U>(),
                                  b.running_mean.template cast<U>(), b.running_var.template cast<U>()});
        out.dense_weight = dense_weight.template cast<U>();
        out.dense_bias = dense_bias.template cast<U>();
        return out;
    }
};

// Gradients in NetworkParams::trainable() order.
template <typename T>
struct Gradients {
    std::vector<BasicTensor<T>> tensors;
};

enum class Mode { Train, Infer };

template <typename T>
struct ForwardCache {
    struct Block {
        BasicTensor<T> input;      // conv input
        BatchNormCache<T> bn;      // train mode only
        BasicTensor<T> activated;  // ReLU output
        std::vector<std::int32_t> argmax;
        bool pooled = false;
    };
    Mode mode = Mode::Infer;
    std::vector<Block> blocks;
    BasicTensor<T> flat;    // [N, C, H, W] input of the dense layer
    BasicTensor<T> output;  // [N, R, C, F] after the heads
    bool valid = false;
};

// input: [N, Ci, H, W] matching the architecture. Returns [N, R, C, F].
// Batch norm uses batch statistics in Train mode and running statistics in
// Infer mode. Running statistics are never modified here.
template <typename T>
BasicTensor<T> forward(const NetworkParams<T>& params, const BasicTensor<T>& input, Mode mode,
                       ForwardCache<T>* cache = nullptr);

// Reverse pass from dL/d(output). Requires a cache filled by a Train-mode forward.
template <typename T>
Gradients<T> backward(const NetworkParams<T>& params, const ForwardCache<T>& cache, const BasicTensor<T>& grad_output);

// running = momentum * running + (1 - momentum) * batch, with the unbiased
// batch variance.
template <typename T>
void update_running_stats(NetworkParams<T>& params, const ForwardCache<T>& cache, double momentum);

}  // namespace gateseed::nn
