#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gateseed/nn/network.hpp"

namespace gateseed::nn {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <typename T>
struct AdamState {
    std::vector<BasicTensor<T>> m;
    std::vector<BasicTensor<T>> v;
    std::int64_t step = 0;

    static AdamState for_params(const NetworkParams<T>& params);
};

// One bias-corrected Adam update on a flat parameter block. `step` is the
// 1-based index of this update.
template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v, std::int64_t step,
                 double lr, const AdamConfig& cfg);

// Increments state.step and updates every trainable tensor in place.
template <typename T>
void adam_step(NetworkParams<T>& params, const Gradients<T>& grads, AdamState<T>& state, double lr,
               const AdamConfig& cfg = {});

// Step schedule: initial_lr, multiplied by `factor` at each milestone epoch
// (default 0.01, x0.1 at epochs 5 and 8).
double lr_at_epoch(int epoch, double initial_lr = 0.01, std::span<const int> milestones = {}, double factor = 0.1);

}  // namespace gateseed::nn
