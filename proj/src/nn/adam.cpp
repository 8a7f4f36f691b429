#include "gateseed/nn/adam.hpp"

#include <array>
#include <cmath>
#include <string>

namespace gateseed::nn {

template <typename T>
AdamState<T> AdamState<T>::for_params(const NetworkParams<T>& params) {
    AdamState s;
    for (const auto* t : params.trainable()) {
        s.m.emplace_back(t->shape());
        s.v.emplace_back(t->shape());
    }
    return s;
}

template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v, std::int64_t step,
                 double lr, const AdamConfig& cfg) {
    if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size())
        throw ShapeError("adam buffers do not match the parameter size");
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        const double mi = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        const double vi = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        param[i] = static_cast<T>(param[i] - lr * (mi / bc1) / (std::sqrt(vi / bc2) + cfg.eps));
    }
}

template <typename T>
void adam_step(NetworkParams<T>& params, const Gradients<T>& grads, AdamState<T>& state, double lr,
               const AdamConfig& cfg) {
    auto tensors = params.trainable();
    if (grads.tensors.size() != tensors.size() || state.m.size() != tensors.size() || state.v.size() != tensors.size())
        throw ShapeError("gradient list has " + std::to_string(grads.tensors.size()) + " tensors, parameters have " +
                         std::to_string(tensors.size()));
    if (state.step < 0) throw StateError("negative adam step counter");
    ++state.step;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        if (grads.tensors[i].shape() != tensors[i]->shape())
            throw ShapeError("gradient " + std::to_string(i) + " has shape " + shape_string(grads.tensors[i].shape()) +
                             ", parameter has " + shape_string(tensors[i]->shape()));
        adam_update<T>(tensors[i]->values(), grads.tensors[i].values(), state.m[i].values(), state.v[i].values(),
                       state.step, lr, cfg);
    }
}

double lr_at_epoch(int epoch, double initial_lr, std::span<const int> milestones, double factor) {
    if (epoch < 0) throw InvalidArgument("epoch must be non-negative");
    static constexpr std::array<int, 2> kDefaultMilestones{5, 8};
    if (milestones.empty()) milestones = kDefaultMilestones;
    double lr = initial_lr;
    for (int m : milestones)
        if (epoch >= m) lr *= factor;
    return lr;
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_update(std::span<float>, std::span<const float>, std::span<float>, std::span<float>, std::int64_t,
                          double, const AdamConfig&);
template void adam_update(std::span<double>, std::span<const double>, std::span<double>, std::span<double>,
                          std::int64_t, double, const AdamConfig&);
template void adam_step(NetworkParams<float>&, const Gradients<float>&, AdamState<float>&, double, const AdamConfig&);
template void adam_step(NetworkParams<double>&, const Gradients<double>&, AdamState<double>&, double,
                        const AdamConfig&);

}  // namespace gateseed::nn
