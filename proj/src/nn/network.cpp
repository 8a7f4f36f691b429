#include "gateseed/nn/network.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace gateseed::nn {

Shape Architecture::pre_flatten_shape() const {
    int h = input_height;
    int w = input_width;
    for (int i = 0; i < pooled_layers; ++i) {
        h /= 2;
        w /= 2;
    }
    return {channels, h, w};
}

int Architecture::flatten_size() const {
    return static_cast<int>(shape_size(pre_flatten_shape()));
}

void Architecture::validate() const {
    if (input_channels < 1 || input_height < 1 || input_width < 1 || conv_layers < 1 || channels < 1)
        throw InvalidArgument("architecture sizes must be positive");
    if (kernel < 1 || kernel % 2 == 0) throw InvalidArgument("conv kernel must be odd");
    if (pooled_layers < 0 || pooled_layers > conv_layers)
        throw InvalidArgument("pooled layer count must lie in [0, conv_layers]");
    if (flatten_size() < 1) throw InvalidArgument("input too small for the pooling depth: " + describe());
    if (grid_rows < 1 || grid_cols < 1 || grid_features < 1) throw InvalidArgument("grid sizes must be positive");
    if (!(bn_eps > 0.0)) throw InvalidArgument("batch-norm epsilon must be positive");
}

std::string Architecture::describe() const {
    std::ostringstream s;
    s << "in=" << input_channels << 'x' << input_height << 'x' << input_width << ";conv=" << conv_layers << 'x'
      << channels << "@k" << kernel << ";pool=" << pooled_layers << ";grid=" << grid_rows << 'x' << grid_cols
      << 'x' << grid_features << ";bn_eps=" << bn_eps << ";heads=sig,sig,id,tanh,sig";
    return s.str();
}

std::uint64_t Architecture::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : describe()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

template <typename T>
NetworkParams<T> NetworkParams<T>::init(const Architecture& arch, std::uint64_t seed) {
    arch.validate();
    std::mt19937_64 rng(seed);
    auto kaiming = [&](BasicTensor<T>& t, int fan_in) {
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        const double bound = std::sqrt(6.0 / fan_in);
        for (auto& v : t.values()) v = static_cast<T>(bound * dist(rng));
    };
    NetworkParams p = zeros(arch);
    int in = arch.input_channels;
    for (auto& b : p.blocks) {
        kaiming(b.weight, in * arch.kernel * arch.kernel);
        in = arch.channels;
    }
    kaiming(p.dense_weight, arch.flatten_size());
    return p;
}

template <typename T>
NetworkParams<T> NetworkParams<T>::zeros(const Architecture& arch) {
    arch.validate();
    NetworkParams p;
    p.arch = arch;
    int in = arch.input_channels;
    for (int i = 0; i < arch.conv_layers; ++i) {
        const int c = arch.channels;
        p.blocks.push_back({BasicTensor<T>({c, in, arch.kernel, arch.kernel}), BasicTensor<T>({c}),
                            BasicTensor<T>({c}, T(1)), BasicTensor<T>({c}), BasicTensor<T>({c}),
                            BasicTensor<T>({c}, T(1))});
        in = c;
    }
    p.dense_weight = BasicTensor<T>({arch.output_size(), arch.flatten_size()});
    p.dense_bias = BasicTensor<T>({arch.output_size()});
    return p;
}

template <typename T>
std::vector<BasicTensor<T>*> NetworkParams<T>::trainable() {
    std::vector<BasicTensor<T>*> out;
    for (auto& b : blocks) {
        out.push_back(&b.weight);
        out.push_back(&b.bias);
        out.push_back(&b.bn_scale);
        out.push_back(&b.bn_shift);
    }
    out.push_back(&dense_weight);
    out.push_back(&dense_bias);
    return out;
}

template <typename T>
std::vector<const BasicTensor<T>*> NetworkParams<T>::trainable() const {
    auto mut = const_cast<NetworkParams*>(this)->trainable();
    return {mut.begin(), mut.end()};
}

template <typename T>
std::vector<std::string> NetworkParams<T>::trainable_names() const {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const std::string p = "conv" + std::to_string(i + 1) + ".";
        names.push_back(p + "weight");
        names.push_back(p + "bias");
        names.push_back(p + "bn_scale");
        names.push_back(p + "bn_shift");
    }
    names.push_back("dense.weight");
    names.push_back("dense.bias");
    return names;
}

template <typename T>
std::size_t NetworkParams<T>::trainable_scalar_count() const {
    std::size_t n = 0;
    for (const auto* t : trainable()) n += t->size();
    return n;
}

template <typename T>
std::vector<std::pair<std::string, BasicTensor<T>*>> NetworkParams<T>::named_tensors() {
    std::vector<std::pair<std::string, BasicTensor<T>*>> out;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const std::string p = "conv" + std::to_string(i + 1) + ".";
        auto& b = blocks[i];
        out.emplace_back(p + "weight", &b.weight);
        out.emplace_back(p + "bias", &b.bias);
        out.emplace_back(p + "bn_scale", &b.bn_scale);
        out.emplace_back(p + "bn_shift", &b.bn_shift);
        out.emplace_back(p + "running_mean", &b.running_mean);
        out.emplace_back(p + "running_var", &b.running_var);
    }
    out.emplace_back("dense.weight", &dense_weight);
    out.emplace_back("dense.bias", &dense_bias);
    return out;
}

template <typename T>
std::vector<std::pair<std::string, const BasicTensor<T>*>> NetworkParams<T>::named_tensors() const {
    auto mut = const_cast<NetworkParams*>(this)->named_tensors();
    return {mut.begin(), mut.end()};
}

template <typename T>
BasicTensor<T> forward(const NetworkParams<T>& params, const BasicTensor<T>& input, Mode mode,
                       ForwardCache<T>* cache) {
    const Architecture& arch = params.arch;
    if (input.rank() != 4 || input.dim(1) != arch.input_channels || input.dim(2) != arch.input_height ||
        input.dim(3) != arch.input_width)
        throw ShapeError("network input must be (N," + std::to_string(arch.input_channels) + "," +
                         std::to_string(arch.input_height) + "," + std::to_string(arch.input_width) + "), got " +
                         shape_string(input.shape()));
    const int n = input.dim(0);
    const T eps = static_cast<T>(arch.bn_eps);

    if (cache) {
        cache->mode = mode;
        cache->blocks.assign(params.blocks.size(), {});
        cache->valid = false;
    }

    BasicTensor<T> x = input;
    for (std::size_t i = 0; i < params.blocks.size(); ++i) {
        const auto& b = params.blocks[i];
        BasicTensor<T> z = conv2d_forward(x, b.weight, b.bias);
        BasicTensor<T> normed;
        if (mode == Mode::Train) {
            BatchNormCache<T> bn;
            normed = batchnorm_forward_train(z, b.bn_scale, b.bn_shift, eps, bn);
            if (cache) cache->blocks[i].bn = std::move(bn);
        } else {
            normed = batchnorm_forward_infer(z, b.bn_scale, b.bn_shift, b.running_mean, b.running_var, eps);
        }
        BasicTensor<T> a = relu_forward(normed);
        const bool pooled = static_cast<int>(i) < arch.pooled_layers;
        std::vector<std::int32_t> argmax;
        BasicTensor<T> next = pooled ? maxpool2x2_forward(a, argmax) : a;
        if (cache) {
            auto& cb = cache->blocks[i];
            cb.input = std::move(x);
            cb.activated = std::move(a);
            cb.argmax = std::move(argmax);
            cb.pooled = pooled;
        }
        x = std::move(next);
    }

    Shape expected{n};
    for (int d : arch.pre_flatten_shape()) expected.push_back(d);
    require_shape(x, expected, "pre-flatten activation");

    BasicTensor<T> logits = dense_forward(x, params.dense_weight, params.dense_bias);
    BasicTensor<T> out = heads_forward(logits);
    out.reshape({n, arch.grid_rows, arch.grid_cols, arch.grid_features});
    if (!out.all_finite()) throw NumericError("network output contains non-finite values");

    if (cache) {
        cache->flat = std::move(x);
        cache->output = out;
        cache->valid = true;
    }
    return out;
}

template <typename T>
Gradients<T> backward(const NetworkParams<T>& params, const ForwardCache<T>& cache, const BasicTensor<T>& grad_output) {
    if (!cache.valid || cache.mode != Mode::Train)
        throw StateError("backward requires the cache of a train-mode forward pass");
    require_shape(grad_output, cache.output.shape(), "output gradient");
    const int n = cache.output.dim(0);

    Gradients<T> grads;
    grads.tensors.resize(params.blocks.size() * 4 + 2);

    BasicTensor<T> dy = grad_output;
    dy.reshape({n, params.arch.output_size()});
    BasicTensor<T> y = cache.output;
    y.reshape({n, params.arch.output_size()});
    BasicTensor<T> dlogits = heads_backward(y, dy);

    BasicTensor<T> dflat;
    const std::size_t dense_at = params.blocks.size() * 4;
    dense_backward(cache.flat, params.dense_weight, dlogits, &dflat, grads.tensors[dense_at],
                   grads.tensors[dense_at + 1]);
    dflat.reshape(cache.flat.shape());

    BasicTensor<T> grad = std::move(dflat);
    for (std::size_t i = params.blocks.size(); i-- > 0;) {
        const auto& cb = cache.blocks[i];
        const auto& b = params.blocks[i];
        if (cb.pooled) grad = maxpool2x2_backward(grad, cb.argmax, cb.activated.shape());
        BasicTensor<T> dnormed = relu_backward(cb.activated, grad);
        BasicTensor<T> dz = batchnorm_backward(dnormed, b.bn_scale, cb.bn, grads.tensors[4 * i + 2],
                                               grads.tensors[4 * i + 3]);
        BasicTensor<T> dx;
        conv2d_backward(cb.input, b.weight, dz, i > 0 ? &dx : nullptr, grads.tensors[4 * i],
                        grads.tensors[4 * i + 1]);
        grad = std::move(dx);
    }
    return grads;
}

template <typename T>
void update_running_stats(NetworkParams<T>& params, const ForwardCache<T>& cache, double momentum) {
    if (!cache.valid || cache.mode != Mode::Train)
        throw StateError("running statistics need a train-mode forward cache");
    for (std::size_t i = 0; i < params.blocks.size(); ++i) {
        auto& b = params.blocks[i];
        const auto& bn = cache.blocks[i].bn;
        const double count = static_cast<double>(bn.count);
        const double unbias = count > 1.0 ? count / (count - 1.0) : 1.0;
        for (std::size_t c = 0; c < bn.mean.size(); ++c) {
            b.running_mean[c] = static_cast<T>(momentum * b.running_mean[c] + (1.0 - momentum) * bn.mean[c]);
            b.running_var[c] = static_cast<T>(momentum * b.running_var[c] + (1.0 - momentum) * bn.var[c] * unbias);
        }
    }
}

template struct NetworkParams<float>;
template struct NetworkParams<double>;
template BasicTensor<float> forward(const NetworkParams<float>&, const BasicTensor<float>&, Mode, ForwardCache<float>*);
template BasicTensor<double> forward(const NetworkParams<double>&, const BasicTensor<double>&, Mode,
                                     ForwardCache<double>*);
template Gradients<float> backward(const NetworkParams<float>&, const ForwardCache<float>&, const BasicTensor<float>&);
template Gradients<double> backward(const NetworkParams<double>&, const ForwardCache<double>&,
                                    const BasicTensor<double>&);
template void update_running_stats(NetworkParams<float>&, const ForwardCache<float>&, double);
template void update_running_stats(NetworkParams<double>&, const ForwardCache<double>&, double);

}  // namespace gateseed::nn
