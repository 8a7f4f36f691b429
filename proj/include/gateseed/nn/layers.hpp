#pragma once

#include <cstdint>
#include <vector>

#include "gateseed/nn/tensor.hpp"

// Layer kernels over NCHW batches. Each forward has a matching backward that
// writes (not accumulates) parameter gradients.
namespace gateseed::nn {

// Same-padded stride-1 convolution. x: [N,Ci,H,W], weight: [Co,Ci,K,K] with
// odd K, bias: [Co].
template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& bias);

// dx may be null when the input gradient is not needed.
template <typename T>
void conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& dy,
                     BasicTensor<T>* dx, BasicTensor<T>& dweight, BasicTensor<T>& dbias);

template <typename T>
struct BatchNormCache {
    BasicTensor<T> xhat;
    std::vector<T> mean;
    std::vector<T> var;  // biased batch variance
    std::vector<T> inv_std;
    std::size_t count = 0;  // elements per channel
};

// Normalizes with batch statistics over (N, H, W).
template <typename T>
BasicTensor<T> batchnorm_forward_train(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                                       const BasicTensor<T>& beta, T eps, BatchNormCache<T>& cache);

template <typename T>
BasicTensor<T> batchnorm_forward_infer(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                                       const BasicTensor<T>& beta, const BasicTensor<T>& running_mean,
                                       const BasicTensor<T>& running_var, T eps);

template <typename T>
BasicTensor<T> batchnorm_backward(const BasicTensor<T>& dy, const BasicTensor<T>& gamma,
                                  const BatchNormCache<T>& cache, BasicTensor<T>& dgamma,
                                  BasicTensor<T>& dbeta);

template <typename T>
BasicTensor<T> relu_forward(const BasicTensor<T>& x);

// Uses the forward output: the gradient passes where y > 0.
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy);

// 2x2 stride-2 max pooling; odd trailing rows/columns are dropped. `argmax`
// receives the flat input index of each selected element.
template <typename T>
BasicTensor<T> maxpool2x2_forward(const BasicTensor<T>& x, std::vector<std::int32_t>& argmax);

template <typename T>
BasicTensor<T> maxpool2x2_backward(const BasicTensor<T>& dy, const std::vector<std::int32_t>& argmax,
                                   const Shape& input_shape);

// x: [N, in] (any trailing shape is flattened), weight: [out, in], bias: [out].
template <typename T>
BasicTensor<T> dense_forward(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& bias);

template <typename T>
void dense_backward(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& dy,
                    BasicTensor<T>* dx, BasicTensor<T>& dweight, BasicTensor<T>& dbias);

// Output heads over groups of five features (x, y, d, theta, c): logistic on
// x, y and c, identity on d, tanh on theta.
template <typename T>
BasicTensor<T> heads_forward(const BasicTensor<T>& z);

template <typename T>
BasicTensor<T> heads_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy);

}  // namespace gateseed::nn
