#include "gateseed/nn/layers.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>

#include "gateseed/nn/grid.hpp"

namespace gateseed::nn {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using ConstVecMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

void require_rank(const Shape& s, int rank, const char* what) {
    if (static_cast<int>(s.size()) != rank)
        throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(s));
}

// Unrolls one sample [C,H,W] into [C*K*K, H*W] with zero padding.
template <typename T>
void im2col(const T* x, int channels, int height, int width, int ksize, T* col) {
    const int pad = ksize / 2;
    const int plane = height * width;
    for (int c = 0; c < channels; ++c) {
        for (int ky = 0; ky < ksize; ++ky) {
            for (int kx = 0; kx < ksize; ++kx) {
                T* dst = col + static_cast<std::ptrdiff_t>(((c * ksize + ky) * ksize + kx)) * plane;
                const T* src = x + static_cast<std::ptrdiff_t>(c) * plane;
                const int dx = kx - pad;
                for (int y = 0; y < height; ++y) {
                    const int sy = y + ky - pad;
                    T* row = dst + static_cast<std::ptrdiff_t>(y) * width;
                    if (sy < 0 || sy >= height) {
                        std::fill(row, row + width, T(0));
                        continue;
                    }
                    const T* srow = src + static_cast<std::ptrdiff_t>(sy) * width;
                    const int x0 = std::max(0, -dx);
                    const int x1 = std::min(width, width - dx);
                    for (int x = 0; x < x0; ++x) row[x] = T(0);
                    for (int x = x0; x < x1; ++x) row[x] = srow[x + dx];
                    for (int x = std::max(x1, x0); x < width; ++x) row[x] = T(0);
                }
            }
        }
    }
}

template <typename T>
void col2im_add(const T* col, int channels, int height, int width, int ksize, T* x) {
    const int pad = ksize / 2;
    const int plane = height * width;
    for (int c = 0; c < channels; ++c) {
        for (int ky = 0; ky < ksize; ++ky) {
            for (int kx = 0; kx < ksize; ++kx) {
                const T* src = col + static_cast<std::ptrdiff_t>(((c * ksize + ky) * ksize + kx)) * plane;
                T* dst = x + static_cast<std::ptrdiff_t>(c) * plane;
                const int dx = kx - pad;
                for (int y = 0; y < height; ++y) {
                    const int sy = y + ky - pad;
                    if (sy < 0 || sy >= height) continue;
                    const T* row = src + static_cast<std::ptrdiff_t>(y) * width;
                    T* drow = dst + static_cast<std::ptrdiff_t>(sy) * width;
                    const int x0 = std::max(0, -dx);
                    const int x1 = std::min(width, width - dx);
                    for (int x = x0; x < x1; ++x) drow[x + dx] += row[x];
                }
            }
        }
    }
}

template <typename T>
T logistic(T z) {
    return T(1) / (T(1) + std::exp(-z));
}

}  // namespace

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& bias) {
    require_rank(x.shape(), 4, "conv2d input");
    require_rank(weight.shape(), 4, "conv2d weight");
    const int n = x.dim(0), ci = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int co = weight.dim(0), k = weight.dim(2);
    if (weight.dim(1) != ci || weight.dim(3) != k || k % 2 == 0)
        throw ShapeError("conv2d weight " + shape_string(weight.shape()) + " incompatible with input " +
                         shape_string(x.shape()));
    require_shape(bias, {co}, "conv2d bias");

    const int rows = ci * k * k;
    const int plane = h * w;
    BasicTensor<T> y({n, co, h, w});
    std::vector<T> col(static_cast<std::size_t>(rows) * static_cast<std::size_t>(plane));
    ConstMatMap<T> wm(weight.data(), co, rows);
    ConstVecMap<T> bv(bias.data(), co);
    for (int s = 0; s < n; ++s) {
        im2col(x.data() + static_cast<std::ptrdiff_t>(s) * ci * plane, ci, h, w, k, col.data());
        MatMap<T> ym(y.data() + static_cast<std::ptrdiff_t>(s) * co * plane, co, plane);
        ym.noalias() = wm * ConstMatMap<T>(col.data(), rows, plane);
        ym.colwise() += bv;
    }
    return y;
}

template <typename T>
void conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& dy,
                     BasicTensor<T>* dx, BasicTensor<T>& dweight, BasicTensor<T>& dbias) {
    const int n = x.dim(0), ci = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int co = weight.dim(0), k = weight.dim(2);
    require_shape(dy, {n, co, h, w}, "conv2d output gradient");
    const int rows = ci * k * k;
    const int plane = h * w;

    dweight = BasicTensor<T>(weight.shape());
    dbias = BasicTensor<T>({co});
    if (dx) *dx = BasicTensor<T>(x.shape());

    std::vector<T> col(static_cast<std::size_t>(rows) * static_cast<std::size_t>(plane));
    std::vector<T> dcol(dx ? col.size() : 0);
    ConstMatMap<T> wm(weight.data(), co, rows);
    MatMap<T> dwm(dweight.data(), co, rows);
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> dbv(dbias.data(), co);
    for (int s = 0; s < n; ++s) {
        im2col(x.data() + static_cast<std::ptrdiff_t>(s) * ci * plane, ci, h, w, k, col.data());
        ConstMatMap<T> dym(dy.data() + static_cast<std::ptrdiff_t>(s) * co * plane, co, plane);
        dwm.noalias() += dym * ConstMatMap<T>(col.data(), rows, plane).transpose();
        dbv += dym.rowwise().sum();
        if (dx) {
            MatMap<T>(dcol.data(), rows, plane).noalias() = wm.transpose() * dym;
            col2im_add(dcol.data(), ci, h, w, k, dx->data() + static_cast<std::ptrdiff_t>(s) * ci * plane);
        }
    }
}

template <typename T>
BasicTensor<T> batchnorm_forward_train(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                                       const BasicTensor<T>& beta, T eps, BatchNormCache<T>& cache) {
    require_rank(x.shape(), 4, "batchnorm input");
    const int n = x.dim(0), c = x.dim(1);
    const std::size_t plane = static_cast<std::size_t>(x.dim(2)) * static_cast<std::size_t>(x.dim(3));
    require_shape(gamma, {c}, "batchnorm scale");
    require_shape(beta, {c}, "batchnorm shift");
    const std::size_t count = static_cast<std::size_t>(n) * plane;

    cache.count = count;
    cache.mean.assign(static_cast<std::size_t>(c), T(0));
    cache.var.assign(static_cast<std::size_t>(c), T(0));
    cache.inv_std.assign(static_cast<std::size_t>(c), T(0));
    cache.xhat = BasicTensor<T>(x.shape());
    BasicTensor<T> y(x.shape());

    for (int ch = 0; ch < c; ++ch) {
        double sum = 0.0;
        for (int s = 0; s < n; ++s) {
            const T* p = x.data() + (static_cast<std::size_t>(s) * c + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) sum += p[i];
        }
        const double mean = sum / static_cast<double>(count);
        double sq = 0.0;
        for (int s = 0; s < n; ++s) {
            const T* p = x.data() + (static_cast<std::size_t>(s) * c + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                const double d = p[i] - mean;
                sq += d * d;
            }
        }
        const double var = sq / static_cast<double>(count);
        const T inv_std = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
        const T m = static_cast<T>(mean);
        cache.mean[static_cast<std::size_t>(ch)] = m;
        cache.var[static_cast<std::size_t>(ch)] = static_cast<T>(var);
        cache.inv_std[static_cast<std::size_t>(ch)] = inv_std;
        const T g = gamma[static_cast<std::size_t>(ch)];
        const T b = beta[static_cast<std::size_t>(ch)];
        for (int s = 0; s < n; ++s) {
            const std::size_t off = (static_cast<std::size_t>(s) * c + ch) * plane;
            const T* p = x.data() + off;
            T* xh = cache.xhat.data() + off;
            T* q = y.data() + off;
            for (std::size_t i = 0; i < plane; ++i) {
                xh[i] = (p[i] - m) * inv_std;
                q[i] = g * xh[i] + b;
            }
        }
    }
    return y;
}

template <typename T>
BasicTensor<T> batchnorm_forward_infer(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                                       const BasicTensor<T>& beta, const BasicTensor<T>& running_mean,
                                       const BasicTensor<T>& running_var, T eps) {
    require_rank(x.shape(), 4, "batchnorm input");
    const int n = x.dim(0), c = x.dim(1);
    const std::size_t plane = static_cast<std::size_t>(x.dim(2)) * static_cast<std::size_t>(x.dim(3));
    BasicTensor<T> y(x.shape());
    for (int ch = 0; ch < c; ++ch) {
        const std::size_t k = static_cast<std::size_t>(ch);
        const T scale = gamma[k] / std::sqrt(running_var[k] + eps);
        const T shift = beta[k] - running_mean[k] * scale;
        for (int s = 0; s < n; ++s) {
            const std::size_t off = (static_cast<std::size_t>(s) * c + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) y[off + i] = x[off + i] * scale + shift;
        }
    }
    return y;
}

template <typename T>
BasicTensor<T> batchnorm_backward(const BasicTensor<T>& dy, const BasicTensor<T>& gamma,
                                  const BatchNormCache<T>& cache, BasicTensor<T>& dgamma,
                                  BasicTensor<T>& dbeta) {
    require_shape(dy, cache.xhat.shape(), "batchnorm output gradient");
    const int n = dy.dim(0), c = dy.dim(1);
    const std::size_t plane = static_cast<std::size_t>(dy.dim(2)) * static_cast<std::size_t>(dy.dim(3));
    const double count = static_cast<double>(cache.count);
    dgamma = BasicTensor<T>({c});
    dbeta = BasicTensor<T>({c});
    BasicTensor<T> dx(dy.shape());
    for (int ch = 0; ch < c; ++ch) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int s = 0; s < n; ++s) {
            const std::size_t off = (static_cast<std::size_t>(s) * c + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                sum_dy += dy[off + i];
                sum_dy_xhat += static_cast<double>(dy[off + i]) * cache.xhat[off + i];
            }
        }
        const std::size_t k = static_cast<std::size_t>(ch);
        dgamma[k] = static_cast<T>(sum_dy_xhat);
        dbeta[k] = static_cast<T>(sum_dy);
        const T scale = gamma[k] * cache.inv_std[k];
        const T mean_dy = static_cast<T>(sum_dy / count);
        const T mean_dy_xhat = static_cast<T>(sum_dy_xhat / count);
        for (int s = 0; s < n; ++s) {
            const std::size_t off = (static_cast<std::size_t>(s) * c + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i)
                dx[off + i] = scale * (dy[off + i] - mean_dy - cache.xhat[off + i] * mean_dy_xhat);
        }
    }
    return dx;
}

template <typename T>
BasicTensor<T> relu_forward(const BasicTensor<T>& x) {
    BasicTensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
    return y;
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy) {
    require_shape(dy, y.shape(), "relu output gradient");
    BasicTensor<T> dx(y.shape());
    for (std::size_t i = 0; i < y.size(); ++i) dx[i] = y[i] > T(0) ? dy[i] : T(0);
    return dx;
}

template <typename T>
BasicTensor<T> maxpool2x2_forward(const BasicTensor<T>& x, std::vector<std::int32_t>& argmax) {
    require_rank(x.shape(), 4, "maxpool input");
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int ho = h / 2, wo = w / 2;
    if (ho == 0 || wo == 0) throw ShapeError("maxpool input too small: " + shape_string(x.shape()));
    BasicTensor<T> y({n, c, ho, wo});
    argmax.assign(y.size(), 0);
    std::size_t out = 0;
    for (int p = 0; p < n * c; ++p) {
        const std::size_t base = static_cast<std::size_t>(p) * h * w;
        for (int oy = 0; oy < ho; ++oy) {
            for (int ox = 0; ox < wo; ++ox, ++out) {
                std::size_t best = base + static_cast<std::size_t>(2 * oy) * w + 2 * ox;
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        const std::size_t idx = base + static_cast<std::size_t>(2 * oy + dy) * w + 2 * ox + dx;
                        if (x[idx] > x[best]) best = idx;
                    }
                }
                y[out] = x[best];
                argmax[out] = static_cast<std::int32_t>(best);
            }
        }
    }
    return y;
}

template <typename T>
BasicTensor<T> maxpool2x2_backward(const BasicTensor<T>& dy, const std::vector<std::int32_t>& argmax,
                                   const Shape& input_shape) {
    if (argmax.size() != dy.size()) throw ShapeError("maxpool gradient does not match cached indices");
    BasicTensor<T> dx(input_shape);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[static_cast<std::size_t>(argmax[i])] += dy[i];
    return dx;
}

template <typename T>
BasicTensor<T> dense_forward(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& bias) {
    require_rank(weight.shape(), 2, "dense weight");
    const int n = x.dim(0);
    const int in = static_cast<int>(x.size() / static_cast<std::size_t>(n));
    const int out = weight.dim(0);
    if (weight.dim(1) != in)
        throw ShapeError("dense weight " + shape_string(weight.shape()) + " incompatible with input " +
                         shape_string(x.shape()));
    require_shape(bias, {out}, "dense bias");
    BasicTensor<T> y({n, out});
    MatMap<T> ym(y.data(), n, out);
    ym.noalias() = ConstMatMap<T>(x.data(), n, in) * ConstMatMap<T>(weight.data(), out, in).transpose();
    ym.rowwise() += ConstVecMap<T>(bias.data(), out).transpose();
    return y;
}

template <typename T>
void dense_backward(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& dy,
                    BasicTensor<T>* dx, BasicTensor<T>& dweight, BasicTensor<T>& dbias) {
    const int n = x.dim(0);
    const int in = static_cast<int>(x.size() / static_cast<std::size_t>(n));
    const int out = weight.dim(0);
    require_shape(dy, {n, out}, "dense output gradient");
    ConstMatMap<T> dym(dy.data(), n, out);
    dweight = BasicTensor<T>(weight.shape());
    dbias = BasicTensor<T>({out});
    MatMap<T>(dweight.data(), out, in).noalias() = dym.transpose() * ConstMatMap<T>(x.data(), n, in);
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>(dbias.data(), out) = dym.colwise().sum().transpose();
    if (dx) {
        *dx = BasicTensor<T>(x.shape());
        MatMap<T>(dx->data(), n, in).noalias() = dym * ConstMatMap<T>(weight.data(), out, in);
    }
}

template <typename T>
BasicTensor<T> heads_forward(const BasicTensor<T>& z) {
    if (z.size() % kGridFeatures != 0) throw ShapeError("head input size is not a multiple of 5");
    BasicTensor<T> y(z.shape());
    for (std::size_t i = 0; i < z.size(); ++i) {
        switch (static_cast<int>(i % kGridFeatures)) {
            case kFeatureDistance: y[i] = z[i]; break;
            case kFeatureYaw: y[i] = std::tanh(z[i]); break;
            default: y[i] = logistic(z[i]); break;
        }
    }
    return y;
}

template <typename T>
BasicTensor<T> heads_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy) {
    require_shape(dy, y.shape(), "head output gradient");
    BasicTensor<T> dz(y.shape());
    for (std::size_t i = 0; i < y.size(); ++i) {
        switch (static_cast<int>(i % kGridFeatures)) {
            case kFeatureDistance: dz[i] = dy[i]; break;
            case kFeatureYaw: dz[i] = dy[i] * (T(1) - y[i] * y[i]); break;
            default: dz[i] = dy[i] * y[i] * (T(1) - y[i]); break;
        }
    }
    return dz;
}

#define GATESEED_INSTANTIATE_LAYERS(T)                                                                       \
    template BasicTensor<T> conv2d_forward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&); \
    template void conv2d_backward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,          \
                                  BasicTensor<T>*, BasicTensor<T>&, BasicTensor<T>&);                           \
    template BasicTensor<T> batchnorm_forward_train(const BasicTensor<T>&, const BasicTensor<T>&,              \
                                                    const BasicTensor<T>&, T, BatchNormCache<T>&);              \
    template BasicTensor<T> batchnorm_forward_infer(const BasicTensor<T>&, const BasicTensor<T>&,              \
                                                    const BasicTensor<T>&, const BasicTensor<T>&,               \
                                                    const BasicTensor<T>&, T);                                  \
    template BasicTensor<T> batchnorm_backward(const BasicTensor<T>&, const BasicTensor<T>&,                   \
                                               const BatchNormCache<T>&, BasicTensor<T>&, BasicTensor<T>&);     \
    template BasicTensor<T> relu_forward(const BasicTensor<T>&);                                               \
    template BasicTensor<T> relu_backward(const BasicTensor<T>&, const BasicTensor<T>&);                       \
    template BasicTensor<T> maxpool2x2_forward(const BasicTensor<T>&, std::vector<std::int32_t>&);             \
    template BasicTensor<T> maxpool2x2_backward(const BasicTensor<T>&, const std::vector<std::int32_t>&,       \
                                                const Shape&);                                                  \
    template BasicTensor<T> dense_forward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&); \
    template void dense_backward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,           \
                                 BasicTensor<T>*, BasicTensor<T>&, BasicTensor<T>&);                            \
    template BasicTensor<T> heads_forward(const BasicTensor<T>&);                                              \
    template BasicTensor<T> heads_backward(const BasicTensor<T>&, const BasicTensor<T>&);

GATESEED_INSTANTIATE_LAYERS(float)
GATESEED_INSTANTIATE_LAYERS(double)

#undef GATESEED_INSTANTIATE_LAYERS

}  // namespace gateseed::nn
