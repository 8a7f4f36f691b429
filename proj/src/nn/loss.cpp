#include "gateseed/nn/loss.hpp"

#include <string>

namespace gateseed::nn {

void LossWeights::validate() const {
    if (!(xy >= 0.0 && d >= 0.0 && theta >= 0.0 && c >= 0.0))
        throw InvalidArgument("loss weights must be non-negative");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
}

LossBreakdown compute_loss(const GridPrediction& pred, const GridPrediction& target, const GridMask& mask,
                           const LossWeights& w, GridPrediction* grad) {
    LossBreakdown l;
    if (grad) grad->values.fill(0.0f);
    for (int cell = 0; cell < kGridCells; ++cell) {
        const bool occupied = mask[static_cast<std::size_t>(cell)] != 0;
        auto diff = [&](int f) { return static_cast<double>(pred.at(cell, f)) - target.at(cell, f); };
        if (occupied) {
            const double ex = diff(kFeatureX), ey = diff(kFeatureY);
            const double ed = diff(kFeatureDistance), et = diff(kFeatureYaw);
            l.xy += ex * ex + ey * ey;
            l.d += ed * ed;
            l.theta += et * et;
            if (grad) {
                grad->at(cell, kFeatureX) = static_cast<float>(2.0 * w.xy * ex);
                grad->at(cell, kFeatureY) = static_cast<float>(2.0 * w.xy * ey);
                grad->at(cell, kFeatureDistance) = static_cast<float>(2.0 * w.d * ed);
                grad->at(cell, kFeatureYaw) = static_cast<float>(2.0 * w.theta * et);
            }
        }
        const double weight = occupied ? 1.0 : w.alpha;
        const double ec = diff(kFeatureConfidence);
        l.c += weight * ec * ec;
        if (grad) grad->at(cell, kFeatureConfidence) = static_cast<float>(2.0 * w.c * weight * ec);
    }
    l.total = w.xy * l.xy + w.d * l.d + w.theta * l.theta + w.c * l.c;
    return l;
}

template <typename T>
GridPrediction grid_from_output(const BasicTensor<T>& output, int n) {
    const std::size_t per = output.size() / static_cast<std::size_t>(output.dim(0));
    if (per != static_cast<std::size_t>(kGridValues))
        throw ShapeError("output " + shape_string(output.shape()) + " is not a batch of 4x3x5 grids");
    GridPrediction g;
    for (std::size_t i = 0; i < per; ++i)
        g.values[i] = static_cast<float>(output[static_cast<std::size_t>(n) * per + i]);
    return g;
}

template <typename T>
LossBreakdown batch_loss(const BasicTensor<T>& output, std::span<const GridPrediction> targets,
                         std::span<const GridMask> masks, const LossWeights& w, BasicTensor<T>* grad) {
    const int n = output.dim(0);
    if (targets.size() != static_cast<std::size_t>(n) || masks.size() != static_cast<std::size_t>(n))
        throw ShapeError("batch of " + std::to_string(n) + " outputs but " + std::to_string(targets.size()) +
                         " targets");
    if (grad) *grad = BasicTensor<T>(output.shape());
    LossBreakdown mean;
    // Targets and predictions are compared in double so the reference
    // (double) network path is exact.
    for (int s = 0; s < n; ++s) {
        const std::size_t off = static_cast<std::size_t>(s) * kGridValues;
        LossBreakdown l;
        for (int cell = 0; cell < kGridCells; ++cell) {
            const bool occupied = masks[static_cast<std::size_t>(s)][static_cast<std::size_t>(cell)] != 0;
            const auto& tgt = targets[static_cast<std::size_t>(s)];
            auto idx = [&](int f) { return off + static_cast<std::size_t>(cell * kGridFeatures + f); };
            auto diff = [&](int f) { return static_cast<double>(output[idx(f)]) - tgt.at(cell, f); };
            if (occupied) {
                const double ex = diff(kFeatureX), ey = diff(kFeatureY);
                const double ed = diff(kFeatureDistance), et = diff(kFeatureYaw);
                l.xy += ex * ex + ey * ey;
                l.d += ed * ed;
                l.theta += et * et;
                if (grad) {
                    (*grad)[idx(kFeatureX)] = static_cast<T>(2.0 * w.xy * ex / n);
                    (*grad)[idx(kFeatureY)] = static_cast<T>(2.0 * w.xy * ey / n);
                    (*grad)[idx(kFeatureDistance)] = static_cast<T>(2.0 * w.d * ed / n);
                    (*grad)[idx(kFeatureYaw)] = static_cast<T>(2.0 * w.theta * et / n);
                }
            }
            const double weight = occupied ? 1.0 : w.alpha;
            const double ec = diff(kFeatureConfidence);
            l.c += weight * ec * ec;
            if (grad) (*grad)[idx(kFeatureConfidence)] = static_cast<T>(2.0 * w.c * weight * ec / n);
        }
        mean.xy += l.xy / n;
        mean.d += l.d / n;
        mean.theta += l.theta / n;
        mean.c += l.c / n;
    }
    mean.total = w.xy * mean.xy + w.d * mean.d + w.theta * mean.theta + w.c * mean.c;
    return mean;
}

template LossBreakdown batch_loss(const BasicTensor<float>&, std::span<const GridPrediction>,
                                  std::span<const GridMask>, const LossWeights&, BasicTensor<float>*);
template LossBreakdown batch_loss(const BasicTensor<double>&, std::span<const GridPrediction>,
                                  std::span<const GridMask>, const LossWeights&, BasicTensor<double>*);
template GridPrediction grid_from_output(const BasicTensor<float>&, int);
template GridPrediction grid_from_output(const BasicTensor<double>&, int);

}  // namespace gateseed::nn
