#pragma once

#include <span>

#include "gateseed/nn/grid.hpp"
#include "gateseed/nn/tensor.hpp"

namespace gateseed::nn {

struct LossWeights {
    double xy = 1.0;
    double d = 1.0;
    double theta = 1.0;
    double c = 1.0;
    double alpha = 0.5;  // confidence weight on unoccupied cells

    void validate() const;
};

struct LossBreakdown {
    double xy = 0.0;
    double d = 0.0;
    double theta = 0.0;
    double c = 0.0;
    double total = 0.0;
};

// Squared errors: center, distance and yaw over occupied cells only;
// confidence over every cell, weighted 1 (occupied) or alpha (empty).
// total = w.xy*xy + w.d*d + w.theta*theta + w.c*c. When `grad` is given it
// receives dtotal/dpred.
LossBreakdown compute_loss(const GridPrediction& pred, const GridPrediction& target, const GridMask& mask,
                           const LossWeights& w, GridPrediction* grad = nullptr);

// Mean of the per-sample loss over a batch output [N, R, C, F]. Optionally
// writes d(mean total)/d(output).
template <typename T>
LossBreakdown batch_loss(const BasicTensor<T>& output, std::span<const GridPrediction> targets,
                         std::span<const GridMask> masks, const LossWeights& w, BasicTensor<T>* grad = nullptr);

// Copies sample `n` of a batch output [N, R, C, F] into a grid.
template <typename T>
GridPrediction grid_from_output(const BasicTensor<T>& output, int n);

}  // namespace gateseed::nn
