#pragma once

#include <span>
#include <vector>

#include "gateseed/nn/grid.hpp"

namespace gateseed::eval {

struct MetricOptions {
    double conf_thresh = 0.5;
    double d_max = 12.0;
};

// Per matched cell absolute errors, kept for distribution plots.
struct CellErrors {
    std::vector<double> center;  // |dx| + |dy|, normalized cell units
    std::vector<double> distance;  // meters
    std::vector<double> yaw;       // radians
};

struct MaeResult {
    double e_c = 0.0;
    double e_d = 0.0;
    double e_theta = 0.0;
    long matched = 0;  // occupied cells with a detection; all errors are 0 when none
    CellErrors cells;
};

// Mean absolute errors over occupied target cells where the prediction fires
// (confidence >= conf_thresh). Missed cells are left to compute_fn_rate.
// Throws InvalidArgument when the three lists differ in length.
MaeResult compute_mae(std::span<const nn::GridPrediction> preds, std::span<const nn::GridPrediction> targets,
                      std::span<const nn::GridMask> masks, const MetricOptions& opts = {});

struct FnResult {
    double rate = 0.0;  // percent
    long false_negatives = 0;
    long occupied = 0;
    long false_positives = 0;  // firing cells without a gate, logged only
    bool undefined = false;    // no occupied cells; rate reported as 0
};

// FN = occupied cells whose confidence is below conf_thresh; a detection in
// a neighboring cell does not rescue a miss.
FnResult compute_fn_rate(std::span<const nn::GridPrediction> preds, std::span<const nn::GridPrediction> targets,
                         std::span<const nn::GridMask> masks, double conf_thresh);

}  // namespace gateseed::eval
