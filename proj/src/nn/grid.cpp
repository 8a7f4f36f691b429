#include "gateseed/nn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gateseed/common/errors.hpp"

namespace gateseed::nn {

EncodedLabels encode_grid_labels(const GateLabelSet& labels, ImageDims dims, double d_max) {
    if (!(d_max > 0.0)) throw InvalidArgument("d_max must be positive");
    const auto cell = CellGeometry::of(dims);
    EncodedLabels out;
    std::array<double, kGridCells> owner_distance{};
    for (const auto& g : labels) {
        if (!(g.u >= 0.0 && g.u <= dims.width && g.v >= 0.0 && g.v <= dims.height))
            throw ValidationError("gate center (" + std::to_string(g.u) + ", " + std::to_string(g.v) +
                                  ") lies outside the image");
        if (!(g.d > 0.0)) throw ValidationError("gate distance must be positive");
        const int col = std::min(static_cast<int>(std::floor(g.u / cell.width)), kGridCols - 1);
        const int row = std::min(static_cast<int>(std::floor(g.v / cell.height)), kGridRows - 1);
        const int idx = row * kGridCols + col;
        if (out.mask[static_cast<std::size_t>(idx)]) {
            ++out.collisions;
            if (g.d >= owner_distance[static_cast<std::size_t>(idx)]) continue;
        }
        out.mask[static_cast<std::size_t>(idx)] = 1;
        owner_distance[static_cast<std::size_t>(idx)] = g.d;
        out.target.at(row, col, kFeatureX) = static_cast<float>((g.u - col * cell.width) / cell.width);
        out.target.at(row, col, kFeatureY) = static_cast<float>((g.v - row * cell.height) / cell.height);
        out.target.at(row, col, kFeatureDistance) = static_cast<float>(std::min(g.d / d_max, 1.0));
        out.target.at(row, col, kFeatureYaw) =
            static_cast<float>(std::clamp(g.theta / (std::numbers::pi / 2.0), -1.0, 1.0));
        out.target.at(row, col, kFeatureConfidence) = 1.0f;
    }
    return out;
}

std::vector<GateObservation> decode_predictions(const GridPrediction& pred, double conf_thresh, ImageDims dims,
                                                double d_max) {
    if (!(conf_thresh >= 0.0 && conf_thresh <= 1.0))
        throw InvalidArgument("confidence threshold must lie in [0, 1]");
    const auto cell = CellGeometry::of(dims);
    std::vector<GateObservation> out;
    for (int row = 0; row < kGridRows; ++row) {
        for (int col = 0; col < kGridCols; ++col) {
            const double c = pred.at(row, col, kFeatureConfidence);
            if (!(c >= conf_thresh)) continue;
            GateObservation obs;
            obs.u = col * cell.width + pred.at(row, col, kFeatureX) * cell.width;
            obs.v = row * cell.height + pred.at(row, col, kFeatureY) * cell.height;
            obs.distance = std::clamp(static_cast<double>(pred.at(row, col, kFeatureDistance)), 0.0, 1.0) * d_max;
            obs.yaw = std::clamp(static_cast<double>(pred.at(row, col, kFeatureYaw)), -1.0, 1.0) *
                      (std::numbers::pi / 2.0);
            obs.confidence = c;
            out.push_back(obs);
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const GateObservation& a, const GateObservation& b) { return a.confidence > b.confidence; });
    return out;
}

}  // namespace gateseed::nn
