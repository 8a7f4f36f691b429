#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gateseed/common/types.hpp"

namespace gateseed::nn {

inline constexpr int kGridRows = 4;
inline constexpr int kGridCols = 3;
inline constexpr int kGridFeatures = 5;
inline constexpr int kGridCells = kGridRows * kGridCols;
inline constexpr int kGridValues = kGridCells * kGridFeatures;

// Feature order inside a cell.
inline constexpr int kFeatureX = 0;
inline constexpr int kFeatureY = 1;
inline constexpr int kFeatureDistance = 2;
inline constexpr int kFeatureYaw = 3;
inline constexpr int kFeatureConfidence = 4;

// R x C x F grid of {x, y, d_norm, theta_norm, c}, row-major.
struct GridPrediction {
    std::array<float, kGridValues> values{};

    float& at(int row, int col, int feature) { return values[index(row, col, feature)]; }
    float at(int row, int col, int feature) const { return values[index(row, col, feature)]; }
    float& at(int cell, int feature) { return values[static_cast<std::size_t>(cell * kGridFeatures + feature)]; }
    float at(int cell, int feature) const { return values[static_cast<std::size_t>(cell * kGridFeatures + feature)]; }

    static constexpr std::size_t index(int row, int col, int feature) {
        return static_cast<std::size_t>((row * kGridCols + col) * kGridFeatures + feature);
    }
    bool operator==(const GridPrediction&) const = default;
};

// Occupancy indicator per cell (1 where a gate center falls inside).
using GridMask = std::array<std::uint8_t, kGridCells>;

struct GateLabel {
    double u = 0.0;      // pixels
    double v = 0.0;      // pixels
    double d = 0.0;      // meters
    double theta = 0.0;  // radians
};

using GateLabelSet = std::vector<GateLabel>;

struct EncodedLabels {
    GridPrediction target;
    GridMask mask{};
    int collisions = 0;  // gates dropped because a nearer gate owned the cell
};

struct CellGeometry {
    double width;
    double height;
    static CellGeometry of(ImageDims dims) {
        return {static_cast<double>(dims.width) / kGridCols, static_cast<double>(dims.height) / kGridRows};
    }
};

// Each gate is assigned to the cell containing its center; offsets are
// normalized by the (non-square) cell size. d is normalized by d_max and
// clipped to 1, theta by pi/2 and clipped to [-1, 1]. Labels outside the
// image raise ValidationError. When two gates share a cell the nearer one is
// kept.
EncodedLabels encode_grid_labels(const GateLabelSet& labels, ImageDims dims, double d_max);

// Cells with confidence >= conf_thresh, most confident first.
std::vector<GateObservation> decode_predictions(const GridPrediction& pred, double conf_thresh, ImageDims dims,
                                                double d_max);

}  // namespace gateseed::nn
