#include "gateseed/eval/metrics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gateseed/common/errors.hpp"

namespace gateseed::eval {

namespace {

void check_aligned(std::size_t a, std::size_t b, std::size_t c) {
    if (a != b || a != c)
        throw InvalidArgument("metric inputs differ in length: " + std::to_string(a) + " predictions, " +
                              std::to_string(b) + " targets, " + std::to_string(c) + " masks");
}

void check_threshold(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("confidence threshold must lie in [0, 1]");
}

}  // namespace

MaeResult compute_mae(std::span<const nn::GridPrediction> preds, std::span<const nn::GridPrediction> targets,
                      std::span<const nn::GridMask> masks, const MetricOptions& opts) {
    check_aligned(preds.size(), targets.size(), masks.size());
    check_threshold(opts.conf_thresh);
    const double half_pi = std::numbers::pi / 2.0;

    MaeResult r;
    double sum_c = 0.0, sum_d = 0.0, sum_t = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (int cell = 0; cell < nn::kGridCells; ++cell) {
            if (!masks[i][static_cast<std::size_t>(cell)]) continue;
            const nn::GridPrediction& p = preds[i];
            const nn::GridPrediction& t = targets[i];
            if (p.at(cell, nn::kFeatureConfidence) < opts.conf_thresh) continue;
            double ec = std::abs(double(p.at(cell, nn::kFeatureX)) - t.at(cell, nn::kFeatureX)) +
                        std::abs(double(p.at(cell, nn::kFeatureY)) - t.at(cell, nn::kFeatureY));
            double ed = std::abs(double(p.at(cell, nn::kFeatureDistance)) - t.at(cell, nn::kFeatureDistance)) * opts.d_max;
            double et = std::abs(double(p.at(cell, nn::kFeatureYaw)) - t.at(cell, nn::kFeatureYaw)) * half_pi;
            sum_c += ec;
            sum_d += ed;
            sum_t += et;
            r.cells.center.push_back(ec);
            r.cells.distance.push_back(ed);
            r.cells.yaw.push_back(et);
            ++r.matched;
        }
    }
    if (r.matched > 0) {
        r.e_c = sum_c / r.matched;
        r.e_d = sum_d / r.matched;
        r.e_theta = sum_t / r.matched;
    }
    return r;
}

FnResult compute_fn_rate(std::span<const nn::GridPrediction> preds, std::span<const nn::GridPrediction> targets,
                         std::span<const nn::GridMask> masks, double conf_thresh) {
    check_aligned(preds.size(), targets.size(), masks.size());
    check_threshold(conf_thresh);
    FnResult r;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (int cell = 0; cell < nn::kGridCells; ++cell) {
            bool fires = preds[i].at(cell, nn::kFeatureConfidence) >= conf_thresh;
            if (masks[i][static_cast<std::size_t>(cell)]) {
                ++r.occupied;
                if (!fires) ++r.false_negatives;
            } else if (fires) {
                ++r.false_positives;
            }
        }
    }
    if (r.occupied == 0)
        r.undefined = true;
    else
        r.rate = 100.0 * static_cast<double>(r.false_negatives) / static_cast<double>(r.occupied);
    return r;
}

}  // namespace gateseed::eval
