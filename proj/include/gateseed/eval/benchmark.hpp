#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gateseed/datagen/scene.hpp"
#include "gateseed/eval/metrics.hpp"
#include "gateseed/imagecore/filters.hpp"
#include "gateseed/nn/network.hpp"
#include "gateseed/nn/trainer.hpp"

namespace gateseed::eval {

// Perturbation applied to test images before the model's input filter.
struct Condition {
    double light_scale = 1.0;
    int blur_len = 0;  // 0 or 1 disables blur
    double blur_angle = 0.0;
};

// Light scales {1.0, 0.4, 0.2, 0.1} crossed with blur lengths {0, 7}.
std::vector<Condition> default_conditions();

imagecore::Image perturb(const imagecore::Image& img, const Condition& cond);

struct ModelEntry {
    std::string name;
    imagecore::FilterSettings filter;
    nn::NetworkParams<float> params;
};

// RGB test images with their encoded grid targets.
struct TestSet {
    std::vector<imagecore::Image> images;
    std::vector<nn::GridPrediction> targets;
    std::vector<nn::GridMask> masks;
};

TestSet make_test_set(const std::vector<datagen::SceneSample>& samples, double d_max);

// Filtered, encoded training samples. Runs the filter on all workers.
std::vector<nn::TrainingSample> make_training_samples(const std::vector<datagen::SceneSample>& samples,
                                                      const imagecore::FilterSettings& filter, double d_max);

struct BenchmarkOptions {
    MetricOptions metrics;
    bool measure_fps = true;
    int fps_frames = 200;
    int batch_size = 64;
};

struct EvalReport {
    std::string model;
    std::string filter;
    Condition condition;
    double e_c = 0.0;
    double e_d = 0.0;
    double e_theta = 0.0;
    double fn_rate = 0.0;
    double fps = 0.0;  // single-thread filter + forward; 0 when not measured
    long n_samples = 0;
    long matched = 0;
    long false_negatives = 0;
    long occupied = 0;
    long false_positives = 0;
    bool fn_undefined = false;
    CellErrors cells;
    bool failed = false;
    std::string error;
};

// Single-thread frames per second of filter + batch-1 forward over `frames`
// images cycled from `images`.
double measure_fps(const ModelEntry& model, const std::vector<imagecore::Image>& images, int frames);

// One report per (model, condition), model-major. A model that throws yields
// a failed report for that cell and the sweep continues.
std::vector<EvalReport> run_benchmark(const std::vector<ModelEntry>& models, const TestSet& test,
                                      const std::vector<Condition>& conditions, const BenchmarkOptions& opts = {});

// Columns: model, filter, light_scale, blur_len, E_c, E_d, E_theta, fn_rate, fps, n.
std::string reports_to_csv(const std::vector<EvalReport>& reports, bool include_fps = true);
void write_reports_csv(const std::filesystem::path& path, const std::vector<EvalReport>& reports,
                       bool include_fps = true);

// One SVG per metric (E_c, E_d, E_theta as box summaries, fn_rate as bars).
// Returns the written paths.
std::vector<std::filesystem::path> write_svg_plots(const std::filesystem::path& dir,
                                                   const std::vector<EvalReport>& reports);

}  // namespace gateseed::eval
