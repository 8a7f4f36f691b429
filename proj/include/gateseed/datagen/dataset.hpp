#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gateseed/datagen/scene.hpp"

namespace gateseed::datagen {

struct DatasetConfig {
    std::vector<GateSpec> gates{GateSpec{}};
    SpawnBounds bounds;
    SceneConfig scene;
    camera::CameraModel cam;
};

nlohmann::json to_json(const DatasetConfig& cfg);
// Missing keys keep their defaults; wrong types raise ParseError.
DatasetConfig dataset_config_from_json(const nlohmann::json& j);

// Histogram bin counts used by the distribution summary.
struct SummaryBins {
    int x = 10;
    int y = 10;
    int d = 12;
    int theta = 12;
};

struct SummaryRow {
    int x_bin, y_bin, d_bin, theta_bin;
    long count;
};

// Joint histogram over (u/width, v/height, d/d_max, theta over (-pi/2, pi/2)),
// non-empty bins only, in lexicographic bin order.
std::vector<SummaryRow> summarize_labels(const std::vector<nn::GateLabelSet>& labels, const DatasetConfig& cfg,
                                         SummaryBins bins = {});

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);

// Writes images/NNNNNN.png, annotations.jsonl, manifest.json and summary.csv
// under `out_dir`. Scene i uses seed mix_seed(seed, i), so the output does not
// depend on the worker count.
void generate_dataset(int n, std::uint64_t seed, const DatasetConfig& cfg, const std::filesystem::path& out_dir);

nlohmann::json annotation_json(const std::string& image_rel, const SceneSample& sample);

// Streams samples from a dataset directory one annotation line at a time.
class DatasetReader {
public:
    explicit DatasetReader(const std::filesystem::path& dir);

    const DatasetConfig& config() const { return config_; }
    std::size_t declared_count() const { return count_; }
    const std::filesystem::path& directory() const { return dir_; }

    // Next sample, or nullopt at the end of the annotation file.
    std::optional<SceneSample> next();

private:
    std::filesystem::path dir_;
    DatasetConfig config_;
    std::size_t count_ = 0;
    std::ifstream annotations_;
    std::size_t line_no_ = 0;
};

DatasetReader load_dataset(const std::filesystem::path& dir);
std::vector<SceneSample> load_all(const std::filesystem::path& dir);

}  // namespace gateseed::datagen
