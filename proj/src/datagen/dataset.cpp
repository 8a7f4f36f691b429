#include "gateseed/datagen/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <tuple>

#include "gateseed/common/errors.hpp"
#include "gateseed/common/parallel.hpp"
#include "gateseed/common/rng.hpp"
#include "gateseed/imagecore/image_io.hpp"

namespace gateseed::datagen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "gateseed-dataset";
constexpr int kFormatVersion = 1;
constexpr std::size_t kChunk = 256;

template <typename T>
void read_opt(const json& j, const char* key, T& out, const std::string& source) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception& e) {
        throw ParseError(source, 0, std::string("key '") + key + "': " + e.what());
    }
}

Eigen::Vector3d vec3(const json& j, const std::string& source) {
    if (!j.is_array() || j.size() != 3) throw ParseError(source, 0, "expected a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::string image_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "images/%06zu.png", index);
    return buf;
}

json pose_json(const camera::Pose& p) {
    return {{"x", p.position.x()}, {"y", p.position.y()}, {"z", p.position.z()}, {"yaw", p.yaw}};
}

camera::Pose pose_from(const json& j) {
    return camera::Pose({j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>()},
                        j.at("yaw").get<double>());
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string(), "cannot open");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string(), 1, e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path.string(), "cannot open for writing");
    out << text;
    if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace

json to_json(const DatasetConfig& cfg) {
    json gates = json::array();
    for (const GateSpec& g : cfg.gates)
        gates.push_back({{"side", g.side},
                         {"frame_width", g.frame_width},
                         {"panel_size", g.panel_size},
                         {"corner_pattern", g.corner_pattern}});
    const SceneConfig& s = cfg.scene;
    const camera::CameraModel& c = cfg.cam;
    return {
        {"gates", gates},
        {"bounds",
         {{"min", {cfg.bounds.min.x(), cfg.bounds.min.y(), cfg.bounds.min.z()}},
          {"max", {cfg.bounds.max.x(), cfg.bounds.max.y(), cfg.bounds.max.z()}}}},
        {"scene",
         {{"d_max", s.d_max},
          {"min_distance", s.min_distance},
          {"max_gates", s.max_gates},
          {"min_gate_spacing", s.min_gate_spacing},
          {"light_min", s.light_min},
          {"light_max", s.light_max},
          {"max_label_yaw", s.max_label_yaw},
          {"max_retries", s.max_retries}}},
        {"camera",
         {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"k", c.k}, {"width", c.width}, {"height", c.height}}},
    };
}

DatasetConfig dataset_config_from_json(const json& j) {
    const std::string src = "dataset config";
    if (!j.is_object()) throw ParseError(src, 0, "expected an object");
    DatasetConfig cfg;
    if (auto it = j.find("gates"); it != j.end()) {
        if (!it->is_array() || it->empty()) throw ParseError(src, 0, "'gates' must be a non-empty array");
        cfg.gates.clear();
        for (const json& g : *it) {
            GateSpec spec;
            read_opt(g, "side", spec.side, src);
            read_opt(g, "frame_width", spec.frame_width, src);
            read_opt(g, "panel_size", spec.panel_size, src);
            read_opt(g, "corner_pattern", spec.corner_pattern, src);
            cfg.gates.push_back(spec);
        }
    }
    if (auto it = j.find("bounds"); it != j.end()) {
        try {
            if (it->contains("min")) cfg.bounds.min = vec3(it->at("min"), src);
            if (it->contains("max")) cfg.bounds.max = vec3(it->at("max"), src);
        } catch (const json::exception& e) {
            throw ParseError(src, 0, std::string("bounds: ") + e.what());
        }
    }
    if (auto it = j.find("scene"); it != j.end()) {
        SceneConfig& s = cfg.scene;
        read_opt(*it, "d_max", s.d_max, src);
        read_opt(*it, "min_distance", s.min_distance, src);
        read_opt(*it, "max_gates", s.max_gates, src);
        read_opt(*it, "min_gate_spacing", s.min_gate_spacing, src);
        read_opt(*it, "light_min", s.light_min, src);
        read_opt(*it, "light_max", s.light_max, src);
        read_opt(*it, "max_label_yaw", s.max_label_yaw, src);
        read_opt(*it, "max_retries", s.max_retries, src);
    }
    if (auto it = j.find("camera"); it != j.end()) {
        camera::CameraModel& c = cfg.cam;
        read_opt(*it, "fx", c.fx, src);
        read_opt(*it, "fy", c.fy, src);
        read_opt(*it, "cx", c.cx, src);
        read_opt(*it, "cy", c.cy, src);
        read_opt(*it, "k", c.k, src);
        read_opt(*it, "width", c.width, src);
        read_opt(*it, "height", c.height, src);
    }
    return cfg;
}

std::vector<SummaryRow> summarize_labels(const std::vector<nn::GateLabelSet>& labels, const DatasetConfig& cfg,
                                         SummaryBins bins) {
    auto bin = [](double t, int n) { return std::clamp(static_cast<int>(std::floor(t * n)), 0, n - 1); };
    std::map<std::tuple<int, int, int, int>, long> hist;
    for (const nn::GateLabelSet& set : labels)
        for (const nn::GateLabel& g : set) {
            auto key = std::make_tuple(bin(g.u / cfg.cam.width, bins.x), bin(g.v / cfg.cam.height, bins.y),
                                       bin(g.d / cfg.scene.d_max, bins.d),
                                       bin((g.theta + M_PI / 2) / M_PI, bins.theta));
            ++hist[key];
        }
    std::vector<SummaryRow> rows;
    for (const auto& [key, count] : hist)
        rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key), count});
    return rows;
}

void write_summary_csv(const fs::path& path, const std::vector<SummaryRow>& rows) {
    std::string text = "x_bin,y_bin,d_bin,theta_bin,count\n";
    for (const SummaryRow& r : rows)
        text += std::to_string(r.x_bin) + "," + std::to_string(r.y_bin) + "," + std::to_string(r.d_bin) + "," +
                std::to_string(r.theta_bin) + "," + std::to_string(r.count) + "\n";
    write_text(path, text);
}

json annotation_json(const std::string& image_rel, const SceneSample& sample) {
    json gates = json::array();
    for (const nn::GateLabel& g : sample.labels)
        gates.push_back({{"u", g.u}, {"v", g.v}, {"d", g.d}, {"theta", g.theta}});
    json world = json::array();
    for (const camera::Pose& p : sample.meta.gate_poses) world.push_back(pose_json(p));
    return {{"image", image_rel},
            {"gates", gates},
            {"meta",
             {{"background", sample.meta.background_id},
              {"light_scale", sample.meta.light_scale},
              {"camera", pose_json(sample.meta.camera_pose)},
              {"world_gates", world},
              {"seed", sample.meta.seed}}}};
}

void generate_dataset(int n, std::uint64_t seed, const DatasetConfig& cfg, const fs::path& out_dir) {
    if (n < 1) throw InvalidArgument("dataset size must be >= 1");
    std::error_code ec;
    fs::create_directories(out_dir / "images", ec);
    if (ec) throw IoError((out_dir / "images").string(), ec.message());

    const fs::path ann_path = out_dir / "annotations.jsonl";
    std::ofstream ann(ann_path, std::ios::binary);
    if (!ann) throw IoError(ann_path.string(), "cannot open for writing");

    std::vector<nn::GateLabelSet> all_labels(static_cast<std::size_t>(n));
    for (std::size_t start = 0; start < static_cast<std::size_t>(n); start += kChunk) {
        const std::size_t count = std::min(kChunk, static_cast<std::size_t>(n) - start);
        std::vector<std::string> lines(count);
        parallel_for(count, [&](std::size_t k) {
            const std::size_t index = start + k;
            SceneSample s = generate_scene(mix_seed(seed, index), cfg.gates, cfg.bounds, cfg.cam, cfg.scene);
            const std::string rel = image_name(index);
            imagecore::write_png((out_dir / rel).string(), s.image);
            lines[k] = annotation_json(rel, s).dump();
            all_labels[index] = std::move(s.labels);
        });
        for (const std::string& line : lines) ann << line << '\n';
        if (!ann) throw IoError(ann_path.string(), "write failed");
    }
    ann.close();

    json manifest = {{"format", kFormat}, {"version", kFormatVersion}, {"count", n}, {"seed", seed},
                     {"config", to_json(cfg)}};
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
    write_summary_csv(out_dir / "summary.csv", summarize_labels(all_labels, cfg));
}

DatasetReader::DatasetReader(const fs::path& dir) : dir_(dir) {
    const fs::path manifest_path = dir / "manifest.json";
    json manifest = read_json_file(manifest_path);
    if (!manifest.is_object() || manifest.value("format", "") != kFormat)
        throw ParseError(manifest_path.string(), 1, "not a gateseed dataset manifest");
    if (manifest.value("version", 0) != kFormatVersion)
        throw ParseError(manifest_path.string(), 1, "unsupported dataset version");
    count_ = manifest.value("count", std::size_t{0});
    config_ = dataset_config_from_json(manifest.value("config", json::object()));

    const fs::path ann_path = dir / "annotations.jsonl";
    annotations_.open(ann_path);
    if (!annotations_) throw IoError(ann_path.string(), "cannot open");
}

std::optional<SceneSample> DatasetReader::next() {
    const std::string source = (dir_ / "annotations.jsonl").string();
    std::string line;
    while (std::getline(annotations_, line)) {
        ++line_no_;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(source, line_no_, e.what());
        }

        SceneSample sample;
        std::string rel;
        try {
            rel = j.at("image").get<std::string>();
            for (const json& g : j.at("gates"))
                sample.labels.push_back({g.at("u").get<double>(), g.at("v").get<double>(), g.at("d").get<double>(),
                                         g.at("theta").get<double>()});
            if (auto m = j.find("meta"); m != j.end()) {
                sample.meta.background_id = m->value("background", 0);
                sample.meta.light_scale = m->value("light_scale", 1.0);
                sample.meta.seed = m->value("seed", std::uint64_t{0});
                if (m->contains("camera")) sample.meta.camera_pose = pose_from(m->at("camera"));
                if (m->contains("world_gates"))
                    for (const json& p : m->at("world_gates")) sample.meta.gate_poses.push_back(pose_from(p));
            }
        } catch (const json::exception& e) {
            throw ParseError(source, line_no_, e.what());
        }

        const fs::path image_path = dir_ / rel;
        if (!fs::exists(image_path)) throw IoError(image_path.string(), "image file missing");
        sample.image = imagecore::read_png(image_path.string());

        for (const nn::GateLabel& g : sample.labels) {
            bool ok = std::isfinite(g.u) && std::isfinite(g.v) && g.u >= 0.0 && g.v >= 0.0 &&
                      g.u < sample.image.width() && g.v < sample.image.height() && std::isfinite(g.d) && g.d > 0.0 &&
                      std::isfinite(g.theta) && g.theta > -M_PI && g.theta <= M_PI;
            if (!ok)
                throw ValidationError(source + ":" + std::to_string(line_no_) + ": label (" + std::to_string(g.u) +
                                      ", " + std::to_string(g.v) + ") outside image bounds or invalid d/theta");
        }
        return sample;
    }
    return std::nullopt;
}

DatasetReader load_dataset(const fs::path& dir) { return DatasetReader(dir); }

std::vector<SceneSample> load_all(const fs::path& dir) {
    DatasetReader reader(dir);
    std::vector<SceneSample> out;
    while (auto s = reader.next()) out.push_back(std::move(*s));
    return out;
}

}  // namespace gateseed::datagen
