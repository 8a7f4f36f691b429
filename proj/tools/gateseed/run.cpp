#include "gateseed/cli/run.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gateseed/camera/camera_config.hpp"
#include "gateseed/common/errors.hpp"
#include "gateseed/common/kv_config.hpp"
#include "gateseed/common/rng.hpp"
#include "gateseed/datagen/dataset.hpp"
#include "gateseed/eval/benchmark.hpp"
#include "gateseed/imagecore/filters.hpp"
#include "gateseed/imagecore/image_io.hpp"
#include "gateseed/mapping/flight_sim.hpp"
#include "gateseed/nn/checkpoint.hpp"
#include "gateseed/nn/grid.hpp"
#include "gateseed/nn/trainer.hpp"
#include "knobs.hpp"

namespace gateseed::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void Knobs::write(const fs::path& dir) const {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(dir.string(), ec.message());
    const fs::path path = dir / "effective_config.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path.string(), "cannot open for writing");
    out << echo().dump(2) << '\n';
}

namespace {

const std::vector<std::string> kFilterNames{"pencil", "sobel", "canny", "none"};

imagecore::FilterSettings filter_settings(const std::string& kind, int kernel, double low, double high) {
    imagecore::FilterSettings s;
    s.kind = imagecore::parse_filter_kind(kind);
    s.pencil_kernel = kernel;
    s.canny_low = low;
    s.canny_high = high;
    return s;
}

bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".pgm" || ext == ".ppm";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path.string(), "cannot open for writing");
    out << text;
    if (!out) throw IoError(path.string(), "write failed");
}

// ---------------------------------------------------------------- gen

struct GenSettings {
    int n = 1000;
    std::uint64_t seed = 0;
    std::string out;
    double d_max = 12.0;
    int max_gates = 3;
    double light_min = 0.3;
    double light_max = 1.0;
    double gate_side = 1.0;
    double frame_width = 0.12;
    int corner_pattern = 4;
    std::string camera;
};

void add_gen(CLI::App& app, GenSettings& s, Knobs& k) {
    k.option("--n", s.n, "Number of scenes")->check(CLI::PositiveNumber);
    k.option("--seed", s.seed, "Dataset seed; scene i uses an independent stream derived from it");
    k.option("--out", s.out, "Output dataset directory")->required();
    k.option("--d-max", s.d_max, "Largest labeled distance [m]")->check(CLI::PositiveNumber);
    k.option("--max-gates", s.max_gates, "Gates per scene (1..N)")->check(CLI::Range(1, 16));
    k.option("--light-min", s.light_min, "Lowest global light scale")->check(CLI::Range(0.0, 1.0));
    k.option("--light-max", s.light_max, "Highest global light scale")->check(CLI::Range(0.0, 1.0));
    k.option("--gate-side", s.gate_side, "Inner gate edge [m]")->check(CLI::PositiveNumber);
    k.option("--frame-width", s.frame_width, "Frame bar width [m]")->check(CLI::PositiveNumber);
    k.option("--corner-pattern", s.corner_pattern, "Checkerboard cells per corner panel side")
        ->check(CLI::Range(1, 16));
    k.option("--camera", s.camera, "Camera rig config file (defaults to the built-in fish-eye)");
    (void)app;
}

int run_gen(const GenSettings& s, const Knobs& k) {
    datagen::DatasetConfig cfg;
    cfg.scene.d_max = s.d_max;
    cfg.scene.max_gates = s.max_gates;
    cfg.scene.light_min = s.light_min;
    cfg.scene.light_max = s.light_max;
    cfg.gates[0].side = s.gate_side;
    cfg.gates[0].frame_width = s.frame_width;
    cfg.gates[0].corner_pattern = s.corner_pattern;
    if (!s.camera.empty()) cfg.cam = camera::load_camera_rig(s.camera).model;
    datagen::generate_dataset(s.n, s.seed, cfg, s.out);
    k.write(s.out);
    std::cout << "wrote " << s.n << " scenes to " << s.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- filter

struct FilterCmdSettings {
    std::string kind = "pencil";
    std::string in;
    std::string out;
    int pencil_kernel = imagecore::kDefaultPencilKernel;
    double canny_low = 50.0;
    double canny_high = 150.0;
};

void add_filter(CLI::App&, FilterCmdSettings& s, Knobs& k) {
    k.option("--kind", s.kind, "Filter: pencil, sobel, canny or none")->check(CLI::IsMember(kFilterNames));
    k.option("--in", s.in, "Input image or directory of images")->required();
    k.option("--out", s.out, "Output image, or directory when --in is a directory")->required();
    k.option("--pencil-kernel", s.pencil_kernel, "Pencil ellipse size (odd)")->check(CLI::PositiveNumber);
    k.option("--canny-low", s.canny_low, "Canny low threshold")->check(CLI::Range(0.0, 255.0));
    k.option("--canny-high", s.canny_high, "Canny high threshold")->check(CLI::Range(0.0, 255.0));
}

int run_filter(const FilterCmdSettings& s, const Knobs& k) {
    const auto settings = filter_settings(s.kind, s.pencil_kernel, s.canny_low, s.canny_high);
    const fs::path in(s.in), out(s.out);
    if (fs::is_directory(in)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(in))
            if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec) throw IoError(out.string(), ec.message());
        for (const fs::path& f : files) {
            fs::path target = out / f.filename();
            target.replace_extension(".png");
            imagecore::write_image(target.string(), imagecore::apply_filter(imagecore::read_image(f.string()), settings));
        }
        k.write(out);
        std::cout << "filtered " << files.size() << " images into " << out.string() << "\n";
    } else {
        if (!fs::exists(in)) throw IoError(in.string(), "no such file");
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        imagecore::write_image(out.string(), imagecore::apply_filter(imagecore::read_image(in.string()), settings));
        k.write(out.has_parent_path() ? out.parent_path() : fs::path("."));
    }
    return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainSettings {
    std::string data;
    std::string out;
    std::string filter = "pencil";
    int epochs = 10;
    int batch_size = 32;
    double lr = 0.01;
    std::vector<int> lr_milestones{5, 8};
    double lr_factor = 0.1;
    std::uint64_t seed = 0;
    double w_xy = 1.0, w_d = 1.0, w_theta = 1.0, w_c = 1.0, alpha = 0.5;
    double bn_momentum = 0.9;
    double d_max = 0.0;
    int pencil_kernel = imagecore::kDefaultPencilKernel;
    double canny_low = 50.0;
    double canny_high = 150.0;
};

void add_train(CLI::App&, TrainSettings& s, Knobs& k) {
    k.option("--data", s.data, "Dataset directory (from `gen`)")->required();
    k.option("--out", s.out, "Run directory for model.ckpt, loss.csv and effective_config.json")->required();
    k.option("--filter", s.filter, "Input filter: pencil, sobel, canny or none")->check(CLI::IsMember(kFilterNames));
    k.option("--epochs", s.epochs, "Training epochs")->check(CLI::PositiveNumber);
    k.option("--batch-size", s.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
    k.option("--lr", s.lr, "Initial learning rate")->check(CLI::PositiveNumber);
    k.option("--lr-milestones", s.lr_milestones, "Epochs at which the learning rate is multiplied by --lr-factor")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    k.option("--lr-factor", s.lr_factor, "Learning-rate decay factor")->check(CLI::PositiveNumber);
    k.option("--seed", s.seed, "Seed for weight initialization and shuffling");
    k.option("--w-xy", s.w_xy, "Loss weight of the center term")->check(CLI::NonNegativeNumber);
    k.option("--w-d", s.w_d, "Loss weight of the distance term")->check(CLI::NonNegativeNumber);
    k.option("--w-theta", s.w_theta, "Loss weight of the orientation term")->check(CLI::NonNegativeNumber);
    k.option("--w-c", s.w_c, "Loss weight of the confidence term")->check(CLI::NonNegativeNumber);
    k.option("--alpha", s.alpha, "Confidence weight on empty cells")->check(CLI::NonNegativeNumber);
    k.option("--bn-momentum", s.bn_momentum, "Running-statistics momentum")->check(CLI::Range(0.0, 1.0));
    k.option("--d-max", s.d_max, "Distance normalization [m]; 0 takes the dataset's value")
        ->check(CLI::NonNegativeNumber);
    k.option("--pencil-kernel", s.pencil_kernel, "Pencil ellipse size (odd)")->check(CLI::PositiveNumber);
    k.option("--canny-low", s.canny_low, "Canny low threshold")->check(CLI::Range(0.0, 255.0));
    k.option("--canny-high", s.canny_high, "Canny high threshold")->check(CLI::Range(0.0, 255.0));
}

int run_train(const TrainSettings& s, const Knobs& k) {
    const fs::path out(s.out);
    std::vector<datagen::SceneSample> scenes = datagen::load_all(s.data);
    if (scenes.empty()) throw ValidationError(s.data + ": dataset is empty");
    const double d_max = s.d_max > 0.0 ? s.d_max : datagen::load_dataset(s.data).config().scene.d_max;
    const auto filter = filter_settings(s.filter, s.pencil_kernel, s.canny_low, s.canny_high);
    std::vector<nn::TrainingSample> samples = eval::make_training_samples(scenes, filter, d_max);
    scenes.clear();

    nn::TrainConfig tc;
    tc.epochs = s.epochs;
    tc.batch_size = s.batch_size;
    tc.seed = mix_seed(s.seed, 1);
    tc.weights = {s.w_xy, s.w_d, s.w_theta, s.w_c, s.alpha};
    tc.weights.validate();
    tc.initial_lr = s.lr;
    tc.lr_milestones = s.lr_milestones;
    tc.lr_factor = s.lr_factor;
    tc.bn_momentum = s.bn_momentum;

    k.write(out);
    std::string loss_csv = "epoch,lr,total,xy,d,theta,c\n";
    tc.on_epoch = [&](const nn::EpochLog& log) {
        char line[256];
        std::snprintf(line, sizeof line, "%d,%.8g,%.8f,%.8f,%.8f,%.8f,%.8f\n", log.epoch, log.lr, log.mean.total,
                      log.mean.xy, log.mean.d, log.mean.theta, log.mean.c);
        loss_csv += line;
        std::cout << "epoch " << log.epoch << " lr " << log.lr << " loss " << log.mean.total << std::endl;
    };

    auto params = nn::NetworkParams<float>::init(nn::Architecture::detector(), mix_seed(s.seed, 0));
    auto adam = nn::AdamState<float>::for_params(params);
    nn::train(samples, params, adam, tc);

    nn::save_checkpoint((out / "model.ckpt").string(), params, &adam);
    write_text(out / "loss.csv", loss_csv);
    std::cout << "saved " << (out / "model.ckpt").string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalSettings {
    std::string data;
    std::vector<std::string> models;
    std::string out;
    std::string conditions = "default";
    double blur_angle = 0.0;
    double conf_thresh = 0.5;
    double d_max = 0.0;
    int fps_frames = 200;
    bool no_fps = false;
    int limit = 0;
    int pencil_kernel = imagecore::kDefaultPencilKernel;
    double canny_low = 50.0;
    double canny_high = 150.0;
};

void add_eval(CLI::App&, EvalSettings& s, Knobs& k) {
    k.option("--data", s.data, "Test dataset directory")->required();
    k.option("--model", s.models, "Model as NAME:FILTER:CHECKPOINT (repeatable)")->required();
    k.option("--out", s.out, "Output directory for results.csv, details.csv and plots")->required();
    k.option("--conditions", s.conditions,
             "'default' (light 1.0/0.4/0.2/0.1 x blur 0/7) or a list like '1.0:0,0.2:7' of light:blur");
    k.option("--blur-angle", s.blur_angle, "Motion-blur direction [rad]");
    k.option("--conf-thresh", s.conf_thresh, "Detection threshold")->check(CLI::Range(0.0, 1.0));
    k.option("--d-max", s.d_max, "Distance normalization [m]; 0 takes the dataset's value")
        ->check(CLI::NonNegativeNumber);
    k.option("--fps-frames", s.fps_frames, "Frames timed for the fps column")->check(CLI::PositiveNumber);
    k.flag("--no-fps", s.no_fps, "Skip the throughput measurement (fps column left empty)");
    k.option("--limit", s.limit, "Use only the first N test samples (0 = all)")->check(CLI::NonNegativeNumber);
    k.option("--pencil-kernel", s.pencil_kernel, "Pencil ellipse size (odd)")->check(CLI::PositiveNumber);
    k.option("--canny-low", s.canny_low, "Canny low threshold")->check(CLI::Range(0.0, 255.0));
    k.option("--canny-high", s.canny_high, "Canny high threshold")->check(CLI::Range(0.0, 255.0));
}

std::vector<eval::Condition> parse_conditions(const std::string& text, double angle) {
    if (text == "default") {
        auto c = eval::default_conditions();
        for (auto& x : c) x.blur_angle = angle;
        return c;
    }
    std::vector<eval::Condition> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto colon = item.find(':');
        try {
            if (colon == std::string::npos) throw std::invalid_argument(item);
            out.push_back({std::stod(item.substr(0, colon)), std::stoi(item.substr(colon + 1)), angle});
        } catch (const std::exception&) {
            throw InvalidArgument("condition '" + item + "' is not LIGHT:BLUR");
        }
    }
    if (out.empty()) throw InvalidArgument("no conditions given");
    return out;
}

int run_eval(const EvalSettings& s, const Knobs& k) {
    const auto conditions = parse_conditions(s.conditions, s.blur_angle);
    std::vector<eval::ModelEntry> models;
    for (const std::string& spec : s.models) {
        auto a = spec.find(':');
        auto b = a == std::string::npos ? a : spec.find(':', a + 1);
        if (b == std::string::npos) throw InvalidArgument("model '" + spec + "' is not NAME:FILTER:CHECKPOINT");
        eval::ModelEntry m;
        m.name = spec.substr(0, a);
        m.filter = filter_settings(spec.substr(a + 1, b - a - 1), s.pencil_kernel, s.canny_low, s.canny_high);
        m.params = nn::load_checkpoint(spec.substr(b + 1)).params;
        models.push_back(std::move(m));
    }

    datagen::DatasetReader reader(s.data);
    const double d_max = s.d_max > 0.0 ? s.d_max : reader.config().scene.d_max;
    std::vector<datagen::SceneSample> scenes;
    while (auto sample = reader.next()) {
        scenes.push_back(std::move(*sample));
        if (s.limit > 0 && static_cast<int>(scenes.size()) >= s.limit) break;
    }
    const eval::TestSet test = eval::make_test_set(scenes, d_max);

    eval::BenchmarkOptions opts;
    opts.metrics = {s.conf_thresh, d_max};
    opts.measure_fps = !s.no_fps;
    opts.fps_frames = s.fps_frames;
    const auto reports = eval::run_benchmark(models, test, conditions, opts);

    const fs::path out(s.out);
    k.write(out);
    eval::write_reports_csv(out / "results.csv", reports, opts.measure_fps);
    std::string details = "model,light_scale,blur_len,matched,false_negatives,occupied,false_positives,fn_undefined,error\n";
    for (const auto& r : reports) {
        char line[256];
        std::snprintf(line, sizeof line, "%s,%.3f,%d,%ld,%ld,%ld,%ld,%d,", r.model.c_str(), r.condition.light_scale,
                      r.condition.blur_len, r.matched, r.false_negatives, r.occupied, r.false_positives,
                      r.fn_undefined ? 1 : 0);
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        details += line + err + "\n";
        if (r.false_positives > 0)
            std::cerr << r.model << " light " << r.condition.light_scale << " blur " << r.condition.blur_len << ": "
                      << r.false_positives << " false positive cells\n";
        if (r.failed) std::cerr << r.model << ": evaluation failed: " << r.error << "\n";
    }
    write_text(out / "details.csv", details);
    eval::write_svg_plots(out / "plots", reports);
    std::cout << eval::reports_to_csv(reports, opts.measure_fps);
    return kExitOk;
}

// ---------------------------------------------------------------- infer

struct InferSettings {
    std::string model;
    std::string image;
    std::string filter = "pencil";
    double conf_thresh = 0.5;
    double d_max = 12.0;
    std::string out;
    int pencil_kernel = imagecore::kDefaultPencilKernel;
    double canny_low = 50.0;
    double canny_high = 150.0;
};

void add_infer(CLI::App&, InferSettings& s, Knobs& k) {
    k.option("--model", s.model, "Checkpoint path")->required();
    k.option("--image", s.image, "Input RGB or gray image")->required();
    k.option("--filter", s.filter, "Input filter the model was trained with")->check(CLI::IsMember(kFilterNames));
    k.option("--conf-thresh", s.conf_thresh, "Detection threshold")->check(CLI::Range(0.0, 1.0));
    k.option("--d-max", s.d_max, "Distance normalization used in training [m]")->check(CLI::PositiveNumber);
    k.option("--out", s.out, "Directory for effective_config.json (optional)");
    k.option("--pencil-kernel", s.pencil_kernel, "Pencil ellipse size (odd)")->check(CLI::PositiveNumber);
    k.option("--canny-low", s.canny_low, "Canny low threshold")->check(CLI::Range(0.0, 255.0));
    k.option("--canny-high", s.canny_high, "Canny high threshold")->check(CLI::Range(0.0, 255.0));
}

int run_infer(const InferSettings& s, const Knobs& k) {
    const auto params = nn::load_checkpoint(s.model).params;
    const imagecore::Image img = imagecore::read_image(s.image);
    const imagecore::Image in =
        imagecore::apply_filter(img, filter_settings(s.filter, s.pencil_kernel, s.canny_low, s.canny_high));
    const auto preds = nn::predict(params, std::span<const imagecore::Image>(&in, 1), 1);
    const auto obs = nn::decode_predictions(preds.front(), s.conf_thresh, {img.width(), img.height()}, s.d_max);
    json dets = json::array();
    for (const GateObservation& o : obs)
        dets.push_back({{"u", o.u}, {"v", o.v}, {"distance", o.distance}, {"yaw", o.yaw}, {"confidence", o.confidence}});
    if (!s.out.empty()) k.write(s.out);
    std::cout << json{{"image", s.image}, {"detections", dets}}.dump(2) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- map-sim

struct MapSimSettings {
    std::string out;
    std::uint64_t seed = 1;
    int laps = 3;
    int steps = 40;
    double pixel_noise = 0.5;
    double distance_noise = 0.03;
    double yaw_noise = 0.03;
    double anchor_jitter = 1.0;
    std::string anchors;
    std::string camera;
    double d_max = 12.0;
};

void add_map_sim(CLI::App&, MapSimSettings& s, Knobs& k) {
    k.option("--out", s.out, "Output directory for map.json and anchors.json")->required();
    k.option("--seed", s.seed, "Noise and anchor-jitter seed");
    k.option("--laps", s.laps, "Laps over the track")->check(CLI::PositiveNumber);
    k.option("--steps", s.steps, "Frames per gate approach")->check(CLI::PositiveNumber);
    k.option("--pixel-noise", s.pixel_noise, "Detection center noise sigma [px]")->check(CLI::NonNegativeNumber);
    k.option("--distance-noise", s.distance_noise, "Distance noise sigma as a fraction of range")
        ->check(CLI::NonNegativeNumber);
    k.option("--yaw-noise", s.yaw_noise, "Relative yaw noise sigma [rad]")->check(CLI::NonNegativeNumber);
    k.option("--anchor-jitter", s.anchor_jitter, "Max prior anchor error per axis [m]")->check(CLI::NonNegativeNumber);
    k.option("--anchors", s.anchors, "Prior anchor JSON file (ids 0..3); default jitters the true gate positions");
    k.option("--camera", s.camera, "Camera rig config file");
    k.option("--d-max", s.d_max, "Largest detection range [m]")->check(CLI::PositiveNumber);
}

int run_map_sim(const MapSimSettings& s, const Knobs& k) {
    mapping::FlightSimConfig cfg;
    cfg.seed = s.seed;
    cfg.laps = s.laps;
    cfg.steps_per_gate = s.steps;
    cfg.pixel_noise = s.pixel_noise;
    cfg.distance_noise = s.distance_noise;
    cfg.yaw_noise = s.yaw_noise;
    cfg.anchor_jitter = s.anchor_jitter;
    cfg.d_max = s.d_max;
    if (!s.camera.empty()) cfg.cam = camera::load_camera_rig(s.camera).model;
    if (!s.anchors.empty()) cfg.anchors = mapping::load_anchors(s.anchors);

    const auto track = mapping::default_track();
    const auto result = mapping::simulate_flight(track, cfg);
    const fs::path out(s.out);
    k.write(out);
    mapping::save_map((out / "map.json").string(), result.map, result.events);
    mapping::save_anchors((out / "anchors.json").string(), result.anchors);

    std::cout << "frames " << result.frames << ", observations " << result.events.size() << "\n";
    for (const mapping::TrackGate& t : track) {
        if (!std::any_of(result.map.gates().begin(), result.map.gates().end(),
                         [&](const mapping::GateFilter& g) { return g.id == t.id; }))
            continue;
        const auto& g = result.map.gate(t.id);
        std::printf("gate %d: updates %d, position error %.4f m\n", g.id, g.update_count,
                    (g.state.head<3>() - t.pose.position).norm());
    }
    return kExitOk;
}

// Splices `--key=value` pairs from the subcommand's --config file in front of
// the user's own arguments, skipping keys the user set explicitly, so that
// flags override the file and the file overrides defaults.
std::vector<std::string> expand_config(const std::vector<std::string>& args, const std::vector<std::string>& subs) {
    std::size_t sub_pos = 0;
    for (std::size_t i = 1; i < args.size(); ++i)
        if (std::find(subs.begin(), subs.end(), args[i]) != subs.end()) {
            sub_pos = i;
            break;
        }
    if (sub_pos == 0) return args;

    std::string config_path;
    for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (config_path.empty()) return args;

    const KeyValueConfig cfg = KeyValueConfig::from_file(config_path);
    auto user_set = [&](const std::string& key) {
        const std::string flag = "--" + key;
        for (std::size_t i = sub_pos + 1; i < args.size(); ++i)
            if (args[i] == flag || args[i].rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    std::vector<std::string> injected;
    for (const auto& [key, values] : cfg.lists()) {
        if (key == "config" || user_set(key)) continue;
        // an empty value means "unset"; CLI11 would otherwise swallow the next token
        for (const std::string& v : values)
            if (!v.empty()) injected.push_back("--" + key + "=" + v);
    }
    std::vector<std::string> out(args.begin(), args.begin() + static_cast<long>(sub_pos) + 1);
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), args.begin() + static_cast<long>(sub_pos) + 1, args.end());
    return out;
}

}  // namespace

int run(const std::vector<std::string>& raw_args) {
    CLI::App app{"Gate perception toolkit: synthetic data, filters, training, evaluation and mapping", "gateseed"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    struct Command {
        CLI::App* app;
        std::unique_ptr<Knobs> knobs;
        std::function<int()> run;
    };
    std::vector<Command> commands;
    std::string config_file;
    auto add_command = [&](const std::string& name, const std::string& desc) -> Command& {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_file, "Settings file (key = value lines or a JSON object); flags win");
        commands.push_back({sub, std::make_unique<Knobs>(sub), {}});
        return commands.back();
    };

    GenSettings gen;
    FilterCmdSettings filt;
    TrainSettings train;
    EvalSettings ev;
    InferSettings infer;
    MapSimSettings msim;
    {
        Command& c = add_command("gen", "Generate a synthetic labeled dataset");
        add_gen(*c.app, gen, *c.knobs);
        c.run = [&, k = c.knobs.get()] { return run_gen(gen, *k); };
    }
    {
        Command& c = add_command("filter", "Apply an input filter to an image or a directory");
        add_filter(*c.app, filt, *c.knobs);
        c.run = [&, k = c.knobs.get()] { return run_filter(filt, *k); };
    }
    {
        Command& c = add_command("train", "Train the detector on a dataset");
        add_train(*c.app, train, *c.knobs);
        c.run = [&, k = c.knobs.get()] { return run_train(train, *k); };
    }
    {
        Command& c = add_command("eval", "Benchmark models across light/blur conditions");
        add_eval(*c.app, ev, *c.knobs);
        c.knobs->app()->get_option("--model")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
        c.run = [&, k = c.knobs.get()] { return run_eval(ev, *k); };
    }
    {
        Command& c = add_command("infer", "Detect gates in one image; JSON on stdout");
        add_infer(*c.app, infer, *c.knobs);
        c.run = [&, k = c.knobs.get()] { return run_infer(infer, *k); };
    }
    {
        Command& c = add_command("map-sim", "Replay a simulated flight through the gate map");
        add_map_sim(*c.app, msim, *c.knobs);
        c.run = [&, k = c.knobs.get()] { return run_map_sim(msim, *k); };
    }

    std::vector<std::string> names;
    for (const Command& c : commands) names.push_back(c.app->get_name());

    std::vector<std::string> args;
    try {
        args = expand_config(raw_args, names);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    for (const Command& c : commands) {
        if (!c.app->parsed()) continue;
        try {
            return c.run();
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitRuntime;
        }
    }
    return kExitUsage;
}

int run(int argc, const char* const* argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace gateseed::cli
