#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "gateseed/camera/back_projection.hpp"
#include "gateseed/camera/camera_model.hpp"
#include "gateseed/common/errors.hpp"
#include "gateseed/common/rng.hpp"
#include "gateseed/datagen/dataset.hpp"
#include "gateseed/datagen/scene.hpp"
#include "gateseed/imagecore/image_io.hpp"
#include "json.hpp"

using namespace gateseed;
using namespace gateseed::datagen;
using Eigen::Vector3d;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("gateseed_datagen_" + name);
    fs::remove_all(p);
    return p;
}

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

void write_lines(const fs::path& p, const std::vector<std::string>& lines) {
    std::ofstream out(p);
    for (const auto& l : lines) out << l << '\n';
}

PlacedGate gate_at(const Vector3d& c, double yaw) {
    PlacedGate g;
    g.center = c;
    g.yaw = yaw;
    return g;
}

}  // namespace

TEST(Scene, FixedSeedIsByteIdentical) {
    camera::CameraModel cam;
    std::vector<GateSpec> specs{GateSpec{}};
    SceneSample a = generate_scene(42, specs, SpawnBounds{}, cam);
    SceneSample b = generate_scene(42, specs, SpawnBounds{}, cam);
    EXPECT_EQ(a.image, b.image);
    ASSERT_EQ(a.labels.size(), b.labels.size());
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        EXPECT_EQ(a.labels[i].u, b.labels[i].u);
        EXPECT_EQ(a.labels[i].d, b.labels[i].d);
    }
    EXPECT_EQ(a.image.width(), 160);
    EXPECT_EQ(a.image.height(), 120);
    EXPECT_EQ(a.image.channels(), 3);
    EXPECT_FALSE(a.labels.empty());
}

TEST(Scene, DifferentSeedsDiffer) {
    camera::CameraModel cam;
    std::vector<GateSpec> specs{GateSpec{}};
    EXPECT_NE(generate_scene(1, specs, SpawnBounds{}, cam).image, generate_scene(2, specs, SpawnBounds{}, cam).image);
}

TEST(Labels, GateDirectlyAhead) {
    camera::CameraModel cam;
    SceneConfig cfg;
    camera::Pose pose(Vector3d(0, 0, 1.5), 0.0);
    auto l = label_gate(gate_at({4, 0, 1.5}, 0.0), pose, cam, cfg);
    ASSERT_TRUE(l.has_value());
    EXPECT_NEAR(l->u, cam.cx, 1e-9);
    EXPECT_NEAR(l->v, cam.cy, 1e-9);
    EXPECT_NEAR(l->d, 4.0, 1e-12);
    EXPECT_NEAR(l->theta, 0.0, 1e-12);
}

TEST(Labels, BackFaceIsNotLabeled) {
    camera::CameraModel cam;
    SceneConfig cfg;
    camera::Pose pose(Vector3d(0, 0, 1.5), 0.0);
    // gate heading points back at the camera: only its back face is visible
    EXPECT_FALSE(label_gate(gate_at({4, 0, 1.5}, std::numbers::pi), pose, cam, cfg).has_value());
}

TEST(Labels, RangeAndImageLimits) {
    camera::CameraModel cam;
    SceneConfig cfg;
    camera::Pose pose(Vector3d(0, 0, 1.5), 0.0);
    EXPECT_FALSE(label_gate(gate_at({12.5, 0, 1.5}, 0.0), pose, cam, cfg).has_value());
    EXPECT_TRUE(label_gate(gate_at({11.9, 0, 1.5}, 0.0), pose, cam, cfg).has_value());
    EXPECT_FALSE(label_gate(gate_at({0.3, 0, 1.5}, 0.0), pose, cam, cfg).has_value());
    EXPECT_FALSE(label_gate(gate_at({-4, 0, 1.5}, 0.0), pose, cam, cfg).has_value());
    EXPECT_FALSE(label_gate(gate_at({1, 5, 1.5}, 0.0), pose, cam, cfg).has_value());
    EXPECT_FALSE(label_gate(gate_at({4, 0, 1.5}, 1.4), pose, cam, cfg).has_value());
    auto l = label_gate(gate_at({4, 0, 1.5}, 1.0), pose, cam, cfg);
    ASSERT_TRUE(l.has_value());
    EXPECT_NEAR(l->theta, 1.0, 1e-12);
}

TEST(Labels, ReprojectWithinHalfPixel) {
    camera::CameraModel cam;
    SceneConfig cfg;
    std::vector<GateSpec> specs{GateSpec{}};
    int checked = 0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        SceneSample s = generate_scene(mix_seed(3, i), specs, SpawnBounds{}, cam, cfg);
        for (const auto& l : s.labels) {
            // find the world gate whose back-projection matches the label
            double best = 1e9;
            for (const auto& g : s.meta.gate_poses) {
                Vector3d c = camera::world_to_camera(g.position, s.meta.camera_pose);
                if (c.z() <= 0) continue;
                Eigen::Vector2d px = camera::project_fisheye(cam, c);
                best = std::min(best, std::hypot(px.x() - l.u, px.y() - l.v) + std::abs(c.norm() - l.d));
            }
            EXPECT_LT(best, 0.5);
            EXPECT_GT(l.d, cfg.min_distance);
            EXPECT_LE(l.d, cfg.d_max);
            EXPECT_LT(std::abs(l.theta), std::numbers::pi / 2);
            EXPECT_GE(l.u, 0);
            EXPECT_LT(l.u, 160);
            EXPECT_GE(l.v, 0);
            EXPECT_LT(l.v, 120);
            ++checked;
        }
    }
    EXPECT_GE(checked, 100);
}

TEST(Labels, LightScaleWithinConfig) {
    camera::CameraModel cam;
    SceneConfig cfg;
    for (std::uint64_t i = 0; i < 30; ++i) {
        SceneSample s = generate_scene(mix_seed(8, i), {GateSpec{}}, SpawnBounds{}, cam, cfg);
        EXPECT_GE(s.meta.light_scale, cfg.light_min);
        EXPECT_LE(s.meta.light_scale, cfg.light_max);
    }
}

TEST(Render, GateVisibleAgainstBackground) {
    camera::CameraModel cam;
    SceneLayout layout;
    layout.gates.push_back(gate_at({3, 0, 1.5}, 0.0));
    layout.camera_pose = camera::Pose(Vector3d(0, 0, 1.5), 0.0);
    layout.background_id = 0;
    imagecore::Image bg = render_background(0, 0, 160, 120);
    imagecore::Image img = render_scene(layout, cam);
    // the gate opening shows the background; the frame and panels do not
    EXPECT_EQ(img.at(80, 60, 0), bg.at(80, 60, 0));
    int changed = 0;
    for (int y = 0; y < 120; ++y)
        for (int x = 0; x < 160; ++x) changed += img.at(x, y, 0) != bg.at(x, y, 0) || img.at(x, y, 1) != bg.at(x, y, 1);
    EXPECT_GT(changed, 300);
    // checkerboard panels use pure black and white
    std::set<int> grays;
    for (auto v : img.data()) grays.insert(v);
    EXPECT_TRUE(grays.count(0) && grays.count(255));
}

TEST(Render, LightScaleApplied) {
    camera::CameraModel cam;
    SceneLayout layout;
    layout.gates.push_back(gate_at({3, 0, 1.5}, 0.0));
    layout.camera_pose = camera::Pose(Vector3d(0, 0, 1.5), 0.0);
    imagecore::Image full = render_scene(layout, cam);
    layout.light_scale = 0.5;
    imagecore::Image half = render_scene(layout, cam);
    for (std::size_t i = 0; i < full.data().size(); ++i)
        EXPECT_EQ(half.data()[i], static_cast<int>(std::floor(0.5 * full.data()[i] + 0.5)));
}

TEST(Backgrounds, AtLeastTwelveDistinctGenerators) {
    EXPECT_GE(background_count(), 12);
    std::set<std::vector<std::uint8_t>> seen;
    for (int id = 0; id < background_count(); ++id) {
        imagecore::Image a = render_background(id, 5, 160, 120);
        EXPECT_EQ(a, render_background(id, 5, 160, 120));
        EXPECT_EQ(a.channels(), 3);
        seen.insert(std::vector<std::uint8_t>(a.data().begin(), a.data().end()));
    }
    EXPECT_EQ(static_cast<int>(seen.size()), background_count());
    EXPECT_THROW(render_background(background_count(), 0, 160, 120), InvalidArgument);
}

TEST(Layout, ImpossibleConfigurationFails) {
    camera::CameraModel cam;
    SceneConfig cfg;
    cfg.max_label_yaw = 1e-9;  // no random approach angle is that head-on
    cfg.max_retries = 5;
    EXPECT_THROW(sample_layout(1, {GateSpec{}}, SpawnBounds{}, cam, cfg), GenerationError);
}

TEST(Dataset, GenerateLoadRoundTrip) {
    auto dir = fresh_dir("roundtrip");
    DatasetConfig cfg;
    generate_dataset(6, 11, cfg, dir);
    EXPECT_TRUE(fs::exists(dir / "manifest.json"));
    EXPECT_TRUE(fs::exists(dir / "summary.csv"));
    auto samples = load_all(dir);
    ASSERT_EQ(samples.size(), 6u);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        SceneSample direct = generate_scene(mix_seed(11, i), cfg.gates, cfg.bounds, cfg.cam, cfg.scene);
        EXPECT_EQ(samples[i].image, direct.image);
        ASSERT_EQ(samples[i].labels.size(), direct.labels.size());
        for (std::size_t k = 0; k < direct.labels.size(); ++k) {
            EXPECT_NEAR(samples[i].labels[k].u, direct.labels[k].u, 1e-9);
            EXPECT_NEAR(samples[i].labels[k].theta, direct.labels[k].theta, 1e-9);
        }
        EXPECT_EQ(samples[i].meta.background_id, direct.meta.background_id);
    }
    DatasetReader r(dir);
    EXPECT_EQ(r.declared_count(), 6u);
    EXPECT_DOUBLE_EQ(r.config().scene.d_max, cfg.scene.d_max);
}

TEST(Dataset, SingleSceneLayout) {
    auto dir = fresh_dir("one");
    generate_dataset(1, 3, DatasetConfig{}, dir);
    EXPECT_EQ(read_lines(dir / "annotations.jsonl").size(), 1u);
    int images = 0;
    for (const auto& e : fs::directory_iterator(dir / "images")) images += e.path().extension() == ".png";
    EXPECT_EQ(images, 1);
    auto summary = read_lines(dir / "summary.csv");
    EXPECT_EQ(summary.front(), "x_bin,y_bin,d_bin,theta_bin,count");
}

TEST(Dataset, SeedSensitivity) {
    auto a = fresh_dir("seed_a"), b = fresh_dir("seed_b");
    generate_dataset(2, 1, DatasetConfig{}, a);
    generate_dataset(2, 2, DatasetConfig{}, b);
    EXPECT_NE(imagecore::read_png((a / "images/000000.png").string()), imagecore::read_png((b / "images/000000.png").string()));
}

TEST(Dataset, CorruptLineNamesTheLine) {
    auto dir = fresh_dir("corrupt");
    generate_dataset(3, 4, DatasetConfig{}, dir);
    auto lines = read_lines(dir / "annotations.jsonl");
    lines[1] = "{ this is not json";
    write_lines(dir / "annotations.jsonl", lines);
    DatasetReader r(dir);
    EXPECT_TRUE(r.next().has_value());
    try {
        r.next();
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Dataset, OutOfBoundsLabelRejected) {
    auto dir = fresh_dir("oob");
    generate_dataset(1, 4, DatasetConfig{}, dir);
    auto lines = read_lines(dir / "annotations.jsonl");
    auto j = nlohmann::json::parse(lines[0]);
    j["gates"][0]["u"] = 500.0;
    lines[0] = j.dump();
    write_lines(dir / "annotations.jsonl", lines);
    EXPECT_THROW(load_all(dir), ValidationError);

    j["gates"][0]["u"] = 10.0;
    j["gates"][0]["d"] = -1.0;
    lines[0] = j.dump();
    write_lines(dir / "annotations.jsonl", lines);
    EXPECT_THROW(load_all(dir), ValidationError);
}

TEST(Dataset, MissingImageAndManifest) {
    auto dir = fresh_dir("missing");
    generate_dataset(1, 4, DatasetConfig{}, dir);
    fs::remove(dir / "images/000000.png");
    EXPECT_THROW(load_all(dir), IoError);
    fs::remove(dir / "manifest.json");
    EXPECT_THROW(DatasetReader{dir}, IoError);
}

TEST(Dataset, ConfigJsonRoundTrip) {
    DatasetConfig cfg;
    cfg.scene.d_max = 9.0;
    cfg.gates[0].side = 1.4;
    cfg.cam.fx = 70.0;
    DatasetConfig back = dataset_config_from_json(to_json(cfg));
    EXPECT_DOUBLE_EQ(back.scene.d_max, 9.0);
    EXPECT_DOUBLE_EQ(back.gates[0].side, 1.4);
    EXPECT_DOUBLE_EQ(back.cam.fx, 70.0);
    nlohmann::json bad = to_json(cfg);
    bad["scene"]["d_max"] = "far";
    EXPECT_THROW(dataset_config_from_json(bad), ParseError);
}

TEST(Summary, HistogramCountsMatchLabels) {
    DatasetConfig cfg;
    std::vector<nn::GateLabelSet> labels{{{10, 10, 1.0, 0.0}, {150, 110, 11.9, 1.2}}, {{10, 10, 1.2, 0.05}}};
    auto rows = summarize_labels(labels, cfg);
    long total = 0;
    for (const auto& r : rows) total += r.count;
    EXPECT_EQ(total, 3);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].x_bin, 0);
    EXPECT_EQ(rows[0].d_bin, 1);
    EXPECT_EQ(rows[0].count, 2);
    EXPECT_EQ(rows[1].x_bin, 9);
    EXPECT_EQ(rows[1].d_bin, 11);
}

TEST(Summary, DistanceHistogramSpansRange) {
    auto dir = fresh_dir("spread");
    DatasetConfig cfg;
    generate_dataset(200, 7, cfg, dir);
    std::set<int> d_bins;
    double dmin = 1e9, dmax = 0;
    for (const auto& s : load_all(dir))
        for (const auto& l : s.labels) {
            d_bins.insert(static_cast<int>(l.d));
            dmin = std::min(dmin, l.d);
            dmax = std::max(dmax, l.d);
        }
    EXPECT_GT(dmin, cfg.scene.min_distance);
    EXPECT_LE(dmax, cfg.scene.d_max);
    EXPECT_GE(d_bins.size(), 10u);
}
