#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "gateseed/camera/camera_model.hpp"
#include "gateseed/camera/pose.hpp"
#include "gateseed/imagecore/image.hpp"
#include "gateseed/nn/grid.hpp"

namespace gateseed::datagen {

// Square gate: an open square of `side` meters framed by a bar of
// `frame_width`, with a checkerboard panel of `panel_size` meters at each
// outer corner (corner_pattern x corner_pattern cells, front face only).
struct GateSpec {
    double side = 1.0;
    double frame_width = 0.12;
    double panel_size = 0.36;
    int corner_pattern = 4;

    double outer_half() const { return side / 2.0 + frame_width; }
    void validate() const;
};

using Rgb = std::array<std::uint8_t, 3>;

// Upright gate in the world. `yaw` is the traversal heading: the front face
// looks against it, so a camera with the same yaw standing before the gate
// sees the front.
struct PlacedGate {
    GateSpec spec;
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double yaw = 0.0;
    Rgb frame_color{230, 120, 30};
};

struct SceneLayout {
    std::vector<PlacedGate> gates;
    camera::Pose camera_pose;  // level camera, optical axis along the heading
    int background_id = 0;
    std::uint64_t background_seed = 0;
    double light_scale = 1.0;
};

struct SpawnBounds {
    Eigen::Vector3d min{-10.0, -10.0, 1.0};
    Eigen::Vector3d max{10.0, 10.0, 2.2};
    void validate() const;
};

struct SceneConfig {
    double d_max = 12.0;
    double min_distance = 0.5;
    int max_gates = 3;
    double min_gate_spacing = 2.5;
    double light_min = 0.3;
    double light_max = 1.0;
    double max_label_yaw = 1.3;  // radians, strictly below pi/2
    int max_retries = 200;
};

struct SceneMeta {
    int background_id = 0;
    double light_scale = 1.0;
    camera::Pose camera_pose;
    std::vector<camera::Pose> gate_poses;  // world centers and headings, labeled or not
    std::uint64_t seed = 0;
};

struct SceneSample {
    imagecore::Image image;  // RGB
    nn::GateLabelSet labels;
    SceneMeta meta;
};

int background_count();

// Piecewise-constant RGB background for generator `id` in [0, background_count()).
imagecore::Image render_background(int id, std::uint64_t seed, int width, int height);

// Flat-shaded render: background, then gates far-to-near, each pixel colored
// by casting its fish-eye ray against the gate plane. Applies the layout's
// light scale last.
imagecore::Image render_scene(const SceneLayout& layout, const camera::CameraModel& cam);

// Label of one gate as seen from `camera_pose`, or nullopt when the gate is
// not a usable front-facing target: center behind the camera or outside the
// image, distance outside (min_distance, d_max], back face toward the camera,
// or relative yaw beyond max_label_yaw.
std::optional<nn::GateLabel> label_gate(const PlacedGate& gate, const camera::Pose& camera_pose,
                                        const camera::CameraModel& cam, const SceneConfig& cfg);

nn::GateLabelSet label_scene(const SceneLayout& layout, const camera::CameraModel& cam, const SceneConfig& cfg);

// Random layout with 1..max_gates gates and a camera placed so that the first
// gate is a valid labeled target. Throws GenerationError after max_retries.
SceneLayout sample_layout(std::uint64_t seed, const std::vector<GateSpec>& gate_specs, const SpawnBounds& bounds,
                          const camera::CameraModel& cam, const SceneConfig& cfg);

SceneSample generate_scene(std::uint64_t seed, const std::vector<GateSpec>& gate_specs, const SpawnBounds& bounds,
                           const camera::CameraModel& cam, const SceneConfig& cfg = {});

}  // namespace gateseed::datagen
