#include "gateseed/datagen/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gateseed/camera/back_projection.hpp"
#include "gateseed/common/angles.hpp"
#include "gateseed/common/errors.hpp"
#include "gateseed/imagecore/perturb.hpp"
#include "scene_rng.hpp"

namespace gateseed::datagen {

using camera::CameraModel;
using camera::Pose;
using detail::SceneRng;
using Eigen::Vector3d;

void GateSpec::validate() const {
    if (!(side > 0.0) || !(frame_width > 0.0))
        throw InvalidArgument("gate side and frame width must be positive");
    if (!(panel_size > 0.0) || panel_size > outer_half())
        throw InvalidArgument("corner panel must fit inside half the gate");
    if (corner_pattern < 1) throw InvalidArgument("corner pattern needs at least one cell");
}

void SpawnBounds::validate() const {
    if (!min.allFinite() || !max.allFinite()) throw InvalidArgument("spawn bounds must be finite");
    if ((max.array() < min.array()).any()) throw InvalidArgument("spawn bounds min exceeds max");
}

namespace {

constexpr Rgb kBlack{0, 0, 0};
constexpr Rgb kWhite{255, 255, 255};

Vector3d heading(double yaw) { return {std::cos(yaw), std::sin(yaw), 0.0}; }
Vector3d lateral(double yaw) { return {-std::sin(yaw), std::cos(yaw), 0.0}; }

bool front_faces(const PlacedGate& gate, const Vector3d& viewer) {
    return (viewer - gate.center).dot(heading(gate.yaw)) < 0.0;
}

struct PixelRect {
    int x0, y0, x1, y1;  // half-open
};

// Screen-space bound of the gate outline; the whole image when part of the
// outline is behind the camera.
PixelRect gate_bounds(const PlacedGate& gate, const Pose& cam_pose, const CameraModel& cam) {
    const PixelRect full{0, 0, cam.width, cam.height};
    const double r = gate.spec.outer_half();
    const Vector3d lat = lateral(gate.yaw), up = Vector3d::UnitZ();
    const Vector3d corners[4] = {gate.center + r * (-lat - up), gate.center + r * (lat - up),
                                 gate.center + r * (lat + up), gate.center + r * (-lat + up)};
    constexpr int kSamples = 16;
    double xmin = 1e300, ymin = 1e300, xmax = -1e300, ymax = -1e300;
    for (int e = 0; e < 4; ++e) {
        for (int s = 0; s < kSamples; ++s) {
            double t = static_cast<double>(s) / kSamples;
            Vector3d p = camera::world_to_camera((1 - t) * corners[e] + t * corners[(e + 1) % 4], cam_pose);
            if (p.z() <= 1e-3) return full;
            Eigen::Vector2d px = camera::project_fisheye(cam, p);
            xmin = std::min(xmin, px.x());
            xmax = std::max(xmax, px.x());
            ymin = std::min(ymin, px.y());
            ymax = std::max(ymax, px.y());
        }
    }
    constexpr double kPad = 2.0;
    auto lo = [](double v, int limit) { return static_cast<int>(std::clamp(std::floor(v - kPad), 0.0, double(limit))); };
    auto hi = [](double v, int limit) { return static_cast<int>(std::clamp(std::ceil(v + kPad) + 1, 0.0, double(limit))); };
    return {lo(xmin, cam.width), lo(ymin, cam.height), hi(xmax, cam.width), hi(ymax, cam.height)};
}

void draw_gate(imagecore::Image& img, const PlacedGate& gate, const Pose& cam_pose, const CameraModel& cam,
               const std::vector<Vector3d>& rays) {
    const GateSpec& spec = gate.spec;
    const Vector3d n = heading(gate.yaw), lat = lateral(gate.yaw);
    const Vector3d origin = cam_pose.position;
    const bool front = front_faces(gate, origin);
    const double outer = spec.outer_half();
    const double inner = spec.side / 2.0;
    const double panel_start = outer - spec.panel_size;
    const double cell = spec.panel_size / spec.corner_pattern;
    const double plane_offset = (gate.center - origin).dot(n);
    const Rgb back_panel{static_cast<std::uint8_t>(gate.frame_color[0] * 3 / 5),
                         static_cast<std::uint8_t>(gate.frame_color[1] * 3 / 5),
                         static_cast<std::uint8_t>(gate.frame_color[2] * 3 / 5)};

    const PixelRect box = gate_bounds(gate, cam_pose, cam);
    for (int y = box.y0; y < box.y1; ++y) {
        for (int x = box.x0; x < box.x1; ++x) {
            const Vector3d& dir = rays[static_cast<std::size_t>(y) * cam.width + x];
            double denom = dir.dot(n);
            if (std::abs(denom) < 1e-12) continue;
            double t = plane_offset / denom;
            if (t <= 1e-6) continue;
            Vector3d q = origin + t * dir - gate.center;
            double a = std::abs(q.dot(lat)), b = std::abs(q.z());
            if (a > outer || b > outer) continue;

            const Rgb* color = nullptr;
            Rgb checker{};
            if (a >= panel_start && b >= panel_start) {
                if (front) {
                    int i = std::min(static_cast<int>((a - panel_start) / cell), spec.corner_pattern - 1);
                    int j = std::min(static_cast<int>((b - panel_start) / cell), spec.corner_pattern - 1);
                    checker = ((i + j) & 1) ? kWhite : kBlack;
                    color = &checker;
                } else {
                    color = &back_panel;
                }
            } else if (a >= inner || b >= inner) {
                color = &gate.frame_color;
            }
            if (!color) continue;
            for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = (*color)[static_cast<std::size_t>(ch)];
        }
    }
}

// World-frame unit rays of every pixel center.
std::vector<Vector3d> pixel_rays(const Pose& cam_pose, const CameraModel& cam) {
    const Eigen::Matrix3d r = cam_pose.body_to_world() * camera::optical_to_body();
    std::vector<Vector3d> rays(static_cast<std::size_t>(cam.width) * cam.height);
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x)
            rays[static_cast<std::size_t>(y) * cam.width + x] =
                r * camera::unproject_fisheye(cam, Eigen::Vector2d(x + 0.5, y + 0.5));
    return rays;
}

Rgb gate_color(SceneRng& rng) {
    // saturated hue: one strong channel, one weak, one free
    Rgb c{};
    int strong = rng.index(3), weak = (strong + 1 + rng.index(2)) % 3;
    for (int i = 0; i < 3; ++i) {
        int v = i == strong ? rng.range(170, 250) : i == weak ? rng.range(10, 70) : rng.range(10, 250);
        c[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
    }
    return c;
}

}  // namespace

imagecore::Image render_scene(const SceneLayout& layout, const CameraModel& cam) {
    cam.validate();
    imagecore::Image img = render_background(layout.background_id, layout.background_seed, cam.width, cam.height);
    const std::vector<Vector3d> rays = pixel_rays(layout.camera_pose, cam);

    std::vector<std::size_t> order(layout.gates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const Vector3d eye = layout.camera_pose.position;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return (layout.gates[a].center - eye).norm() > (layout.gates[b].center - eye).norm();
    });
    for (std::size_t i : order) {
        layout.gates[i].spec.validate();
        draw_gate(img, layout.gates[i], layout.camera_pose, cam, rays);
    }
    if (layout.light_scale != 1.0) img = imagecore::scale_intensity(img, layout.light_scale);
    return img;
}

std::optional<nn::GateLabel> label_gate(const PlacedGate& gate, const Pose& camera_pose, const CameraModel& cam,
                                        const SceneConfig& cfg) {
    if (!front_faces(gate, camera_pose.position)) return std::nullopt;
    Vector3d p = camera::world_to_camera(gate.center, camera_pose);
    if (p.z() <= 1e-6) return std::nullopt;
    double d = p.norm();
    if (!(d > cfg.min_distance && d <= cfg.d_max)) return std::nullopt;
    Eigen::Vector2d px = camera::project_fisheye(cam, p);
    if (px.x() < 0.0 || px.x() >= cam.width || px.y() < 0.0 || px.y() >= cam.height) return std::nullopt;
    double theta = normalize_angle(gate.yaw - camera_pose.yaw);
    if (std::abs(theta) >= cfg.max_label_yaw) return std::nullopt;
    return nn::GateLabel{px.x(), px.y(), d, theta};
}

nn::GateLabelSet label_scene(const SceneLayout& layout, const CameraModel& cam, const SceneConfig& cfg) {
    nn::GateLabelSet labels;
    for (const PlacedGate& g : layout.gates)
        if (auto label = label_gate(g, layout.camera_pose, cam, cfg)) labels.push_back(*label);
    return labels;
}

SceneLayout sample_layout(std::uint64_t seed, const std::vector<GateSpec>& gate_specs, const SpawnBounds& bounds,
                          const CameraModel& cam, const SceneConfig& cfg) {
    if (gate_specs.empty()) throw InvalidArgument("at least one gate spec is required");
    for (const GateSpec& s : gate_specs) s.validate();
    bounds.validate();
    cam.validate();
    if (cfg.max_gates < 1) throw InvalidArgument("max_gates must be >= 1");
    if (!(cfg.d_max > cfg.min_distance) || !(cfg.min_distance >= 0.0))
        throw InvalidArgument("distance range must satisfy 0 <= min_distance < d_max");
    if (!(cfg.light_min > 0.0) || cfg.light_max > 1.0 || cfg.light_min > cfg.light_max)
        throw InvalidArgument("light range must lie in (0, 1]");
    if (!(cfg.max_label_yaw > 0.0) || cfg.max_label_yaw >= M_PI / 2)
        throw InvalidArgument("max_label_yaw must lie in (0, pi/2)");

    SceneRng rng(seed);
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        SceneLayout layout;
        const int count = rng.range(1, cfg.max_gates);
        for (int i = 0; i < count; ++i) {
            PlacedGate g;
            g.spec = gate_specs[static_cast<std::size_t>(rng.index(static_cast<int>(gate_specs.size())))];
            bool placed = false;
            for (int tries = 0; tries < 50 && !placed; ++tries) {
                for (int k = 0; k < 3; ++k) g.center[k] = rng.uniform(bounds.min[k], bounds.max[k]);
                placed = std::all_of(layout.gates.begin(), layout.gates.end(), [&](const PlacedGate& o) {
                    return (o.center - g.center).norm() >= cfg.min_gate_spacing;
                });
            }
            if (!placed) break;
            g.yaw = normalize_angle(rng.uniform(-M_PI, M_PI));
            g.frame_color = gate_color(rng);
            layout.gates.push_back(g);
        }

        // Camera on the front side of the first gate, looking roughly at it.
        const PlacedGate& target = layout.gates.front();
        double w = std::pow(1.0 - rng.uniform(), 1.3);  // (0, 1], denser near
        double d = cfg.min_distance + (cfg.d_max - cfg.min_distance) * w;
        double elevation = rng.uniform(-0.5, 0.5);
        double approach = rng.uniform(-1.2, 1.2);
        double aim = rng.uniform(-0.9, 0.9);
        double dz = -d * std::sin(elevation);
        double dh = d * std::cos(elevation);
        double bearing = target.yaw + approach;
        Vector3d eye = target.center - dh * heading(bearing);
        eye.z() += dz;
        if (eye.z() < 0.2) continue;
        layout.camera_pose = Pose(eye, bearing + aim);

        if (!label_gate(target, layout.camera_pose, cam, cfg)) continue;
        layout.light_scale = rng.uniform(cfg.light_min, cfg.light_max);
        layout.background_id = rng.index(background_count());
        layout.background_seed = rng.next();
        return layout;
    }
    throw GenerationError(seed, "no valid camera pose after " + std::to_string(cfg.max_retries) + " attempts");
}

SceneSample generate_scene(std::uint64_t seed, const std::vector<GateSpec>& gate_specs, const SpawnBounds& bounds,
                           const CameraModel& cam, const SceneConfig& cfg) {
    SceneLayout layout = sample_layout(seed, gate_specs, bounds, cam, cfg);
    SceneSample sample;
    sample.image = render_scene(layout, cam);
    sample.labels = label_scene(layout, cam, cfg);
    sample.meta.background_id = layout.background_id;
    sample.meta.light_scale = layout.light_scale;
    sample.meta.camera_pose = layout.camera_pose;
    for (const PlacedGate& g : layout.gates) sample.meta.gate_poses.emplace_back(g.center, g.yaw);
    sample.meta.seed = seed;
    return sample;
}

}  // namespace gateseed::datagen
