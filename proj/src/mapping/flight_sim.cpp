#include "gateseed/mapping/flight_sim.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gateseed/camera/back_projection.hpp"
#include "gateseed/common/angles.hpp"
#include "gateseed/common/errors.hpp"

namespace gateseed::mapping {

using Eigen::Vector3d;

std::vector<TrackGate> default_track() {
    const double pi = std::numbers::pi;
    return {
        {0, camera::Pose({10.0, 0.0, 1.5}, 0.0)},
        {1, camera::Pose({20.0, 10.0, 1.8}, pi / 2)},
        {2, camera::Pose({10.0, 20.0, 1.5}, pi)},
        {3, camera::Pose({0.0, 10.0, 1.8}, -pi / 2)},
    };
}

namespace {

std::optional<GateObservation> observe(const TrackGate& gate, const camera::Pose& drone, const FlightSimConfig& cfg) {
    const Vector3d n(std::cos(gate.pose.yaw), std::sin(gate.pose.yaw), 0.0);
    if ((drone.position - gate.pose.position).dot(n) >= 0.0) return std::nullopt;  // back face
    Vector3d p = camera::world_to_camera(gate.pose.position, drone);
    if (p.z() <= 0.1) return std::nullopt;
    double d = p.norm();
    if (d > cfg.d_max) return std::nullopt;
    Eigen::Vector2d px = camera::project_fisheye(cfg.cam, p);
    if (px.x() < 0 || px.y() < 0 || px.x() >= cfg.cam.width || px.y() >= cfg.cam.height) return std::nullopt;
    double theta = normalize_angle(gate.pose.yaw - drone.yaw);
    if (std::abs(theta) >= std::numbers::pi / 2) return std::nullopt;
    return GateObservation{px.x(), px.y(), d, theta, 1.0};
}

}  // namespace

FlightSimResult simulate_flight(const std::vector<TrackGate>& track, const FlightSimConfig& cfg) {
    if (track.empty()) throw InvalidArgument("flight simulation needs at least one gate");
    if (cfg.laps < 1 || cfg.steps_per_gate < 1) throw InvalidArgument("laps and steps_per_gate must be >= 1");
    if (!(cfg.approach_start > cfg.approach_end) || !(cfg.approach_end > 0.0))
        throw InvalidArgument("approach must run from a larger to a smaller positive distance");
    cfg.cam.validate();

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> jitter(-cfg.anchor_jitter, cfg.anchor_jitter);
    std::normal_distribution<double> unit(0.0, 1.0);

    std::vector<Anchor> anchors = cfg.anchors;
    if (anchors.empty())
        for (const TrackGate& g : track)
            anchors.push_back({g.id, g.pose.position + Vector3d(jitter(rng), jitter(rng), jitter(rng))});

    FlightSimResult result{GateMap(anchors, cfg.map), {}, anchors, 0};
    for (int lap = 0; lap < cfg.laps; ++lap) {
        for (const TrackGate& target : track) {
            const Vector3d n(std::cos(target.pose.yaw), std::sin(target.pose.yaw), 0.0);
            for (int step = 0; step < cfg.steps_per_gate; ++step) {
                double t = cfg.steps_per_gate > 1 ? static_cast<double>(step) / (cfg.steps_per_gate - 1) : 0.0;
                double back = cfg.approach_start + (cfg.approach_end - cfg.approach_start) * t;
                camera::Pose drone(target.pose.position - back * n, target.pose.yaw);

                std::vector<GateObservation> obs;
                for (const TrackGate& g : track) {
                    auto o = observe(g, drone, cfg);
                    if (!o) continue;
                    o->u += cfg.pixel_noise * unit(rng);
                    o->v += cfg.pixel_noise * unit(rng);
                    o->distance *= 1.0 + cfg.distance_noise * unit(rng);
                    o->yaw = normalize_angle(o->yaw + cfg.yaw_noise * unit(rng));
                    if (o->u < 0 || o->v < 0 || o->u >= cfg.cam.width || o->v >= cfg.cam.height || o->distance <= 0)
                        continue;
                    obs.push_back(*o);
                }
                auto events = map_update(result.map, cfg.cam, drone, obs);
                result.events.insert(result.events.end(), events.begin(), events.end());
                ++result.frames;
            }
        }
    }
    return result;
}

}  // namespace gateseed::mapping
