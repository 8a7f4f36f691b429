#pragma once

#include <cstdint>
#include <vector>

#include "gateseed/camera/camera_model.hpp"
#include "gateseed/camera/pose.hpp"
#include "gateseed/mapping/gate_map.hpp"

namespace gateseed::mapping {

struct TrackGate {
    int id = 0;
    camera::Pose pose;  // center and traversal heading
};

// Four gates on a rectangular loop, at least 10 m apart.
std::vector<TrackGate> default_track();

struct FlightSimConfig {
    int laps = 3;
    int steps_per_gate = 40;     // frames on each approach
    double approach_start = 9.0;  // meters before the gate
    double approach_end = 1.0;
    double d_max = 12.0;
    double pixel_noise = 0.5;       // sigma, pixels
    double distance_noise = 0.03;   // sigma as a fraction of the distance
    double yaw_noise = 0.03;        // sigma, radians
    double anchor_jitter = 1.0;     // max prior error per axis, meters
    std::vector<Anchor> anchors;    // explicit priors; empty = jittered truth
    std::uint64_t seed = 1;
    camera::CameraModel cam;
    MapConfig map;
};

struct FlightSimResult {
    GateMap map;
    std::vector<MapEvent> events;
    std::vector<Anchor> anchors;
    int frames = 0;
};

// Flies straight approaches through each gate in order, observing every gate
// whose front face is in view with noisy (u, v, d, theta), and fuses the
// observations into a map seeded with jittered anchors.
FlightSimResult simulate_flight(const std::vector<TrackGate>& track, const FlightSimConfig& cfg);

}  // namespace gateseed::mapping
