#pragma once

#include <random>

#include <Eigen/Cholesky>

#include "gateseed/mapping/gate_map.hpp"

namespace gateseed::testing {

struct EkfRun {
    double position_error = 0.0;
    bool always_pd = true;
};

// Static gate at `truth`, anchor 2 m off, `n` position measurements with
// isotropic noise `sigma` fused with the matching measurement covariance.
inline EkfRun static_gate_run(std::uint64_t seed, int n = 50, double sigma = 0.1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    const Eigen::Vector3d truth(4.0, -2.0, 1.6);
    const double yaw = 0.7;
    mapping::GateMap map({{0, truth + Eigen::Vector3d(1.5, -1.0, 0.8)}});
    mapping::GateFilter f = map.gate(0);
    mapping::Matrix4d r = mapping::Vector4d(sigma * sigma, sigma * sigma, sigma * sigma, 0.05 * 0.05).asDiagonal();
    EkfRun out;
    for (int i = 0; i < n; ++i) {
        camera::Pose z(truth + Eigen::Vector3d(noise(rng), noise(rng), noise(rng)), yaw + 0.5 * noise(rng));
        f = mapping::ekf_update(f, z, r, map.config().process_noise);
        if (Eigen::LLT<mapping::Matrix4d>(f.covariance).info() != Eigen::Success) out.always_pd = false;
    }
    out.position_error = (f.state.head<3>() - truth).norm();
    return out;
}

}  // namespace gateseed::testing
