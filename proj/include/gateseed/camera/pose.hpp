#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "gateseed/common/angles.hpp"

namespace gateseed::camera {

// Upright pose: position plus heading about world +z.
struct Pose {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    double yaw = 0.0;

    Pose() = default;
    Pose(const Eigen::Vector3d& p, double heading) : position(p), yaw(normalize_angle(heading)) {}

    // Body-to-world rotation, i.e. the inverse of R^W_D.
    Eigen::Matrix3d body_to_world() const {
        return Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    }
};

// Rigid transform between frames. `rotation` maps drone-frame vectors into the
// camera-mount frame (R^D_C); `translation` is the camera origin expressed in
// the drone frame.
struct FrameTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    static FrameTransform identity() { return {}; }
    static FrameTransform from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& t);

    // Throws InvalidArgument unless R^T R = I within 1e-9.
    void validate() const;
};

// Optical frame (x right, y down, z forward) to body frame (x forward,
// y left, z up).
inline Eigen::Matrix3d optical_to_body() {
    Eigen::Matrix3d a;
    a << 0, 0, 1,
        -1, 0, 0,
        0, -1, 0;
    return a;
}

}  // namespace gateseed::camera
