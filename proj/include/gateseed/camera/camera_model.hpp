#pragma once

#include <array>
#include <string>

#include <Eigen/Core>

namespace gateseed::camera {

// Equidistant (Kannala-Brandt, four coefficient) fish-eye camera.
//
// Camera frame: x right, y down, z along the optical axis.
struct CameraModel {
    double fx = 80.0;
    double fy = 80.0;
    double cx = 80.0;
    double cy = 60.0;
    std::array<double, 4> k{-0.02, 0.004, 0.0, 0.0};
    int width = 160;
    int height = 120;

    // Throws InvalidArgument on non-positive focal lengths or a principal
    // point outside the image.
    void validate() const;

    // theta_d = theta * (1 + k1 theta^2 + k2 theta^4 + k3 theta^6 + k4 theta^8)
    double distort_angle(double theta) const;
};

// Maps a point with z > 0 to pixel coordinates. Throws InvalidArgument for
// points on or behind the image plane.
Eigen::Vector2d project_fisheye(const CameraModel& cam, const Eigen::Vector3d& point);

// Unit-norm viewing ray for a pixel. Inverts the distortion polynomial with
// Newton iterations; throws NumericError (residual attached) if it fails to
// reach 1e-10 within 20 iterations.
Eigen::Vector3d unproject_fisheye(const CameraModel& cam, const Eigen::Vector2d& pixel);

}  // namespace gateseed::camera
