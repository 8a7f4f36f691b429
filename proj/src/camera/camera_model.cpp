#include "gateseed/camera/camera_model.hpp"

#include <cmath>
#include <string>

#include "gateseed/common/errors.hpp"

namespace gateseed::camera {
namespace {

constexpr double kOnAxis = 1e-15;
constexpr int kMaxIterations = 20;
constexpr double kResidualTolerance = 1e-10;

}  // namespace

void CameraModel::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidArgument("focal lengths must be positive");
    if (width <= 0 || height <= 0) throw InvalidArgument("camera image size must be positive");
    if (!(cx >= 0.0 && cx <= width) || !(cy >= 0.0 && cy <= height))
        throw InvalidArgument("principal point (" + std::to_string(cx) + ", " + std::to_string(cy) +
                              ") lies outside the image");
}

double CameraModel::distort_angle(double theta) const {
    const double t2 = theta * theta;
    return theta * (1.0 + t2 * (k[0] + t2 * (k[1] + t2 * (k[2] + t2 * k[3]))));
}

Eigen::Vector2d project_fisheye(const CameraModel& cam, const Eigen::Vector3d& point) {
    if (!(point.z() > 0.0))
        throw InvalidArgument("point is behind the camera (z = " + std::to_string(point.z()) + ")");
    const double r = std::hypot(point.x(), point.y());
    if (r < kOnAxis) return {cam.cx, cam.cy};
    const double theta = std::atan2(r, point.z());
    const double theta_d = cam.distort_angle(theta);
    return {cam.fx * theta_d * point.x() / r + cam.cx, cam.fy * theta_d * point.y() / r + cam.cy};
}

Eigen::Vector3d unproject_fisheye(const CameraModel& cam, const Eigen::Vector2d& pixel) {
    if (!pixel.allFinite()) throw InvalidArgument("pixel coordinates must be finite");
    const double mx = (pixel.x() - cam.cx) / cam.fx;
    const double my = (pixel.y() - cam.cy) / cam.fy;
    const double theta_d = std::hypot(mx, my);
    if (theta_d < kOnAxis) return Eigen::Vector3d::UnitZ();

    double theta = theta_d;
    double residual = cam.distort_angle(theta) - theta_d;
    int iter = 0;
    for (; iter < kMaxIterations && std::abs(residual) > 1e-15; ++iter) {
        const double t2 = theta * theta;
        const double slope =
            1.0 + t2 * (3.0 * cam.k[0] + t2 * (5.0 * cam.k[1] + t2 * (7.0 * cam.k[2] + t2 * 9.0 * cam.k[3])));
        if (slope == 0.0) break;
        const double step = residual / slope;
        theta -= step;
        residual = cam.distort_angle(theta) - theta_d;
        if (std::abs(step) < 1e-16) break;
    }
    if (!(std::abs(residual) < kResidualTolerance))
        throw NumericError("fish-eye undistortion did not converge after " + std::to_string(iter) +
                               " iterations",
                           residual);

    const double s = std::sin(theta) / theta_d;
    return {s * mx, s * my, std::cos(theta)};
}

}  // namespace gateseed::camera
