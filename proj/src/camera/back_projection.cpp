#include "gateseed/camera/back_projection.hpp"

#include <string>

#include "gateseed/common/errors.hpp"

namespace gateseed::camera {

FrameTransform FrameTransform::from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& t) {
    FrameTransform tf;
    tf.rotation = q.normalized().toRotationMatrix();
    tf.translation = t;
    return tf;
}

void FrameTransform::validate() const {
    const double err = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (!(err <= 1e-9)) throw InvalidArgument("mount rotation is not orthonormal (error " + std::to_string(err) + ")");
}

Pose back_project_gate(const CameraModel& cam, const GateObservation& obs, const Pose& drone_pose,
                       const FrameTransform& mount) {
    if (!(obs.distance > 0.0)) throw InvalidArgument("observation distance must be positive");
    const Eigen::Vector3d ray = unproject_fisheye(cam, {obs.u, obs.v});
    const Eigen::Vector3d in_camera = obs.distance * ray;
    const Eigen::Vector3d in_drone = mount.rotation.transpose() * (optical_to_body() * in_camera) + mount.translation;
    const Eigen::Vector3d in_world = drone_pose.position + drone_pose.body_to_world() * in_drone;
    return Pose(in_world, drone_pose.yaw + obs.yaw);
}

Eigen::Vector3d world_to_camera(const Eigen::Vector3d& world_point, const Pose& drone_pose,
                                const FrameTransform& mount) {
    const Eigen::Vector3d in_drone = drone_pose.body_to_world().transpose() * (world_point - drone_pose.position);
    return optical_to_body().transpose() * (mount.rotation * (in_drone - mount.translation));
}

}  // namespace gateseed::camera
