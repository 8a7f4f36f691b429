#pragma once

#include "gateseed/camera/camera_model.hpp"
#include "gateseed/camera/pose.hpp"
#include "gateseed/common/types.hpp"

namespace gateseed::camera {

// World-frame gate pose from a detection: the ray through the detected center
// is scaled by the predicted distance, rotated through the camera mount and
// the drone heading, and offset by the drone position. The gate heading is
// the drone heading plus the relative yaw.
Pose back_project_gate(const CameraModel& cam, const GateObservation& obs, const Pose& drone_pose,
                       const FrameTransform& mount = FrameTransform::identity());

// Inverse direction: a world point expressed in the optical frame of a camera
// carried by a drone at `drone_pose`.
Eigen::Vector3d world_to_camera(const Eigen::Vector3d& world_point, const Pose& drone_pose,
                                const FrameTransform& mount = FrameTransform::identity());

}  // namespace gateseed::camera
