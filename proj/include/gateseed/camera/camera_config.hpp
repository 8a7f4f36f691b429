#pragma once

#include <string>

#include "gateseed/camera/camera_model.hpp"
#include "gateseed/camera/pose.hpp"
#include "gateseed/common/kv_config.hpp"

namespace gateseed::camera {

struct CameraRig {
    CameraModel model;
    FrameTransform mount;
};

// Keys: fx fy cx cy k1 k2 k3 k4 width height, mount_qw mount_qx mount_qy
// mount_qz (unit quaternion, R^D_C), mount_tx mount_ty mount_tz (meters).
// Missing keys keep their defaults.
CameraRig camera_rig_from_config(const KeyValueConfig& cfg);
CameraRig load_camera_rig(const std::string& path);
void save_camera_rig(const std::string& path, const CameraRig& rig);

}  // namespace gateseed::camera
