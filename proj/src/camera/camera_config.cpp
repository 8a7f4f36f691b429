#include "gateseed/camera/camera_config.hpp"

#include <fstream>
#include <iomanip>

#include "gateseed/common/errors.hpp"

namespace gateseed::camera {

CameraRig camera_rig_from_config(const KeyValueConfig& cfg) {
    CameraRig rig;
    CameraModel& m = rig.model;
    m.fx = cfg.get_double("fx", m.fx);
    m.fy = cfg.get_double("fy", m.fy);
    m.cx = cfg.get_double("cx", m.cx);
    m.cy = cfg.get_double("cy", m.cy);
    for (int i = 0; i < 4; ++i)
        m.k[static_cast<std::size_t>(i)] = cfg.get_double("k" + std::to_string(i + 1), m.k[static_cast<std::size_t>(i)]);
    m.width = static_cast<int>(cfg.get_int("width", m.width));
    m.height = static_cast<int>(cfg.get_int("height", m.height));
    m.validate();

    const Eigen::Quaterniond q(cfg.get_double("mount_qw", 1.0), cfg.get_double("mount_qx", 0.0),
                               cfg.get_double("mount_qy", 0.0), cfg.get_double("mount_qz", 0.0));
    if (q.norm() < 1e-12) throw InvalidArgument("mount quaternion has zero norm");
    rig.mount = FrameTransform::from_quaternion(
        q, {cfg.get_double("mount_tx", 0.0), cfg.get_double("mount_ty", 0.0), cfg.get_double("mount_tz", 0.0)});
    rig.mount.validate();
    return rig;
}

CameraRig load_camera_rig(const std::string& path) {
    return camera_rig_from_config(KeyValueConfig::from_file(path));
}

void save_camera_rig(const std::string& path, const CameraRig& rig) {
    std::ofstream out(path);
    if (!out) throw IoError(path, "cannot open for writing");
    const auto& m = rig.model;
    const Eigen::Quaterniond q(rig.mount.rotation);
    out << std::setprecision(17);
    out << "# fish-eye camera (equidistant model)\n"
        << "width = " << m.width << "\nheight = " << m.height << '\n'
        << "fx = " << m.fx << "\nfy = " << m.fy << "\ncx = " << m.cx << "\ncy = " << m.cy << '\n'
        << "k1 = " << m.k[0] << "\nk2 = " << m.k[1] << "\nk3 = " << m.k[2] << "\nk4 = " << m.k[3] << '\n'
        << "# camera mount in the drone frame\n"
        << "mount_qw = " << q.w() << "\nmount_qx = " << q.x() << "\nmount_qy = " << q.y()
        << "\nmount_qz = " << q.z() << '\n'
        << "mount_tx = " << rig.mount.translation.x() << "\nmount_ty = " << rig.mount.translation.y()
        << "\nmount_tz = " << rig.mount.translation.z() << '\n';
    if (!out) throw IoError(path, "write failed");
}

}  // namespace gateseed::camera
