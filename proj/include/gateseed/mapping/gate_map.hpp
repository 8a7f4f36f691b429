#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gateseed/camera/back_projection.hpp"
#include "gateseed/camera/camera_model.hpp"
#include "gateseed/camera/pose.hpp"
#include "gateseed/common/types.hpp"

namespace gateseed::mapping {

using Vector4d = Eigen::Matrix<double, 4, 1>;
using Matrix4d = Eigen::Matrix<double, 4, 4>;

inline constexpr double kAssociationRadius = 6.0;

// Coarse prior location of a gate.
struct Anchor {
    int id = 0;
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

struct MapConfig {
    double association_radius = kAssociationRadius;
    double process_noise = 1e-6;       // per-step variance added to every state component
    double position_noise_per_m = 0.05;  // measurement sigma per meter of observed distance
    double yaw_noise = 0.05;             // radians
    Vector4d initial_sigma{5.0, 5.0, 5.0, 3.14159265358979323846};
};

// Static-gate filter over (x, y, z, yaw).
struct GateFilter {
    int id = 0;
    Vector4d state = Vector4d::Zero();
    Matrix4d covariance = Matrix4d::Identity();
    Eigen::Vector3d prior_anchor = Eigen::Vector3d::Zero();
    int update_count = 0;
    std::optional<camera::Pose> last_measurement;

    camera::Pose pose() const { return camera::Pose(state.head<3>(), state[3]); }
};

class GateMap {
public:
    // Throws InvalidArgument on duplicate ids or anchors closer than the
    // association radius.
    explicit GateMap(std::vector<Anchor> anchors, MapConfig cfg = {});

    const MapConfig& config() const { return cfg_; }
    const std::vector<GateFilter>& gates() const { return gates_; }
    bool empty() const { return gates_.empty(); }
    // Throws InvalidArgument for an unknown id.
    const GateFilter& gate(int id) const;
    GateFilter& gate(int id);

private:
    MapConfig cfg_;
    std::vector<GateFilter> gates_;  // sorted by id
};

// Nearest prior anchor within the association radius; ties go to the lower
// id. nullopt when every anchor is farther (or the map is empty).
std::optional<int> associate_measurement(const GateMap& map, const camera::Pose& measured);

// diag((k d)^2, (k d)^2, (k d)^2, yaw_noise^2).
Matrix4d measurement_noise(double distance, const MapConfig& cfg = {});

// The measurement is a direct pose observation, so its Jacobian is the
// identity; kept as a hook for nonlinear measurement models.
inline Matrix4d measurement_jacobian(const Vector4d& /*state*/) { return Matrix4d::Identity(); }

// Identity-transition prediction with process noise, then a Kalman update
// with wrapped yaw innovation and Joseph-form covariance. Throws
// NumericError if the prior covariance or the innovation covariance is not
// positive-definite.
GateFilter ekf_update(const GateFilter& filter, const camera::Pose& measured, const Matrix4d& meas_noise,
                      double process_noise = 1e-6);

struct MapEvent {
    enum class Kind { Fused, Rejected };
    Kind kind = Kind::Rejected;
    int gate_id = -1;
    GateObservation observation;
    camera::Pose measured;
    double anchor_distance = 0.0;  // to the nearest anchor
};

// Back-projects, associates and fuses every observation in order.
std::vector<MapEvent> map_update(GateMap& map, const camera::CameraModel& cam, const camera::Pose& drone_pose,
                                 const std::vector<GateObservation>& observations,
                                 const camera::FrameTransform& mount = camera::FrameTransform::identity());

std::vector<Anchor> load_anchors(const std::string& path);
void save_anchors(const std::string& path, const std::vector<Anchor>& anchors);

// Per gate: anchor, last raw measurement and filtered estimate with covariance.
std::string map_to_json(const GateMap& map, const std::vector<MapEvent>& events, int indent = 2);
void save_map(const std::string& path, const GateMap& map, const std::vector<MapEvent>& events);

}  // namespace gateseed::mapping
