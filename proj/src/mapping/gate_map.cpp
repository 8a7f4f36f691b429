#include "gateseed/mapping/gate_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Cholesky>

#include "gateseed/common/angles.hpp"
#include "gateseed/common/errors.hpp"
#include "json.hpp"

namespace gateseed::mapping {

using nlohmann::json;

GateMap::GateMap(std::vector<Anchor> anchors, MapConfig cfg) : cfg_(cfg) {
    if (!(cfg_.association_radius > 0.0)) throw InvalidArgument("association radius must be positive");
    std::sort(anchors.begin(), anchors.end(), [](const Anchor& a, const Anchor& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        if (!anchors[i].position.allFinite()) throw InvalidArgument("anchor " + std::to_string(anchors[i].id) + " is not finite");
        if (i > 0 && anchors[i].id == anchors[i - 1].id)
            throw InvalidArgument("duplicate anchor id " + std::to_string(anchors[i].id));
        for (std::size_t j = 0; j < i; ++j) {
            double sep = (anchors[i].position - anchors[j].position).norm();
            if (sep < cfg_.association_radius)
                throw InvalidArgument("anchors " + std::to_string(anchors[j].id) + " and " +
                                      std::to_string(anchors[i].id) + " are " + std::to_string(sep) +
                                      " m apart, below the association radius");
        }
    }
    Matrix4d p0 = cfg_.initial_sigma.cwiseProduct(cfg_.initial_sigma).asDiagonal();
    for (const Anchor& a : anchors) {
        GateFilter f;
        f.id = a.id;
        f.state << a.position, 0.0;
        f.covariance = p0;
        f.prior_anchor = a.position;
        gates_.push_back(f);
    }
}

const GateFilter& GateMap::gate(int id) const {
    auto it = std::lower_bound(gates_.begin(), gates_.end(), id, [](const GateFilter& g, int v) { return g.id < v; });
    if (it == gates_.end() || it->id != id) throw InvalidArgument("unknown gate id " + std::to_string(id));
    return *it;
}

GateFilter& GateMap::gate(int id) { return const_cast<GateFilter&>(std::as_const(*this).gate(id)); }

std::optional<int> associate_measurement(const GateMap& map, const camera::Pose& measured) {
    std::optional<int> best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const GateFilter& g : map.gates()) {
        double dist = (g.prior_anchor - measured.position).norm();
        if (dist < best_dist || (dist == best_dist && best && g.id < *best)) {
            best = g.id;
            best_dist = dist;
        }
    }
    if (!best || best_dist > map.config().association_radius) return std::nullopt;
    return best;
}

Matrix4d measurement_noise(double distance, const MapConfig& cfg) {
    double s = cfg.position_noise_per_m * std::max(distance, 0.0);
    Vector4d diag(s * s, s * s, s * s, cfg.yaw_noise * cfg.yaw_noise);
    return diag.asDiagonal();
}

GateFilter ekf_update(const GateFilter& filter, const camera::Pose& measured, const Matrix4d& meas_noise,
                      double process_noise) {
    if (!filter.covariance.allFinite() || Eigen::LLT<Matrix4d>(filter.covariance).info() != Eigen::Success)
        throw NumericError("gate " + std::to_string(filter.id) + ": prior covariance is not positive-definite");
    if (!meas_noise.allFinite()) throw NumericError("measurement noise is not finite");

    GateFilter out = filter;
    Matrix4d p = filter.covariance + process_noise * Matrix4d::Identity();
    const Matrix4d h = measurement_jacobian(filter.state);

    Vector4d z;
    z << measured.position, measured.yaw;
    Vector4d y = z - h * filter.state;
    y[3] = normalize_angle(y[3]);

    Matrix4d s = h * p * h.transpose() + meas_noise;
    Eigen::LLT<Matrix4d> llt(s);
    if (llt.info() != Eigen::Success) throw NumericError("innovation covariance is not positive-definite");
    // K = P H^T S^-1, solved as S K^T = H P
    Matrix4d k = llt.solve(h * p).transpose();

    out.state = filter.state + k * y;
    out.state[3] = normalize_angle(out.state[3]);
    Matrix4d ikh = Matrix4d::Identity() - k * h;
    Matrix4d post = ikh * p * ikh.transpose() + k * meas_noise * k.transpose();
    out.covariance = 0.5 * (post + post.transpose());
    out.update_count = filter.update_count + 1;
    out.last_measurement = measured;
    return out;
}

std::vector<MapEvent> map_update(GateMap& map, const camera::CameraModel& cam, const camera::Pose& drone_pose,
                                 const std::vector<GateObservation>& observations,
                                 const camera::FrameTransform& mount) {
    std::vector<MapEvent> events;
    events.reserve(observations.size());
    for (const GateObservation& obs : observations) {
        MapEvent ev;
        ev.observation = obs;
        ev.measured = camera::back_project_gate(cam, obs, drone_pose, mount);
        double nearest = std::numeric_limits<double>::infinity();
        for (const GateFilter& g : map.gates())
            nearest = std::min(nearest, (g.prior_anchor - ev.measured.position).norm());
        ev.anchor_distance = nearest;
        if (auto id = associate_measurement(map, ev.measured)) {
            GateFilter& f = map.gate(*id);
            f = ekf_update(f, ev.measured, measurement_noise(obs.distance, map.config()), map.config().process_noise);
            ev.kind = MapEvent::Kind::Fused;
            ev.gate_id = *id;
        } else {
            ev.kind = MapEvent::Kind::Rejected;
        }
        events.push_back(ev);
    }
    return events;
}

namespace {

json pose_json(const camera::Pose& p) {
    return {{"x", p.position.x()}, {"y", p.position.y()}, {"z", p.position.z()}, {"yaw", p.yaw}};
}

}  // namespace

std::vector<Anchor> load_anchors(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path, 1, e.what());
    }
    if (!j.is_array()) throw ParseError(path, 1, "expected a JSON list of {id, x, y, z}");
    std::vector<Anchor> anchors;
    for (std::size_t i = 0; i < j.size(); ++i) {
        try {
            const json& a = j[i];
            anchors.push_back({a.at("id").get<int>(),
                               {a.at("x").get<double>(), a.at("y").get<double>(), a.at("z").get<double>()}});
        } catch (const json::exception& e) {
            throw ParseError(path, 1, "anchor " + std::to_string(i) + ": " + e.what());
        }
    }
    return anchors;
}

void save_anchors(const std::string& path, const std::vector<Anchor>& anchors) {
    json j = json::array();
    for (const Anchor& a : anchors)
        j.push_back({{"id", a.id}, {"x", a.position.x()}, {"y", a.position.y()}, {"z", a.position.z()}});
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << j.dump(2) << '\n';
}

std::string map_to_json(const GateMap& map, const std::vector<MapEvent>& events, int indent) {
    json gates = json::array();
    for (const GateFilter& g : map.gates()) {
        json cov = json::array();
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) cov.push_back(g.covariance(r, c));
        gates.push_back({{"id", g.id},
                         {"anchor", {{"x", g.prior_anchor.x()}, {"y", g.prior_anchor.y()}, {"z", g.prior_anchor.z()}}},
                         {"estimate", pose_json(g.pose())},
                         {"covariance", cov},
                         {"update_count", g.update_count},
                         {"last_measurement", g.last_measurement ? pose_json(*g.last_measurement) : json(nullptr)}});
    }
    long fused = std::count_if(events.begin(), events.end(),
                               [](const MapEvent& e) { return e.kind == MapEvent::Kind::Fused; });
    json rejected = json::array();
    for (const MapEvent& e : events)
        if (e.kind == MapEvent::Kind::Rejected)
            rejected.push_back({{"measured", pose_json(e.measured)}, {"anchor_distance", e.anchor_distance}});
    json root = {{"gates", gates},
                 {"events", {{"fused", fused}, {"rejected", static_cast<long>(events.size()) - fused}}},
                 {"rejected", rejected}};
    return root.dump(indent);
}

void save_map(const std::string& path, const GateMap& map, const std::vector<MapEvent>& events) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << map_to_json(map, events) << '\n';
    if (!out) throw IoError(path, "write failed");
}

}  // namespace gateseed::mapping
