#include "rotorsim/harness/trajectory.hpp"

#include "rotorsim/core/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

namespace rotorsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<Vec3> default_race_track() {
    // Stadium-shaped loop with a climb on the far straight.
    return {{-3.0, -1.5, 0.0}, {0.0, -2.0, 0.0}, {3.0, -1.5, 0.3}, {4.5, 0.0, 0.5},
            {3.0, 1.5, 0.3},   {0.0, 2.0, 0.0},  {-3.0, 1.5, -0.3}, {-4.5, 0.0, -0.5}};
}

std::vector<Vec3> random_waypoints(const TrajectorySpec& s) {
    std::mt19937 rng(s.seed);
    std::uniform_real_distribution<double> xy(-s.random_box, s.random_box);
    std::uniform_real_distribution<double> z(-0.25 * s.random_box, 0.25 * s.random_box);
    std::vector<Vec3> pts;
    for (int i = 0; i < s.random_points; ++i) {
        const double x = xy(rng);
        const double y = xy(rng);
        pts.emplace_back(x, y, z(rng));
    }
    return pts;
}

Vec3 read_vec3(const nlohmann::json& j, const char* key) {
    if (!j.is_array() || j.size() != 3) throw InvalidInput(std::string("trajectory: '") + key + "' must be [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

} // namespace

double TrajectorySpec::duration() const {
    return laps * kTwoPi / (speed_scale * angular_rate);
}

Trajectory::Trajectory(TrajectorySpec spec) : spec_(std::move(spec)) {
    if (!(spec_.angular_rate > 0.0) || !(spec_.speed_scale > 0.0) || !(spec_.laps > 0.0))
        throw InvalidInput("trajectory: angular_rate, speed_scale and laps must be positive");
    if (spec_.family == TrajectoryFamily::RaceTrack || spec_.family == TrajectoryFamily::RandomPoints) {
        knots_ = spec_.waypoints;
        if (knots_.empty())
            knots_ = spec_.family == TrajectoryFamily::RaceTrack ? default_race_track()
                                                                 : random_waypoints(spec_);
        const int n = static_cast<int>(knots_.size());
        if (n < 3) throw InvalidInput("trajectory: need at least 3 waypoints");
        // Periodic cubic with unit knot spacing: M[i-1] + 4 M[i] + M[i+1] = 6 (y[i+1] - 2 y[i] + y[i-1]).
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        Eigen::MatrixXd rhs(n, 3);
        for (int i = 0; i < n; ++i) {
            const int im = (i + n - 1) % n, ip = (i + 1) % n;
            A(i, im) += 1.0;
            A(i, i) += 4.0;
            A(i, ip) += 1.0;
            rhs.row(i) = 6.0 * (knots_[ip] - 2.0 * knots_[i] + knots_[im]).transpose();
        }
        const Eigen::MatrixXd M = A.partialPivLu().solve(rhs);
        second_.resize(n);
        for (int i = 0; i < n; ++i) second_[i] = M.row(i).transpose();
    }
}

ReferencePoint Trajectory::at(double t) const {
    const TrajectorySpec& s = spec_;
    const double w = s.speed_scale * s.angular_rate;
    const double th = w * t;
    const double c = std::cos(th), sn = std::sin(th);
    ReferencePoint r;
    r.yaw = s.yaw;
    Vec3 p, dp, ddp; // derivatives with respect to theta
    switch (s.family) {
    case TrajectoryFamily::Hover:
        p = dp = ddp = Vec3::Zero();
        break;
    case TrajectoryFamily::Lemniscate: {
        // Lemniscate of Gerono, passing the origin at theta = 0.
        const double s2 = std::sin(2.0 * th), c2 = std::cos(2.0 * th);
        p = {s.size_x * sn, 0.5 * s.size_y * s2, 0.0};
        dp = {s.size_x * c, s.size_y * c2, 0.0};
        ddp = {-s.size_x * sn, -2.0 * s.size_y * s2, 0.0};
        break;
    }
    case TrajectoryFamily::Ellipse:
        p = {s.size_x * c, s.size_y * sn, 0.0};
        dp = {-s.size_x * sn, s.size_y * c, 0.0};
        ddp = {-s.size_x * c, -s.size_y * sn, 0.0};
        break;
    case TrajectoryFamily::SlantedCircle: {
        const double ct = std::cos(s.tilt), st = std::sin(s.tilt);
        const double R = s.size_x;
        p = {R * c, R * sn * ct, R * sn * st};
        dp = {-R * sn, R * c * ct, R * c * st};
        ddp = {-R * c, -R * sn * ct, -R * sn * st};
        break;
    }
    case TrajectoryFamily::LinearOscillation: {
        const Vec3 d = s.direction.normalized();
        p = s.amplitude * sn * d;
        dp = s.amplitude * c * d;
        ddp = -s.amplitude * sn * d;
        break;
    }
    case TrajectoryFamily::RaceTrack:
    case TrajectoryFamily::RandomPoints: {
        const int n = static_cast<int>(knots_.size());
        const double du = n / kTwoPi;
        double u = th * du;
        u -= n * std::floor(u / n);
        const int i = std::min(static_cast<int>(std::floor(u)), n - 1);
        const int j = (i + 1) % n;
        const double b = u - i, a = 1.0 - b;
        const Vec3 val = a * knots_[i] + b * knots_[j] +
                         ((a * a * a - a) * second_[i] + (b * b * b - b) * second_[j]) / 6.0;
        const Vec3 d1 = knots_[j] - knots_[i] - (3.0 * a * a - 1.0) / 6.0 * second_[i] +
                        (3.0 * b * b - 1.0) / 6.0 * second_[j];
        const Vec3 d2 = a * second_[i] + b * second_[j];
        p = val;
        dp = d1 * du;
        ddp = d2 * du * du;
        break;
    }
    }
    r.p = s.center + p;
    r.v = w * dp;
    r.a = w * w * ddp;
    return r;
}

ReferencePoint generate_reference(const TrajectorySpec& spec, double t) {
    const Trajectory traj(spec);
    if (!(t >= 0.0) || t > traj.duration() * (1.0 + 1e-12))
        throw InvalidInput("generate_reference: t outside [0, duration]");
    return traj.at(t);
}

const std::vector<TrajectoryFamily>& all_trajectory_families() {
    static const std::vector<TrajectoryFamily> f = {
        TrajectoryFamily::Hover,         TrajectoryFamily::Lemniscate,
        TrajectoryFamily::Ellipse,       TrajectoryFamily::SlantedCircle,
        TrajectoryFamily::LinearOscillation, TrajectoryFamily::RaceTrack,
        TrajectoryFamily::RandomPoints};
    return f;
}

std::string to_string(TrajectoryFamily f) {
    switch (f) {
    case TrajectoryFamily::Hover: return "hover";
    case TrajectoryFamily::Lemniscate: return "lemniscate";
    case TrajectoryFamily::Ellipse: return "ellipse";
    case TrajectoryFamily::SlantedCircle: return "slanted-circle";
    case TrajectoryFamily::LinearOscillation: return "linear-oscillation";
    case TrajectoryFamily::RaceTrack: return "race-track";
    case TrajectoryFamily::RandomPoints: return "random-points";
    }
    return "?";
}

TrajectoryFamily parse_trajectory_family(const std::string& name) {
    for (auto f : all_trajectory_families())
        if (to_string(f) == name) return f;
    throw InvalidInput("unknown trajectory family '" + name + "'");
}

TrajectorySpec parse_trajectory_spec(const nlohmann::json& j) {
    TrajectorySpec s;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "family") s.family = parse_trajectory_family(v.get<std::string>());
            else if (key == "center_m") s.center = read_vec3(v, "center_m");
            else if (key == "size_x_m") s.size_x = v.get<double>();
            else if (key == "size_y_m") s.size_y = v.get<double>();
            else if (key == "tilt_rad") s.tilt = v.get<double>();
            else if (key == "direction") s.direction = read_vec3(v, "direction");
            else if (key == "amplitude_m") s.amplitude = v.get<double>();
            else if (key == "angular_rate_rad_s") s.angular_rate = v.get<double>();
            else if (key == "speed_scale") s.speed_scale = v.get<double>();
            else if (key == "yaw_rad") s.yaw = v.get<double>();
            else if (key == "waypoints_m") {
                s.waypoints.clear();
                for (const auto& w : v) s.waypoints.push_back(read_vec3(w, "waypoints_m"));
            } else if (key == "random_points") s.random_points = v.get<int>();
            else if (key == "random_box_m") s.random_box = v.get<double>();
            else if (key == "seed") s.seed = v.get<unsigned>();
            else if (key == "laps") s.laps = v.get<double>();
            else throw InvalidInput("trajectory: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("trajectory: ") + e.what());
    }
    if (s.direction.norm() == 0.0) throw InvalidInput("trajectory: zero direction");
    return s;
}

nlohmann::json to_json(const TrajectorySpec& s) {
    nlohmann::json j;
    j["family"] = to_string(s.family);
    j["center_m"] = {s.center.x(), s.center.y(), s.center.z()};
    j["size_x_m"] = s.size_x;
    j["size_y_m"] = s.size_y;
    j["tilt_rad"] = s.tilt;
    j["direction"] = {s.direction.x(), s.direction.y(), s.direction.z()};
    j["amplitude_m"] = s.amplitude;
    j["angular_rate_rad_s"] = s.angular_rate;
    j["speed_scale"] = s.speed_scale;
    j["yaw_rad"] = s.yaw;
    j["random_points"] = s.random_points;
    j["random_box_m"] = s.random_box;
    j["seed"] = s.seed;
    j["laps"] = s.laps;
    if (!s.waypoints.empty()) {
        j["waypoints_m"] = nlohmann::json::array();
        for (const auto& w : s.waypoints) j["waypoints_m"].push_back({w.x(), w.y(), w.z()});
    }
    return j;
}

} // namespace rotorsim
