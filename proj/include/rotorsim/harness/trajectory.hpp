#pragma once

#include "rotorsim/core/types.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace rotorsim {

enum class TrajectoryFamily {
    Hover,
    Lemniscate,
    Ellipse,
    SlantedCircle,
    LinearOscillation,
    RaceTrack,
    RandomPoints,
};

/// Reference trajectory parameters. All families are closed curves traversed
/// with phase theta = speed_scale * angular_rate * t; geometry defaults are
/// estimates, not measured courses.
struct TrajectorySpec {
    TrajectoryFamily family = TrajectoryFamily::Lemniscate;
    Vec3 center = Vec3(0.0, 0.0, 1.5);
    double size_x = 3.0;         // lemniscate/ellipse semi-axis along x; circle radius [m]
    double size_y = 2.0;         // lemniscate/ellipse y size [m]
    double tilt = 0.5;           // slanted circle plane tilt about x [rad]
    Vec3 direction = Vec3::UnitX(); // linear oscillation axis
    double amplitude = 2.0;      // linear oscillation [m]
    double angular_rate = 0.5;   // [rad/s] at speed_scale 1
    double speed_scale = 1.0;
    double yaw = 0.0;            // constant heading [rad]
    std::vector<Vec3> waypoints; // race track / random points; generated when empty
    int random_points = 8;
    double random_box = 3.0;     // half-width of the random waypoint box [m]
    unsigned seed = 1;
    double laps = 1.0;

    /// Time for `laps` traversals.
    double duration() const;
};

struct ReferencePoint {
    Vec3 p = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Vec3 a = Vec3::Zero();
    double yaw = 0.0;
};

/// Pre-processed reference (waypoint splines built once).
class Trajectory {
public:
    explicit Trajectory(TrajectorySpec spec);

    ReferencePoint at(double t) const;
    const TrajectorySpec& spec() const { return spec_; }
    double duration() const { return spec_.duration(); }

private:
    TrajectorySpec spec_;
    // Periodic cubic through the waypoints in theta: values and second derivatives.
    std::vector<Vec3> knots_;
    std::vector<Vec3> second_;
};

/// One-shot evaluation. Throws InvalidInput for t outside [0, duration].
ReferencePoint generate_reference(const TrajectorySpec& spec, double t);

TrajectoryFamily parse_trajectory_family(const std::string& name);
std::string to_string(TrajectoryFamily family);
const std::vector<TrajectoryFamily>& all_trajectory_families();

/// Unknown keys are rejected; missing keys keep defaults.
TrajectorySpec parse_trajectory_spec(const nlohmann::json& j);
nlohmann::json to_json(const TrajectorySpec& spec);

} // namespace rotorsim
