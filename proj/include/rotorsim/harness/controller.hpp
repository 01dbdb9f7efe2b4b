#pragma once

#include "rotorsim/core/types.hpp"
#include "rotorsim/core/vehicle.hpp"
#include "rotorsim/harness/trajectory.hpp"
#include "rotorsim/rotor/quadratic.hpp"

#include <nlohmann/json.hpp>

namespace rotorsim {

/// Cascaded tracking controller gains.
struct ControllerGains {
    Vec3 kp_pos = Vec3(4.0, 4.0, 6.0);   // [1/s^2]
    Vec3 kd_vel = Vec3(3.0, 3.0, 4.0);   // [1/s]
    Vec3 kp_att = Vec3(8.0, 8.0, 4.0);   // [1/s]
    Vec3 kp_rate = Vec3(12.0, 12.0, 6.0); // [1/s]
    double max_tilt = 1.0;               // [rad]
    double omega_max = 3000.0;           // rotor speed limit [rad/s]

    static ControllerGains zero();
};

ControllerGains parse_controller_gains(const nlohmann::json& j);
nlohmann::json to_json(const ControllerGains& g);

/// Position/velocity PD with acceleration feed-forward, collective thrust plus
/// desired attitude, attitude P, body-rate P with gyroscopic compensation, and
/// allocation through the quadratic rotor model.
class TrackingController {
public:
    TrackingController(ControllerGains gains, VehicleParams params, QuadraticCoeffs coeffs);

    RotorSpeeds command(const QuadrotorState& state, const ReferencePoint& ref) const;

    /// Rotor speeds producing collective thrust and body torque under the
    /// quadratic model, clamped to [0, omega_max].
    RotorSpeeds allocate(double thrust, const Vec3& torque) const;

    /// Speed that holds the vehicle in hover under the quadratic model.
    double hover_speed() const;

    const ControllerGains& gains() const { return gains_; }

private:
    ControllerGains gains_;
    VehicleParams params_;
    QuadraticCoeffs coeffs_;
    Eigen::Matrix4d mix_inv_;
};

} // namespace rotorsim
