#pragma once

#include "rotorsim/core/types.hpp"
#include "rotorsim/core/vehicle.hpp"

#include <functional>
#include <span>

namespace rotorsim {

/// A single rotor's wrench (about its own hub) together with the hub location in
/// the body frame.
struct RotorContribution {
    Wrench wrench;
    Vec3 position = Vec3::Zero();
};

/// f = sum f_i, tau = sum (tau_i + r_i x f_i). Requires exactly four entries.
Wrench aggregate_wrench(std::span<const RotorContribution> per_rotor);

/// Continuous-time rigid-body dynamics driven by a total body-frame wrench.
StateDerivative rigid_body_derivative(const QuadrotorState& state, const Wrench& total,
                                      const VehicleParams& params);

/// Exact discretisation of dW/dt = (W_cmd - W) / tau over dt, clamped at zero.
RotorSpeeds motor_step(const RotorSpeeds& omega, const RotorSpeeds& omega_cmd, double dt,
                       double tau);

/// Total wrench as a function of the current state and rotor speeds.
using WrenchFn = std::function<Wrench(const QuadrotorState&, const RotorSpeeds&)>;

enum class AttitudeUpdate {
    ExponentialMap, // q <- q * exp(omega dt / 2)
    RawDerivative,  // q <- q + q_dot dt
};

struct StepResult {
    QuadrotorState state;
    RotorSpeeds rotor_speeds;
    Wrench wrench; // wrench applied during the step
};

/// One semi-implicit Euler step: motors first, wrench at the old state and new
/// rotor speeds, velocities, then positions/attitude from the new velocities.
/// The attitude quaternion is renormalised on every step.
StepResult symplectic_euler_step(const QuadrotorState& state, const RotorSpeeds& rotor_speeds,
                                 const RotorSpeeds& omega_cmd, const WrenchFn& wrench_fn,
                                 const VehicleParams& params, double dt = 1e-3,
                                 AttitudeUpdate attitude_update = AttitudeUpdate::ExponentialMap);

/// Quaternion exponential of a pure rotation vector: exp((0, phi / 2)).
Quat quat_exp(const Vec3& phi);
/// Inverse of quat_exp for unit quaternions; returns the rotation vector.
Vec3 quat_log(const Quat& q);

} // namespace rotorsim
