#include "rotorsim/core/dynamics.hpp"

#include "rotorsim/core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rotorsim {

Wrench aggregate_wrench(std::span<const RotorContribution> per_rotor) {
    if (per_rotor.size() != static_cast<std::size_t>(kNumRotors))
        throw InvalidInput("aggregate_wrench: expected exactly 4 rotor contributions");
    Wrench total;
    for (const auto& c : per_rotor) {
        if (!c.wrench.all_finite() || !c.position.allFinite())
            throw InvalidInput("aggregate_wrench: non-finite rotor wrench or position");
        total.f += c.wrench.f;
        total.tau += c.wrench.tau + c.position.cross(c.wrench.f);
    }
    return total;
}

StateDerivative rigid_body_derivative(const QuadrotorState& state, const Wrench& total,
                                      const VehicleParams& params) {
    if (!state.all_finite() || !total.all_finite())
        throw InvalidInput("rigid_body_derivative: non-finite input");
    if (std::abs(state.q_WB.norm() - 1.0) > 1e-6)
        throw InvalidInput("rigid_body_derivative: attitude quaternion not normalised");

    StateDerivative d;
    d.p_dot = state.v_WB;

    const Quat omega_half(0.0, 0.5 * state.omega_B.x(), 0.5 * state.omega_B.y(),
                          0.5 * state.omega_B.z());
    const Quat qd = state.q_WB * omega_half;
    d.q_dot << qd.w(), qd.x(), qd.y(), qd.z();

    d.v_dot = state.q_WB * total.f / params.mass + params.gravity;

    const Vec3& w = state.omega_B;
    const Vec3 Jw = params.inertia.cwiseProduct(w);
    d.omega_dot = (total.tau - w.cross(Jw)).cwiseQuotient(params.inertia);
    return d;
}

RotorSpeeds motor_step(const RotorSpeeds& omega, const RotorSpeeds& omega_cmd, double dt,
                       double tau) {
    if (!(dt > 0.0) || !(tau > 0.0))
        throw InvalidInput("motor_step: dt and tau must be positive");
    const double decay = std::exp(-dt / tau);
    RotorSpeeds out;
    for (int i = 0; i < kNumRotors; ++i) {
        const double next = omega_cmd[i] + (omega[i] - omega_cmd[i]) * decay;
        out[i] = std::max(0.0, next);
    }
    return out;
}

Quat quat_exp(const Vec3& phi) {
    const double angle = phi.norm();
    if (angle < 1e-12) {
        Quat q(1.0, 0.5 * phi.x(), 0.5 * phi.y(), 0.5 * phi.z());
        return q.normalized();
    }
    const double s = std::sin(0.5 * angle) / angle;
    return Quat(std::cos(0.5 * angle), s * phi.x(), s * phi.y(), s * phi.z());
}

Vec3 quat_log(const Quat& q_in) {
    Quat q = q_in;
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    const Vec3 v = q.vec();
    const double s = v.norm();
    if (s < 1e-12) return 2.0 * v;
    const double angle = 2.0 * std::atan2(s, q.w());
    return angle / s * v;
}

StepResult symplectic_euler_step(const QuadrotorState& state, const RotorSpeeds& rotor_speeds,
                                 const RotorSpeeds& omega_cmd, const WrenchFn& wrench_fn,
                                 const VehicleParams& params, double dt,
                                 AttitudeUpdate attitude_update) {
    if (!(dt > 0.0)) throw InvalidInput("symplectic_euler_step: dt must be positive");

    StepResult out;
    out.rotor_speeds = motor_step(rotor_speeds, omega_cmd, dt, params.tau_motor);
    out.wrench = wrench_fn(state, out.rotor_speeds);
    const StateDerivative d = rigid_body_derivative(state, out.wrench, params);

    QuadrotorState& next = out.state;
    next.v_WB = state.v_WB + d.v_dot * dt;
    next.omega_B = state.omega_B + d.omega_dot * dt;
    next.p_WB = state.p_WB + next.v_WB * dt;

    switch (attitude_update) {
    case AttitudeUpdate::ExponentialMap:
        next.q_WB = state.q_WB * quat_exp(next.omega_B * dt);
        break;
    case AttitudeUpdate::RawDerivative: {
        const Quat half(0.0, 0.5 * next.omega_B.x(), 0.5 * next.omega_B.y(),
                        0.5 * next.omega_B.z());
        const Quat qd = state.q_WB * half;
        next.q_WB.coeffs() = state.q_WB.coeffs() + qd.coeffs() * dt;
        break;
    }
    }
    next.q_WB.normalize();
    return out;
}

} // namespace rotorsim
