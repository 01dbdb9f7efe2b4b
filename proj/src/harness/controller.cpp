#include "rotorsim/harness/controller.hpp"

#include "rotorsim/core/dynamics.hpp"
#include "rotorsim/core/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace rotorsim {

namespace {

Vec3 read_vec3(const nlohmann::json& v, const std::string& key) {
    if (v.is_number()) {
        const double x = v.get<double>();
        return {x, x, x};
    }
    if (!v.is_array() || v.size() != 3) throw InvalidInput("controller: '" + key + "' must be a number or [x, y, z]");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

} // namespace

ControllerGains ControllerGains::zero() {
    ControllerGains g;
    g.kp_pos = g.kd_vel = g.kp_att = g.kp_rate = Vec3::Zero();
    return g;
}

ControllerGains parse_controller_gains(const nlohmann::json& j) {
    ControllerGains g;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "kp_pos") g.kp_pos = read_vec3(v, key);
            else if (key == "kd_vel") g.kd_vel = read_vec3(v, key);
            else if (key == "kp_att") g.kp_att = read_vec3(v, key);
            else if (key == "kp_rate") g.kp_rate = read_vec3(v, key);
            else if (key == "max_tilt_rad") g.max_tilt = v.get<double>();
            else if (key == "omega_max_rad_s") g.omega_max = v.get<double>();
            else throw InvalidInput("controller: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("controller: ") + e.what());
    }
    return g;
}

nlohmann::json to_json(const ControllerGains& g) {
    auto v = [](const Vec3& x) { return nlohmann::json::array({x.x(), x.y(), x.z()}); };
    return {{"kp_pos", v(g.kp_pos)},         {"kd_vel", v(g.kd_vel)},
            {"kp_att", v(g.kp_att)},         {"kp_rate", v(g.kp_rate)},
            {"max_tilt_rad", g.max_tilt},    {"omega_max_rad_s", g.omega_max}};
}

TrackingController::TrackingController(ControllerGains gains, VehicleParams params,
                                       QuadraticCoeffs coeffs)
    : gains_(gains), params_(std::move(params)), coeffs_(coeffs) {
    params_.validate();
    if (!(coeffs_.c_lq > 0.0) || !(coeffs_.c_dq > 0.0))
        throw InvalidInput("controller: quadratic coefficients must be positive");
    // Rows: collective thrust, roll, pitch and yaw torque per unit squared speed.
    Eigen::Matrix4d mix;
    for (int i = 0; i < kNumRotors; ++i) {
        const Vec3& r = params_.rotor_positions[i];
        mix(0, i) = coeffs_.c_lq;
        mix(1, i) = r.y() * coeffs_.c_lq;
        mix(2, i) = -r.x() * coeffs_.c_lq;
        mix(3, i) = params_.rotor_spin[i] * coeffs_.c_dq;
    }
    const Eigen::FullPivLU<Eigen::Matrix4d> lu(mix);
    if (!lu.isInvertible()) throw InvalidInput("controller: rotor layout cannot be allocated");
    mix_inv_ = lu.inverse();
}

double TrackingController::hover_speed() const {
    return std::sqrt(params_.mass * params_.gravity.norm() / (kNumRotors * coeffs_.c_lq));
}

RotorSpeeds TrackingController::allocate(double thrust, const Vec3& torque) const {
    const Eigen::Vector4d w2 = mix_inv_ * Eigen::Vector4d(thrust, torque.x(), torque.y(), torque.z());
    RotorSpeeds out;
    const double max2 = gains_.omega_max * gains_.omega_max;
    for (int i = 0; i < kNumRotors; ++i) out[i] = std::sqrt(std::clamp(w2[i], 0.0, max2));
    return out;
}

RotorSpeeds TrackingController::command(const QuadrotorState& s, const ReferencePoint& ref) const {
    const double m = params_.mass;
    Vec3 a_des = ref.a + gains_.kp_pos.cwiseProduct(ref.p - s.p_WB) +
                 gains_.kd_vel.cwiseProduct(ref.v - s.v_WB);
    Vec3 f_des = m * (a_des - params_.gravity);

    // Limit tilt while keeping the vertical component.
    const double fz = std::max(f_des.z(), 0.1 * m * params_.gravity.norm());
    const double fxy = std::hypot(f_des.x(), f_des.y());
    const double fxy_max = fz * std::tan(gains_.max_tilt);
    if (fxy > fxy_max) {
        f_des.x() *= fxy_max / fxy;
        f_des.y() *= fxy_max / fxy;
    }
    f_des.z() = fz;

    const Mat3 R = s.q_WB.toRotationMatrix();
    const double thrust = std::max(0.0, f_des.dot(R.col(2)));

    const Vec3 z_d = f_des.normalized();
    const Vec3 x_c(std::cos(ref.yaw), std::sin(ref.yaw), 0.0);
    Vec3 y_d = z_d.cross(x_c);
    if (y_d.norm() < 1e-6) y_d = z_d.cross(Vec3::UnitX());
    y_d.normalize();
    Mat3 R_d;
    R_d.col(0) = y_d.cross(z_d);
    R_d.col(1) = y_d;
    R_d.col(2) = z_d;
    Quat q_d(R_d);
    q_d.normalize();

    Quat q_err = s.q_WB.conjugate() * q_d;
    if (q_err.w() < 0.0) q_err.coeffs() *= -1.0;
    const Vec3 e_att = quat_log(q_err);
    const Vec3 rate_des = gains_.kp_att.cwiseProduct(e_att);

    const Vec3 J = params_.inertia;
    const Vec3 w = s.omega_B;
    const Vec3 torque =
        J.cwiseProduct(gains_.kp_rate.cwiseProduct(rate_des - w)) + w.cross(J.cwiseProduct(w));
    return allocate(thrust, torque);
}

} // namespace rotorsim
