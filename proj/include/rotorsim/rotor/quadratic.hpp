#pragma once

#include "rotorsim/core/types.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace rotorsim {

/// Thrust and drag-torque coefficients of the quadratic rotor model, per (rad/s)^2.
struct QuadraticCoeffs {
    double c_lq = 0.0; // [N s^2 / rad^2]
    double c_dq = 0.0; // [N m s^2 / rad^2]
};

/// Thrust c_lq * W^2 along +z_B and reaction torque spin * c_dq * W^2 about z_B.
/// spin = +1 for a clockwise rotor seen from above.
Wrench quadratic_rotor_wrench(double omega, const QuadraticCoeffs& coeffs, int spin);

struct ThrustSample {
    double omega = 0.0;
    double thrust = 0.0;
    double torque = 0.0;
};

/// Closed-form least squares of thrust and torque against W^2 (no intercept).
/// Throws SingularFit when all samples share the same |W|.
QuadraticCoeffs fit_quadratic(std::span<const ThrustSample> samples);

/// Coefficient of determination of thrust ~ c_lq W^2 over the samples.
double thrust_r_squared(std::span<const ThrustSample> samples, const QuadraticCoeffs& coeffs);

/// Reads a CSV with header omega_rad_s,thrust_N,torque_Nm.
std::vector<ThrustSample> load_thrust_map(const std::filesystem::path& path);
void save_thrust_map(const std::filesystem::path& path, std::span<const ThrustSample> samples);

} // namespace rotorsim
