#pragma once

#include "rotorsim/core/types.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>

namespace rotorsim {

/// Physical parameters of the airframe. Body frame: x forward, y left, z up.
/// rotor_spin is +1 for a rotor turning clockwise seen from above, -1 otherwise.
struct VehicleParams {
    double mass = 0.752;
    Vec3 inertia = Vec3(2.5e-3, 2.5e-3, 4.3e-3); // diagonal of J
    Vec3 gravity = Vec3(0.0, 0.0, -9.81);
    std::array<Vec3, kNumRotors> rotor_positions{};
    std::array<int, kNumRotors> rotor_spin{+1, +1, -1, -1};
    double tau_motor = 0.033;
    double rho = 1.204;

    /// X-configuration defaults. Rotor order: front-right, rear-left, front-left,
    /// rear-right, so rotors 0/1 and 2/3 form the two diagonals.
    static VehicleParams defaults(double arm_length = 0.125);

    /// Throws InvalidInput when an invariant is violated.
    void validate() const;

    Mat3 inertia_matrix() const { return inertia.asDiagonal(); }
};

std::array<Vec3, kNumRotors> x_configuration(double arm_length);

/// Reads the keys documented in config/README.md. Missing keys keep their defaults.
VehicleParams parse_vehicle_params(const nlohmann::json& j);
VehicleParams load_vehicle_params(const std::filesystem::path& path);
nlohmann::json to_json(const VehicleParams& params);

} // namespace rotorsim
