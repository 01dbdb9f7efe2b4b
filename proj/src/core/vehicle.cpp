#include "rotorsim/core/vehicle.hpp"

#include "rotorsim/core/errors.hpp"

#include <fstream>
#include <numbers>

namespace rotorsim {

std::array<Vec3, kNumRotors> x_configuration(double arm_length) {
    const double a = arm_length / std::numbers::sqrt2;
    return {Vec3(a, -a, 0.0), Vec3(-a, a, 0.0), Vec3(a, a, 0.0), Vec3(-a, -a, 0.0)};
}

VehicleParams VehicleParams::defaults(double arm_length) {
    VehicleParams p;
    p.rotor_positions = x_configuration(arm_length);
    return p;
}

void VehicleParams::validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidInput("vehicle mass must be > 0");
    if (!(inertia.array() > 0.0).all() || !inertia.allFinite())
        throw InvalidInput("inertia diagonal entries must be > 0");
    if (!gravity.allFinite()) throw InvalidInput("gravity must be finite");
    if (!(tau_motor > 0.0)) throw InvalidInput("motor time constant must be > 0");
    if (!(rho > 0.0)) throw InvalidInput("air density must be > 0");
    int spin_sum = 0;
    for (int i = 0; i < kNumRotors; ++i) {
        if (!rotor_positions[i].allFinite()) throw InvalidInput("rotor position must be finite");
        if (rotor_spin[i] != 1 && rotor_spin[i] != -1)
            throw InvalidInput("rotor spin must be +1 or -1");
        spin_sum += rotor_spin[i];
    }
    if (spin_sum != 0) throw InvalidInput("rotor spin signs must sum to zero");
}

namespace {

Vec3 vec3_from(const nlohmann::json& j, const char* key) {
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 3) throw InvalidInput(std::string(key) + ": expected 3 numbers");
    return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

} // namespace

VehicleParams parse_vehicle_params(const nlohmann::json& j) {
    try {
        VehicleParams p = VehicleParams::defaults(j.value("arm_length_m", 0.125));
        p.mass = j.value("mass_kg", p.mass);
        if (j.contains("inertia_kg_m2")) p.inertia = vec3_from(j, "inertia_kg_m2");
        if (j.contains("gravity_m_s2")) p.gravity = vec3_from(j, "gravity_m_s2");
        if (j.contains("rotor_positions_m")) {
            const auto& rp = j.at("rotor_positions_m");
            if (!rp.is_array() || rp.size() != kNumRotors)
                throw InvalidInput("rotor_positions_m: expected 4 entries");
            for (int i = 0; i < kNumRotors; ++i)
                p.rotor_positions[i] = {rp[i][0].get<double>(), rp[i][1].get<double>(),
                                        rp[i][2].get<double>()};
        }
        if (j.contains("rotor_spin")) {
            const auto& rs = j.at("rotor_spin");
            if (!rs.is_array() || rs.size() != kNumRotors)
                throw InvalidInput("rotor_spin: expected 4 entries");
            for (int i = 0; i < kNumRotors; ++i) p.rotor_spin[i] = rs[i].get<int>();
        }
        p.tau_motor = j.value("motor_time_constant_s", p.tau_motor);
        p.rho = j.value("air_density_kg_m3", p.rho);
        p.validate();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("vehicle config: ") + e.what());
    }
}

VehicleParams load_vehicle_params(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open vehicle config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("vehicle config " + path.string() + ": " + e.what());
    }
    return parse_vehicle_params(j);
}

nlohmann::json to_json(const VehicleParams& p) {
    nlohmann::json j;
    j["mass_kg"] = p.mass;
    j["inertia_kg_m2"] = {p.inertia.x(), p.inertia.y(), p.inertia.z()};
    j["gravity_m_s2"] = {p.gravity.x(), p.gravity.y(), p.gravity.z()};
    auto& rp = j["rotor_positions_m"] = nlohmann::json::array();
    for (const auto& r : p.rotor_positions) rp.push_back({r.x(), r.y(), r.z()});
    j["rotor_spin"] = p.rotor_spin;
    j["motor_time_constant_s"] = p.tau_motor;
    j["air_density_kg_m3"] = p.rho;
    return j;
}

} // namespace rotorsim
