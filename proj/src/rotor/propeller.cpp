#include "rotorsim/rotor/propeller.hpp"

#include "rotorsim/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace rotorsim {

double PropellerGeometry::chord_at(double r) const {
    if (chord.empty()) return 0.0;
    if (r <= chord.front().r) return chord.front().c;
    if (r >= chord.back().r) return chord.back().c;
    const auto hi = std::upper_bound(chord.begin(), chord.end(), r,
                                     [](double x, const ChordSample& s) { return x < s.r; });
    const auto lo = hi - 1;
    const double t = (r - lo->r) / (hi->r - lo->r);
    return lo->c + t * (hi->c - lo->c);
}

double PropellerGeometry::disk_area() const { return std::numbers::pi * radius * radius; }

void PropellerGeometry::validate() const {
    if (!(radius > 0.0)) throw InvalidInput("propeller: radius must be > 0");
    if (blades != 2 && blades != 3) throw InvalidInput("propeller: blade count must be 2 or 3");
    if (chord.size() < 2) throw InvalidInput("propeller: need at least two chord samples");
    for (std::size_t i = 0; i < chord.size(); ++i) {
        if (!(chord[i].c > 0.0)) throw InvalidInput("propeller: chord must be > 0");
        if (chord[i].r < 0.0 || chord[i].r > radius)
            throw InvalidInput("propeller: chord stations must lie in [0, R]");
        if (i > 0 && !(chord[i].r > chord[i - 1].r))
            throw InvalidInput("propeller: chord stations must be strictly increasing");
    }
    if (!(k_beta > 0.0)) throw InvalidInput("propeller: k_beta must be > 0");
    if (!(hinge_offset >= 0.0 && hinge_offset < radius))
        throw InvalidInput("propeller: hinge offset must satisfy 0 <= e < R");
    if (!(blade_mass >= 0.0) || !(blade_inertia >= 0.0))
        throw InvalidInput("propeller: blade mass and inertia must be >= 0");
    for (double v : {theta0, theta1, c_l0, c_d0})
        if (!std::isfinite(v)) throw InvalidInput("propeller: non-finite aerodynamic parameter");
}

PropellerGeometry PropellerGeometry::default_5in_3blade() {
    PropellerGeometry g;
    g.radius = 0.0635;
    g.blades = 3;
    const double R = g.radius;
    g.chord = {{0.0, 0.010},      {0.15 * R, 0.010}, {0.30 * R, 0.013}, {0.50 * R, 0.0135},
               {0.70 * R, 0.012}, {0.90 * R, 0.009}, {R, 0.006}};
    g.theta0 = 0.42;
    g.theta1 = -0.26;
    g.c_l0 = 5.5;
    g.c_d0 = 2.5;
    g.k_beta = 1.0;
    g.hinge_offset = 0.004;
    g.blade_mass = 0.0012;
    g.blade_inertia = g.blade_mass * std::pow(R - g.hinge_offset, 2) / 3.0;
    return g;
}

PropellerGeometry parse_propeller_geometry(const nlohmann::json& j) {
    try {
        PropellerGeometry g;
        g.radius = j.at("radius_m").get<double>();
        g.blades = j.at("blades").get<int>();
        for (const auto& s : j.at("chord_samples_m"))
            g.chord.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
        g.theta0 = j.at("pitch_rad").get<double>();
        g.theta1 = j.at("twist_rad").get<double>();
        g.c_l0 = j.at("c_l0").get<double>();
        g.c_d0 = j.at("c_d0").get<double>();
        g.k_beta = j.at("k_beta_Nm_per_rad").get<double>();
        g.hinge_offset = j.at("hinge_offset_m").get<double>();
        g.blade_mass = j.at("blade_mass_kg").get<double>();
        if (j.contains("blade_inertia_kg_m2"))
            g.blade_inertia = j.at("blade_inertia_kg_m2").get<double>();
        else
            g.blade_inertia = g.blade_mass * std::pow(g.radius - g.hinge_offset, 2) / 3.0;
        g.validate();
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("propeller geometry: ") + e.what());
    }
}

PropellerGeometry load_propeller_geometry(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open propeller geometry " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("propeller geometry " + path.string() + ": " + e.what());
    }
    return parse_propeller_geometry(j);
}

nlohmann::json to_json(const PropellerGeometry& g) {
    nlohmann::json j;
    j["radius_m"] = g.radius;
    j["blades"] = g.blades;
    auto& cs = j["chord_samples_m"] = nlohmann::json::array();
    for (const auto& s : g.chord) cs.push_back({s.r, s.c});
    j["pitch_rad"] = g.theta0;
    j["twist_rad"] = g.theta1;
    j["c_l0"] = g.c_l0;
    j["c_d0"] = g.c_d0;
    j["k_beta_Nm_per_rad"] = g.k_beta;
    j["hinge_offset_m"] = g.hinge_offset;
    j["blade_mass_kg"] = g.blade_mass;
    j["blade_inertia_kg_m2"] = g.blade_inertia;
    return j;
}

} // namespace rotorsim
