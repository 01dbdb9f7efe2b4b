#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <vector>

namespace rotorsim {

struct ChordSample {
    double r = 0.0; // radial station [m]
    double c = 0.0; // chord [m]
};

/// Physical description of one propeller as used by the blade-element model.
/// The blade is rigid, attached through a torsional hinge spring at offset e.
struct PropellerGeometry {
    double radius = 0.0;             // R [m]
    int blades = 0;                  // b
    std::vector<ChordSample> chord;  // c(r), linearly interpolated, sorted by r
    double theta0 = 0.0;             // pitch [rad]
    double theta1 = 0.0;             // linear twist, pitch at r is theta0 + (r/R) theta1
    double c_l0 = 0.0;               // c_l = c_l0 sin(a) cos(a)
    double c_d0 = 0.0;               // c_d = c_d0 sin^2(a)
    double k_beta = 0.0;             // hinge spring [N m / rad]
    double hinge_offset = 0.0;       // e [m]
    double blade_mass = 0.0;         // [kg]
    double blade_inertia = 0.0;      // flapping inertia about the hinge [kg m^2]

    double chord_at(double r) const;
    double disk_area() const;
    /// First mass moment about the hinge, assuming uniform mass along the blade.
    double blade_first_moment() const { return blade_mass * 0.5 * (radius - hinge_offset); }

    void validate() const;

    /// Estimated 5-inch three-bladed racing propeller. Not measured data.
    static PropellerGeometry default_5in_3blade();
};

PropellerGeometry parse_propeller_geometry(const nlohmann::json& j);
PropellerGeometry load_propeller_geometry(const std::filesystem::path& path);
nlohmann::json to_json(const PropellerGeometry& g);

} // namespace rotorsim
