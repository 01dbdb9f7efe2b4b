#pragma once

#include "rotorsim/core/types.hpp"
#include "rotorsim/core/vehicle.hpp"
#include "rotorsim/rotor/propeller.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace rotorsim {

/// Inflow seen by one rotor, expressed in its propeller frame P. P has z_P
/// pointing down (against the thrust) and x_P along the horizontal motion of the
/// hub, so the incoming horizontal wind blows along -x_P. Azimuth is measured
/// from the tail (-x_P) in the direction of rotation.
struct RotorOperatingPoint {
    double omega = 0.0;   // rotor rate [rad/s]
    double v_hor = 0.0;   // >= 0 [m/s]
    double v_ver = 0.0;   // hub velocity along z_P; positive when descending [m/s]
    Eigen::Vector2d body_rates_P = Eigen::Vector2d::Zero(); // about x_P, y_P [rad/s]
    double rho = 1.204;
};

/// Operating point plus the body<-propeller rotation (columns x_P, y_P, z_P).
struct RotorInflow {
    RotorOperatingPoint op;
    Mat3 R_BP = Mat3::Identity();
};

/// Blade flap angle beta(psi) = a0 - a1 cos(psi) + b1 sin(psi). Positive a1
/// tilts the disk back (away from the direction of motion); positive b1 raises
/// the blade at psi = 90 deg (advancing side).
struct FlappingAngles {
    double a0 = 0.0;
    double a1 = 0.0;
    double b1 = 0.0;
};

struct QuadratureConfig {
    int radial = 16;    // Gauss-Legendre nodes on [e, R]
    int azimuthal = 32; // uniform periodic trapezoid nodes on [0, 2 pi)
};

struct BladeElementResult {
    double T = 0.0;
    double H = 0.0;
    double Q = 0.0;
    // Per-blade aerodynamic flap moment about the hinge projected on {1, cos, sin}.
    double M0 = 0.0;
    double Mc = 0.0;
    double Ms = 0.0;
    bool reverse_flow = false; // U_T <= 0 at some quadrature node
};

struct InducedVelocityResult {
    double v_i = 0.0;
    bool vortex_ring = false;
    double v_hover = 0.0;  // v_i with v_ver forced to zero; only set in vortex-ring state
    double residual = 0.0; // T_mom - T_bem at the physical root
    int evaluations = 0;
};

struct BemRotorOutput {
    Wrench wrench_P; // about the hub, propeller frame
    Wrench wrench_B; // about the hub, body frame
    InducedVelocityResult induced;
    FlappingAngles flapping;
    BladeElementResult integrals; // final pass, with flapping
};

/// Options controlling the induced-velocity solve.
struct InducedSolverConfig {
    double v_max = 50.0;  // bracket expansion limit [m/s]
    int max_iterations = 60;
    bool allow_windmill = true; // search v_i < 0 when the blades produce no thrust at v_i = 0
};

/// T = 2 v_i rho A sqrt(v_hor^2 + (v_ver - v_i)^2).
double momentum_thrust(double v_i, const RotorOperatingPoint& op, double disk_area);

/// Quartic empirical induced velocity ratio used inside the vortex-ring state.
double vortex_ring_polynomial(double x);

/// True when 0 < v_ver / v_i < 2 with v_i > 0.
bool in_vortex_ring_state(double v_ver, double v_i);

/// Air velocity at hub `rotor_index` decomposed in that rotor's propeller frame.
RotorInflow propeller_frame_inflow(const QuadrotorState& state, int rotor_index,
                                   const VehicleParams& params);

/// Blade-element-momentum model for one propeller geometry. Quadrature nodes and
/// per-station blade properties are precomputed; evaluation is const and
/// allocation-free, so one instance can be shared across threads.
class BemRotorModel {
public:
    explicit BemRotorModel(PropellerGeometry geometry, QuadratureConfig quadrature = {},
                           InducedSolverConfig solver = {});

    const PropellerGeometry& geometry() const { return geometry_; }
    const QuadratureConfig& quadrature() const { return quadrature_; }
    double disk_area() const { return disk_area_; }

    BladeElementResult blade_element_integrals(double v_i, const FlappingAngles& flapping,
                                               const RotorOperatingPoint& op) const;

    /// Momentum/blade-element consistent induced velocity with the vortex-ring
    /// substitution. Throws SolverFailure when no bracket is found.
    InducedVelocityResult solve_induced_velocity(const RotorOperatingPoint& op) const;

    /// Induced velocity where momentum and blade-element thrust agree, without the
    /// vortex-ring branch.
    InducedVelocityResult solve_physical_induced_velocity(const RotorOperatingPoint& op) const;

    /// max(v_h * p(v_ver / v_h), v_h), v_h solved with v_ver = 0.
    double vortex_ring_induced_velocity(const RotorOperatingPoint& op) const;

    /// Steady flap angles from the hinge moment balance. spin = +1 clockwise from above.
    FlappingAngles flapping_angles(double v_i, const RotorOperatingPoint& op, int spin) const;

    /// Full five-step evaluation; wrench in the propeller frame.
    BemRotorOutput propeller_wrench(const RotorOperatingPoint& op, int spin) const;

    /// Full evaluation for rotor `rotor_index` of the vehicle, wrench in the body frame.
    BemRotorOutput rotor_wrench(const QuadrotorState& state, int rotor_index,
                                const VehicleParams& params, double omega) const;

private:
    struct Station {
        double r;
        double weight; // Gauss-Legendre weight scaled to [e, R]
        double chord;
        double sin_theta;
        double cos_theta;
    };

    PropellerGeometry geometry_;
    QuadratureConfig quadrature_;
    InducedSolverConfig solver_;
    double disk_area_;
    std::vector<Station> stations_;
    std::vector<double> sin_psi_;
    std::vector<double> cos_psi_;
};

/// Human-readable summary of an operating point for error messages.
std::string describe(const RotorOperatingPoint& op);

} // namespace rotorsim
