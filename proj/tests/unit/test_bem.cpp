#include "rotorsim/core/errors.hpp"
#include "rotorsim/rotor/bem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace rotorsim;

namespace {

const PropellerGeometry& geometry() {
    static const PropellerGeometry g = PropellerGeometry::default_5in_3blade();
    return g;
}

const BemRotorModel& model() {
    static const BemRotorModel m(geometry());
    return m;
}

RotorOperatingPoint point(double omega, double v_hor = 0.0, double v_ver = 0.0) {
    RotorOperatingPoint op;
    op.omega = omega;
    op.v_hor = v_hor;
    op.v_ver = v_ver;
    return op;
}

// Axisymmetric thrust as a plain radial integral (composite Simpson per chord
// panel), written out from the sectional lift and drag.
double radial_thrust(const PropellerGeometry& g, double omega, double v_ver, double v_i, double rho) {
    std::vector<double> edges{g.hinge_offset};
    for (const auto& c : g.chord)
        if (c.r > g.hinge_offset && c.r < g.radius) edges.push_back(c.r);
    edges.push_back(g.radius);
    auto integrand = [&](double r) {
        const double ut = omega * r;
        const double up = v_ver - v_i;
        const double phi = std::atan2(up, ut);
        const double alpha = g.theta0 + r / g.radius * g.theta1 + phi;
        const double u2 = ut * ut + up * up;
        const double cl = g.c_l0 * std::sin(alpha) * std::cos(alpha);
        const double cd = g.c_d0 * std::sin(alpha) * std::sin(alpha);
        return g.chord_at(r) * u2 * (cl * std::cos(phi) + cd * std::sin(phi));
    };
    double total = 0.0;
    const int n = 2000;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const double a = edges[k], h = (edges[k + 1] - a) / n;
        double s = integrand(a) + integrand(edges[k + 1]);
        for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * integrand(a + i * h);
        total += s * h / 3.0;
    }
    // b rho / (4 pi) times the azimuth integral 2 pi.
    return g.blades * rho / (4.0 * std::numbers::pi) * 2.0 * std::numbers::pi * total;
}

} // namespace

TEST(Momentum, ZeroInducedVelocityGivesZeroThrust) {
    EXPECT_EQ(momentum_thrust(0.0, point(1000.0, 3.0, -2.0), 0.0127), 0.0);
}

TEST(Momentum, HoverExample) {
    const double A = std::numbers::pi * 0.0635 * 0.0635;
    EXPECT_NEAR(A, 0.012668, 1e-6);
    const double T = momentum_thrust(5.0, point(1000.0), A);
    EXPECT_NEAR(T, 2.0 * 1.204 * A * 25.0, 1e-12);
    EXPECT_NEAR(T, 0.7626, 1e-4);
}

TEST(Momentum, StreamTubeVanishes) {
    EXPECT_EQ(momentum_thrust(3.0, point(1000.0, 0.0, 3.0), 0.0127), 0.0);
}

TEST(Inflow, HoverHasNoInflow) {
    const VehicleParams vp = VehicleParams::defaults();
    for (int i = 0; i < 4; ++i) {
        const RotorInflow in = propeller_frame_inflow(QuadrotorState{}, i, vp);
        EXPECT_EQ(in.op.v_hor, 0.0);
        EXPECT_EQ(in.op.v_ver, 0.0);
    }
}

TEST(Inflow, ClimbIsNegativeVertical) {
    const VehicleParams vp = VehicleParams::defaults();
    QuadrotorState s;
    s.v_WB = Vec3(0, 0, 2.5);
    const RotorInflow in = propeller_frame_inflow(s, 0, vp);
    EXPECT_EQ(in.op.v_hor, 0.0);
    EXPECT_DOUBLE_EQ(in.op.v_ver, -2.5);
}

TEST(Inflow, YawRateGivesTangentialFlow) {
    VehicleParams vp = VehicleParams::defaults();
    const double l = 0.125, r = 3.0;
    vp.rotor_positions[0] = Vec3(l, 0, 0);
    QuadrotorState s;
    s.omega_B = Vec3(0, 0, r);
    const RotorInflow in = propeller_frame_inflow(s, 0, vp);
    EXPECT_NEAR(in.op.v_hor, std::abs(r * l), 1e-15);
    EXPECT_NEAR(in.op.v_ver, 0.0, 1e-15);
}

TEST(Inflow, FrameIsRightHandedWithZDown) {
    const VehicleParams vp = VehicleParams::defaults();
    QuadrotorState s;
    s.v_WB = Vec3(1.0, -2.0, 0.5);
    s.q_WB = Quat(Eigen::AngleAxisd(0.4, Vec3(1, 1, 0).normalized()));
    const RotorInflow in = propeller_frame_inflow(s, 2, vp);
    EXPECT_NEAR((in.R_BP.transpose() * in.R_BP - Mat3::Identity()).norm(), 0.0, 1e-14);
    EXPECT_NEAR(in.R_BP.determinant(), 1.0, 1e-14);
    EXPECT_NEAR(in.R_BP.col(2).z(), -1.0, 0.0);
    // Hub velocity in P has no y component and a non-negative x component.
    const Vec3 v_hub = s.q_WB.conjugate() * s.v_WB + s.omega_B.cross(vp.rotor_positions[2]);
    const Vec3 v_P = in.R_BP.transpose() * v_hub;
    EXPECT_NEAR(v_P.x(), in.op.v_hor, 1e-14);
    EXPECT_NEAR(v_P.y(), 0.0, 1e-14);
    EXPECT_NEAR(v_P.z(), in.op.v_ver, 1e-14);
}

TEST(BladeElement, ZeroSpeedAndInflowGivesNothing) {
    const auto r = model().blade_element_integrals(0.0, {}, point(0.0));
    EXPECT_EQ(r.T, 0.0);
    EXPECT_EQ(r.H, 0.0);
    EXPECT_EQ(r.Q, 0.0);
}

TEST(BladeElement, AxisymmetricMatchesRadialIntegral) {
    const BemRotorModel dense(geometry(), {128, 32});
    for (auto [omega, v_ver, v_i] : {std::tuple{1440.0, 0.0, 5.0}, {2200.0, -3.0, 6.5}, {900.0, 2.0, 1.0}}) {
        const auto r = model().blade_element_integrals(v_i, {}, point(omega, 0.0, v_ver));
        EXPECT_EQ(r.H, 0.0);
        const double oracle = radial_thrust(geometry(), omega, v_ver, v_i, 1.204);
        EXPECT_NEAR(r.T / oracle, 1.0, 1e-5) << "omega " << omega;
        const auto d = dense.blade_element_integrals(v_i, {}, point(omega, 0.0, v_ver));
        EXPECT_NEAR(d.T / oracle, 1.0, 1e-10) << "omega " << omega;
    }
}

TEST(BladeElement, StaticThrustIsQuadraticInSpeed) {
    std::vector<double> w, t;
    for (double omega = 500.0; omega <= 3000.0; omega += 125.0) {
        w.push_back(omega);
        t.push_back(model().propeller_wrench(point(omega), +1).integrals.T);
    }
    // Least squares T = c w^2 and its R^2.
    double s44 = 0.0, s2t = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        s44 += std::pow(w[i], 4);
        s2t += w[i] * w[i] * t[i];
        mean += t[i];
    }
    mean /= static_cast<double>(t.size());
    const double c = s2t / s44;
    double res = 0.0, tot = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        res += std::pow(t[i] - c * w[i] * w[i], 2);
        tot += std::pow(t[i] - mean, 2);
    }
    EXPECT_GE(1.0 - res / tot, 0.999);
}

TEST(BladeElement, ReverseFlowIsFlaggedNotFatal) {
    const auto out = model().propeller_wrench(point(600.0, 15.0, 0.0), +1);
    EXPECT_TRUE(out.integrals.reverse_flow);
    EXPECT_TRUE(out.wrench_P.f.allFinite());
    EXPECT_FALSE(model().propeller_wrench(point(1500.0, 2.0, 0.0), +1).integrals.reverse_flow);
}

TEST(BladeElement, QuadratureConvergesWithResolution) {
    const BemRotorModel fine(geometry(), {48, 96});
    for (auto op : {point(1440.0, 5.0, -1.0), point(2500.0, 12.0, 3.0), point(800.0, 1.0, 8.0)}) {
        const auto a = model().propeller_wrench(op, +1).integrals;
        const auto b = fine.propeller_wrench(op, +1).integrals;
        EXPECT_NEAR(a.T / b.T, 1.0, 1e-3);
        EXPECT_NEAR(a.H / b.H, 1.0, 1e-3);
        EXPECT_NEAR(a.Q / b.Q, 1.0, 1e-3);
    }
}

TEST(InducedVelocity, HoverIsConsistent) {
    const double A = model().disk_area();
    for (double omega : {800.0, 1440.0, 2500.0}) {
        const auto op = point(omega);
        const auto res = model().solve_induced_velocity(op);
        EXPECT_FALSE(res.vortex_ring);
        const double T = model().blade_element_integrals(res.v_i, {}, op).T;
        EXPECT_NEAR(momentum_thrust(res.v_i, op, A), T, std::max(1e-6, 1e-8 * T));
        EXPECT_NEAR(res.v_i, std::sqrt(T / (2.0 * op.rho * A)), 1e-6);
    }
}

TEST(InducedVelocity, VanishesMonotonicallyAsSpeedDrops) {
    double prev = model().solve_induced_velocity(point(400.0)).v_i;
    for (double omega = 300.0; omega >= 1.0; omega *= 0.7) {
        const double v = model().solve_induced_velocity(point(omega)).v_i;
        EXPECT_LT(v, prev) << omega;
        EXPECT_GT(v, 0.0);
        prev = v;
    }
    EXPECT_LT(prev, 0.01);
}

TEST(InducedVelocity, ClimbReducesInducedVelocity) {
    const double hover = model().solve_induced_velocity(point(1500.0)).v_i;
    double prev = hover;
    for (double climb : {2.0, 5.0, 10.0, 15.0}) {
        const double v = model().solve_induced_velocity(point(1500.0, 0.0, -climb)).v_i;
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(InducedVelocity, ResidualAtRootMeetsTolerance) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> om(500.0, 3000.0), vh(0.0, 12.0), vv(-12.0, 12.0);
    for (int i = 0; i < 100; ++i) {
        const auto op = point(om(rng), vh(rng), vv(rng));
        const auto res = model().solve_physical_induced_velocity(op);
        const double T = model().blade_element_integrals(res.v_i, {}, op).T;
        EXPECT_LE(std::abs(momentum_thrust(res.v_i, op, model().disk_area()) - T), std::max(1e-6, 1e-8 * std::abs(T)))
            << describe(op);
    }
}

TEST(InducedVelocity, BracketFailureCarriesOperatingPoint) {
    const BemRotorModel tight(geometry(), {}, {0.05, 60, true});
    try {
        tight.solve_induced_velocity(point(2000.0));
        FAIL() << "expected SolverFailure";
    } catch (const SolverFailure& e) {
        EXPECT_NE(std::string(e.what()).find("omega=2000"), std::string::npos);
    }
}

TEST(InducedVelocity, NonPositiveSpeedRejected) {
    EXPECT_THROW(model().solve_induced_velocity(point(0.0)), InvalidInput);
}

TEST(VortexRing, PolynomialValues) {
    EXPECT_EQ(vortex_ring_polynomial(0.0), 1.0);
    EXPECT_NEAR(vortex_ring_polynomial(1.0), 1.816, 1e-12);
    EXPECT_NEAR(vortex_ring_polynomial(0.5), 1.0 + 0.5625 - 0.343 + 0.21475 - 0.0409375, 1e-12);
}

TEST(VortexRing, StateDetection) {
    EXPECT_FALSE(in_vortex_ring_state(0.0, 5.0));
    EXPECT_TRUE(in_vortex_ring_state(1.0, 5.0));
    EXPECT_TRUE(in_vortex_ring_state(9.9, 5.0));
    EXPECT_FALSE(in_vortex_ring_state(10.0, 5.0));
    EXPECT_FALSE(in_vortex_ring_state(-1.0, 5.0));
    EXPECT_FALSE(in_vortex_ring_state(1.0, -5.0));
}

TEST(VortexRing, EmpiricalVelocityScalesHoverValue) {
    const auto level = point(1500.0);
    const double v_h = model().solve_physical_induced_velocity(level).v_i;
    EXPECT_NEAR(model().vortex_ring_induced_velocity(point(1500.0, 0.0, 0.0)), v_h, 1e-12);
    EXPECT_NEAR(model().vortex_ring_induced_velocity(point(1500.0, 0.0, v_h)), 1.816 * v_h, 1e-9);
    // Past x ~ 2.04 the quartic drops below one and the clamp takes over.
    EXPECT_LT(vortex_ring_polynomial(2.5), 1.0);
    EXPECT_NEAR(model().vortex_ring_induced_velocity(point(1500.0, 0.0, 2.5 * v_h)), v_h, 1e-12);
}

TEST(VortexRing, SolverSwitchesBranchInDescent) {
    const auto res = model().solve_induced_velocity(point(1500.0, 0.5, 2.0));
    EXPECT_TRUE(res.vortex_ring);
    EXPECT_GT(res.v_hover, 0.0);
    EXPECT_NEAR(res.v_i, res.v_hover * vortex_ring_polynomial(2.0 / res.v_hover), 1e-9);
}

TEST(VortexRing, ContinuousAtDescentOnset) {
    for (double omega : {900.0, 1500.0, 2400.0}) {
        const double below = model().solve_induced_velocity(point(omega, 1.0, -1e-6)).v_i;
        const double above = model().solve_induced_velocity(point(omega, 1.0, 1e-6)).v_i;
        EXPECT_NEAR(above / below, 1.0, 1e-5);
    }
}

TEST(Flapping, StillRotorDroopsUnderWeight) {
    const auto f = model().flapping_angles(0.0, point(0.0), +1);
    const auto& g = geometry();
    EXPECT_NEAR(f.a0, -9.81 * g.blade_first_moment() / g.k_beta, 1e-15);
    EXPECT_EQ(f.a1, 0.0);
    EXPECT_EQ(f.b1, 0.0);
}

TEST(Flapping, HoverConesUpWithoutTilt) {
    for (int spin : {+1, -1}) {
        const auto out = model().propeller_wrench(point(1440.0), spin);
        EXPECT_GT(out.flapping.a0, 0.0);
        EXPECT_NEAR(out.flapping.a1, 0.0, 1e-9);
        EXPECT_NEAR(out.flapping.b1, 0.0, 1e-9);
    }
}

TEST(Flapping, ForwardFlightAnglesStaySmall) {
    const double limit = 2.0 * std::numbers::pi / 180.0;
    for (double v : {2.0, 5.0, 8.0}) {
        const auto f = model().propeller_wrench(point(1500.0, v, 0.0), +1).flapping;
        EXPECT_LT(std::abs(f.a0), limit);
        EXPECT_LT(std::abs(f.a1), limit);
        EXPECT_LT(std::abs(f.b1), limit);
        // Disk tilts back, away from the motion.
        EXPECT_GT(f.a1, 0.0);
    }
}

TEST(Flapping, PitchRateDrivesGyroscopicTilt) {
    auto op = point(1500.0);
    op.body_rates_P = Eigen::Vector2d(0.0, 2.0);
    const auto f = model().propeller_wrench(op, +1).flapping;
    EXPECT_GT(std::abs(f.a1) + std::abs(f.b1), 1e-6);
}

TEST(Wrench, ZeroSpeedZeroInflowIsZero) {
    const auto out = model().propeller_wrench(point(0.0), +1);
    EXPECT_EQ(out.wrench_P.f, Vec3::Zero());
    EXPECT_EQ(out.wrench_P.tau, Vec3::Zero());
}

TEST(Wrench, HoverThrustOnlyAlongAxis) {
    const auto out = model().propeller_wrench(point(1440.0), +1);
    EXPECT_NEAR(out.wrench_P.f.x(), 0.0, 1e-9);
    EXPECT_NEAR(out.wrench_P.f.y(), 0.0, 1e-9);
    EXPECT_LT(out.wrench_P.f.z(), 0.0); // z_P points down
    EXPECT_NEAR(out.integrals.H, 0.0, 1e-12);
}

TEST(Wrench, MirroredSpinFlipsLateralTerms) {
    for (auto op : {point(1500.0, 4.0, 0.0), point(2200.0, 9.0, -2.0), point(1000.0, 2.0, 1.0)}) {
        const auto cw = model().propeller_wrench(op, +1).wrench_P;
        const auto ccw = model().propeller_wrench(op, -1).wrench_P;
        EXPECT_NEAR(cw.f.y(), -ccw.f.y(), 1e-9);
        EXPECT_NEAR(cw.tau.x(), -ccw.tau.x(), 1e-9);
        EXPECT_NEAR(cw.tau.z(), -ccw.tau.z(), 1e-12);
        EXPECT_NEAR(cw.f.x(), ccw.f.x(), 1e-9);
        EXPECT_NEAR(cw.f.z(), ccw.f.z(), 1e-9);
        EXPECT_NEAR(cw.tau.y(), ccw.tau.y(), 1e-9);
    }
}

TEST(Wrench, BodyFrameHoverLiftsAndYawsBySpin) {
    const VehicleParams vp = VehicleParams::defaults();
    for (int i = 0; i < 4; ++i) {
        const auto out = model().rotor_wrench(QuadrotorState{}, i, vp, 1440.0);
        EXPECT_NEAR(out.wrench_B.f.z(), 1.8476, 1e-3);
        EXPECT_GT(out.wrench_B.tau.z() * vp.rotor_spin[i], 0.0);
    }
    EXPECT_THROW(model().rotor_wrench(QuadrotorState{}, 0, vp, -1.0), InvalidInput);
}

TEST(Wrench, ForwardFlightDragOpposesMotion) {
    const VehicleParams vp = VehicleParams::defaults();
    QuadrotorState s;
    s.v_WB = Vec3(6.0, 0.0, 0.0);
    double fx = 0.0;
    for (int i = 0; i < 4; ++i) fx += model().rotor_wrench(s, i, vp, 1500.0).wrench_B.f.x();
    EXPECT_LT(fx, 0.0);
}

TEST(Geometry, JsonRoundTripAndValidation) {
    const PropellerGeometry back = parse_propeller_geometry(to_json(geometry()));
    EXPECT_EQ(back.chord.size(), geometry().chord.size());
    EXPECT_DOUBLE_EQ(back.theta1, geometry().theta1);
    EXPECT_DOUBLE_EQ(back.blade_inertia, geometry().blade_inertia);
    PropellerGeometry bad = geometry();
    bad.blades = 5;
    EXPECT_THROW(bad.validate(), InvalidInput);
    bad = geometry();
    bad.hinge_offset = bad.radius;
    EXPECT_THROW(BemRotorModel{bad}, InvalidInput);
}
