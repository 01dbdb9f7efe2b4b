#include "rotorsim/rotor/bem.hpp"

#include "rotorsim/core/errors.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <utility>

namespace rotorsim {

namespace {

constexpr double kStandardGravity = 9.81;
constexpr double kFlapStep = 1e-4; // [rad], central differences of the aero moment

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

} // namespace

double momentum_thrust(double v_i, const RotorOperatingPoint& op, double disk_area) {
    const double dv = op.v_ver - v_i;
    return 2.0 * v_i * op.rho * disk_area * std::sqrt(op.v_hor * op.v_hor + dv * dv);
}

double vortex_ring_polynomial(double x) {
    return 1.0 + x * (1.125 + x * (-1.372 + x * (1.718 + x * -0.655)));
}

bool in_vortex_ring_state(double v_ver, double v_i) {
    if (!(v_i > 0.0)) return false;
    const double ratio = v_ver / v_i;
    return ratio > 0.0 && ratio < 2.0;
}

std::string describe(const RotorOperatingPoint& op) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "omega=%.6g rad/s v_hor=%.6g m/s v_ver=%.6g m/s rho=%.6g",
                  op.omega, op.v_hor, op.v_ver, op.rho);
    return buf;
}

RotorInflow propeller_frame_inflow(const QuadrotorState& state, int rotor_index,
                                   const VehicleParams& params) {
    if (rotor_index < 0 || rotor_index >= kNumRotors)
        throw InvalidInput("propeller_frame_inflow: rotor index out of range");
    const Vec3& r = params.rotor_positions[rotor_index];
    const Vec3 v_hub = state.q_WB.conjugate() * state.v_WB + state.omega_B.cross(r);

    RotorInflow out;
    const Vec3 z_P(0.0, 0.0, -1.0);
    const Vec3 v_disk(v_hub.x(), v_hub.y(), 0.0);
    const double v_hor = v_disk.norm();
    const Vec3 x_P = v_hor > 1e-12 ? Vec3(v_disk / v_hor) : Vec3::UnitX();
    const Vec3 y_P = z_P.cross(x_P);
    out.R_BP.col(0) = x_P;
    out.R_BP.col(1) = y_P;
    out.R_BP.col(2) = z_P;

    out.op.v_hor = v_hor;
    out.op.v_ver = v_hub.dot(z_P);
    out.op.body_rates_P = {state.omega_B.dot(x_P), state.omega_B.dot(y_P)};
    out.op.rho = params.rho;
    return out;
}

BemRotorModel::BemRotorModel(PropellerGeometry geometry, QuadratureConfig quadrature,
                             InducedSolverConfig solver)
    : geometry_(std::move(geometry)), quadrature_(quadrature), solver_(solver) {
    geometry_.validate();
    if (quadrature_.radial < 1 || quadrature_.azimuthal < 4)
        throw InvalidInput("BemRotorModel: quadrature resolution too small");
    disk_area_ = geometry_.disk_area();

    // Composite Gauss-Legendre split at the chord breakpoints, so each panel
    // integrates a smooth function. Nodes are shared out by panel length.
    const double e = geometry_.hinge_offset;
    const double R = geometry_.radius;
    std::vector<double> edges{e};
    for (const auto& c : geometry_.chord)
        if (c.r > e + 1e-9 * R && c.r < R - 1e-9 * R) edges.push_back(c.r);
    edges.push_back(R);
    const std::size_t panels = edges.size() - 1;
    std::vector<int> count(panels, 1);
    int used = static_cast<int>(panels);
    {
        std::vector<double> share(panels);
        for (std::size_t k = 0; k < panels; ++k)
            share[k] = quadrature_.radial * (edges[k + 1] - edges[k]) / (R - e);
        while (used < quadrature_.radial) {
            std::size_t best = 0;
            for (std::size_t k = 1; k < panels; ++k)
                if (share[k] - count[k] > share[best] - count[best]) best = k;
            ++count[best];
            ++used;
        }
    }
    stations_.reserve(used);
    for (std::size_t k = 0; k < panels; ++k) {
        std::vector<double> x, w;
        gauss_legendre(count[k], x, w);
        const double half = 0.5 * (edges[k + 1] - edges[k]);
        const double mid = 0.5 * (edges[k + 1] + edges[k]);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = half * x[i] + mid;
            const double theta = geometry_.theta0 + r / R * geometry_.theta1;
            stations_.push_back({r, w[i] * half, geometry_.chord_at(r), std::sin(theta), std::cos(theta)});
        }
    }
    const int n = quadrature_.azimuthal;
    sin_psi_.resize(n);
    cos_psi_.resize(n);
    for (int j = 0; 2 * j <= n; ++j) {
        const double psi = 2.0 * std::numbers::pi * j / n;
        sin_psi_[j] = 2 * j == n ? 0.0 : std::sin(psi);
        cos_psi_[j] = std::cos(psi);
        if (j > 0) {
            sin_psi_[n - j] = -sin_psi_[j];
            cos_psi_[n - j] = cos_psi_[j];
        }
    }
}

BladeElementResult BemRotorModel::blade_element_integrals(double v_i, const FlappingAngles& fl,
                                                          const RotorOperatingPoint& op) const {
    const double e = geometry_.hinge_offset;
    const double cl0 = geometry_.c_l0;
    const double cd0 = geometry_.c_d0;
    const int n_psi = quadrature_.azimuthal;

    BladeElementResult out;
    struct Row {
        double t = 0.0, h = 0.0, q = 0.0, m = 0.0;
    };
    auto row = [&](int j) {
        const double sp = sin_psi_[j];
        const double cp = cos_psi_[j];
        const double beta = fl.a0 - fl.a1 * cp + fl.b1 * sp;
        const double flap_rate = fl.a1 * sp + fl.b1 * cp; // d(beta)/d(psi)
        Row acc;
        for (const Station& s : stations_) {
            const double ut = op.omega * s.r + op.v_hor * sp;
            const double up = op.v_ver - v_i - s.r * op.omega * flap_rate - op.v_hor * beta * cp;
            if (ut <= 0.0) out.reverse_flow = true;
            const double u2 = ut * ut + up * up;
            if (u2 == 0.0) continue;
            const double u = std::sqrt(u2);
            // phi = atan2(U_P, U_T); alpha = theta + phi
            const double cphi = ut / u;
            const double sphi = up / u;
            const double sa = s.sin_theta * cphi + s.cos_theta * sphi;
            const double ca = s.cos_theta * cphi - s.sin_theta * sphi;
            const double dl = s.chord * cl0 * sa * ca * u2;
            const double dd = s.chord * cd0 * sa * sa * u2;
            const double normal = dl * cphi + dd * sphi;
            const double inplane = -dl * sphi + dd * cphi;
            acc.t += s.weight * normal;
            acc.h += s.weight * inplane;
            acc.q += s.weight * inplane * s.r;
            acc.m += s.weight * normal * (s.r - e);
        }
        return acc;
    };

    // Nodes psi and 2 pi - psi are visited together so that odd harmonics
    // cancel exactly for axisymmetric inflow.
    double sum_t = 0.0, sum_h = 0.0, sum_q = 0.0;
    double m0 = 0.0, mc = 0.0, ms = 0.0;
    auto add_single = [&](int j) {
        const Row r = row(j);
        sum_t += r.t;
        sum_h += r.h * sin_psi_[j];
        sum_q += r.q;
        m0 += r.m;
        mc += r.m * cos_psi_[j];
        ms += r.m * sin_psi_[j];
    };
    add_single(0);
    if (n_psi % 2 == 0) add_single(n_psi / 2);
    for (int j = 1; 2 * j < n_psi; ++j) {
        const Row a = row(j);
        const Row b = row(n_psi - j);
        sum_t += a.t + b.t;
        sum_h += (a.h - b.h) * sin_psi_[j];
        sum_q += a.q + b.q;
        m0 += a.m + b.m;
        mc += (a.m + b.m) * cos_psi_[j];
        ms += (a.m - b.m) * sin_psi_[j];
    }
    const double scale = geometry_.blades * op.rho / (2.0 * n_psi); // b rho/(4 pi) * 2 pi/N
    out.T = scale * sum_t;
    out.H = scale * sum_h;
    out.Q = scale * sum_q;
    const double blade = 0.5 * op.rho; // sectional force = rho/2 * dL
    out.M0 = blade * m0 / n_psi;
    out.Mc = blade * 2.0 * mc / n_psi;
    out.Ms = blade * 2.0 * ms / n_psi;
    return out;
}

InducedVelocityResult
BemRotorModel::solve_physical_induced_velocity(const RotorOperatingPoint& op) const {
    if (!(op.omega > 0.0))
        throw InvalidInput("solve_induced_velocity: rotor speed must be positive");
    if (!std::isfinite(op.v_hor) || !std::isfinite(op.v_ver) || !(op.rho > 0.0))
        throw InvalidInput("solve_induced_velocity: invalid operating point");

    InducedVelocityResult res;
    const FlappingAngles none{};
    auto g = [&](double v) {
        ++res.evaluations;
        return momentum_thrust(v, op, disk_area_) - blade_element_integrals(v, none, op).T;
    };

    const double g0 = g(0.0);
    if (g0 == 0.0) return res;

    // Expand away from zero until the sign flips. Positive v_i when the blades
    // lift at zero induced flow, negative (windmill brake) otherwise.
    const double dir = g0 < 0.0 ? 1.0 : -1.0;
    if (dir < 0.0 && !solver_.allow_windmill)
        throw SolverFailure("induced velocity: blade thrust not positive at v_i = 0 (" +
                            describe(op) + ")");
    const double t0 = std::abs(g0);
    double near = 0.0, g_near = g0;
    double far = std::min(solver_.v_max, std::max(0.5, 1.5 * std::sqrt(t0 / (2.0 * op.rho * disk_area_))));
    double g_far = g(dir * far);
    while ((g_far < 0.0) == (g0 < 0.0)) {
        if (far >= solver_.v_max)
            throw SolverFailure("induced velocity: no sign change up to |v_i| = " +
                                std::to_string(solver_.v_max) + " m/s (" + describe(op) + ")");
        near = far;
        g_near = g_far;
        far = std::min(solver_.v_max, 2.0 * far);
        g_far = g(dir * far);
    }

    double a = dir * near, b = dir * far, ga = g_near, gb = g_far;
    if (a > b) {
        std::swap(a, b);
        std::swap(ga, gb);
    }
    if (ga == 0.0 || gb == 0.0) {
        res.v_i = ga == 0.0 ? a : b;
        return res;
    }
    boost::uintmax_t max_iter = static_cast<boost::uintmax_t>(solver_.max_iterations);
    const auto width_ok = [](double lo, double hi) {
        return std::abs(hi - lo) <= 1e-13 * std::max(1.0, std::abs(lo));
    };
    try {
        const auto [lo, hi] = boost::math::tools::toms748_solve(g, a, b, ga, gb, width_ok, max_iter);
        const double glo = g(lo);
        const double ghi = g(hi);
        res.v_i = std::abs(glo) <= std::abs(ghi) ? lo : hi;
        res.residual = std::abs(glo) <= std::abs(ghi) ? glo : ghi;
    } catch (const std::exception& ex) {
        throw SolverFailure(std::string("induced velocity: ") + ex.what() + " (" + describe(op) + ")");
    }
    return res;
}

double BemRotorModel::vortex_ring_induced_velocity(const RotorOperatingPoint& op) const {
    RotorOperatingPoint level = op;
    level.v_ver = 0.0;
    const double v_h = solve_physical_induced_velocity(level).v_i;
    if (!(v_h > 0.0)) return v_h;
    const double v_tilde = v_h * vortex_ring_polynomial(op.v_ver / v_h);
    return std::max(v_tilde, v_h);
}

InducedVelocityResult BemRotorModel::solve_induced_velocity(const RotorOperatingPoint& op) const {
    InducedVelocityResult res = solve_physical_induced_velocity(op);
    if (in_vortex_ring_state(op.v_ver, res.v_i)) {
        RotorOperatingPoint level = op;
        level.v_ver = 0.0;
        const auto hover = solve_physical_induced_velocity(level);
        res.evaluations += hover.evaluations;
        res.vortex_ring = true;
        res.v_hover = hover.v_i;
        if (hover.v_i > 0.0)
            res.v_i = std::max(hover.v_i * vortex_ring_polynomial(op.v_ver / hover.v_i), hover.v_i);
        else
            res.v_i = hover.v_i;
    }
    return res;
}

FlappingAngles BemRotorModel::flapping_angles(double v_i, const RotorOperatingPoint& op,
                                              int spin) const {
    const double e = geometry_.hinge_offset;
    const double k = geometry_.k_beta;
    const double I = geometry_.blade_inertia;
    const double S = geometry_.blade_first_moment();
    const double w2 = op.omega * op.omega;
    // Hub spin axis relative to the flap-up direction: clockwise rotors spin about
    // +z_P (down), so kappa = -1; the lateral azimuth axis flips accordingly.
    const double kappa = spin > 0 ? -1.0 : 1.0;
    const double w_t = -op.body_rates_P.x();
    const double w_s = kappa * op.body_rates_P.y();

    auto moments = [&](const FlappingAngles& f) {
        const auto r = blade_element_integrals(v_i, f, op);
        return Eigen::Vector3d(r.M0, r.Mc, r.Ms);
    };

    const Eigen::Vector3d m_base = moments({});
    Eigen::Matrix3d jac;
    for (int c = 0; c < 3; ++c) {
        FlappingAngles plus, minus;
        double* pp[3] = {&plus.a0, &plus.a1, &plus.b1};
        double* pm[3] = {&minus.a0, &minus.a1, &minus.b1};
        *pp[c] = kFlapStep;
        *pm[c] = -kFlapStep;
        jac.col(c) = (moments(plus) - moments(minus)) / (2.0 * kFlapStep);
    }

    // Harmonic balance of aero, spring, centrifugal, inertial, gyroscopic and
    // weight moments; beta harmonics are (a0, -a1, b1).
    const Eigen::Vector3d stiffness(k + (I + e * S) * w2, -(k + e * S * w2), k + e * S * w2);
    const Eigen::Matrix3d A = jac - Eigen::Matrix3d(stiffness.asDiagonal());
    const double gyro = 2.0 * kappa * op.omega * (I + e * S);
    const Eigen::Vector3d forcing(kStandardGravity * S, gyro * w_t, gyro * w_s);
    const Eigen::Vector3d rhs = forcing - m_base;

    const Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-300)
        throw DegenerateGeometry("flapping balance is singular (" + describe(op) + ")");
    const Eigen::Vector3d x = lu.solve(rhs);
    return {x[0], x[1], x[2]};
}

BemRotorOutput BemRotorModel::propeller_wrench(const RotorOperatingPoint& op, int spin) const {
    BemRotorOutput out;
    if (op.omega > 0.0) out.induced = solve_induced_velocity(op);
    out.flapping = flapping_angles(out.induced.v_i, op, spin);
    out.integrals = blade_element_integrals(out.induced.v_i, out.flapping, op);

    const double T = out.integrals.T;
    const double s = spin > 0 ? 1.0 : -1.0; // upper sign for clockwise
    const auto& f = out.flapping;
    const double k = geometry_.k_beta;
    out.wrench_P.f = Vec3(-(out.integrals.H + std::sin(f.a1) * T), s * std::sin(f.b1) * T,
                          -T * std::cos(f.a0));
    out.wrench_P.tau = Vec3(s * k * f.b1, k * f.a1, -s * out.integrals.Q);
    out.wrench_B = out.wrench_P;
    return out;
}

BemRotorOutput BemRotorModel::rotor_wrench(const QuadrotorState& state, int rotor_index,
                                           const VehicleParams& params, double omega) const {
    if (!(omega >= 0.0)) throw InvalidInput("rotor_wrench: negative rotor speed");
    RotorInflow inflow = propeller_frame_inflow(state, rotor_index, params);
    inflow.op.omega = omega;
    BemRotorOutput out = propeller_wrench(inflow.op, params.rotor_spin[rotor_index]);
    out.wrench_B.f = inflow.R_BP * out.wrench_P.f;
    out.wrench_B.tau = inflow.R_BP * out.wrench_P.tau;
    return out;
}

} // namespace rotorsim
