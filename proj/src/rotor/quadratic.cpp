#include "rotorsim/rotor/quadratic.hpp"

#include "rotorsim/core/errors.hpp"
#include "rotorsim/core/csv.hpp"

#include <cmath>

namespace rotorsim {

Wrench quadratic_rotor_wrench(double omega, const QuadraticCoeffs& coeffs, int spin) {
    if (!(omega >= 0.0)) throw InvalidInput("quadratic_rotor_wrench: negative rotor speed");
    const double w2 = omega * omega;
    Wrench w;
    w.f.z() = coeffs.c_lq * w2;
    w.tau.z() = spin * coeffs.c_dq * w2;
    return w;
}

QuadraticCoeffs fit_quadratic(std::span<const ThrustSample> samples) {
    if (samples.size() < 2) throw SingularFit("fit_quadratic: need at least two samples");
    double s44 = 0.0, s2t = 0.0, s2q = 0.0;
    bool distinct = false;
    const double w0 = std::abs(samples.front().omega);
    for (const auto& s : samples) {
        if (!std::isfinite(s.omega) || !std::isfinite(s.thrust) || !std::isfinite(s.torque))
            throw InvalidInput("fit_quadratic: non-finite sample");
        const double x = s.omega * s.omega;
        s44 += x * x;
        s2t += x * s.thrust;
        s2q += x * s.torque;
        distinct = distinct || std::abs(s.omega) != w0;
    }
    if (!distinct || s44 == 0.0) throw SingularFit("fit_quadratic: rotor speeds are not distinct");
    return {s2t / s44, s2q / s44};
}

double thrust_r_squared(std::span<const ThrustSample> samples, const QuadraticCoeffs& coeffs) {
    double mean = 0.0;
    for (const auto& s : samples) mean += s.thrust;
    mean /= static_cast<double>(samples.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& s : samples) {
        const double r = s.thrust - coeffs.c_lq * s.omega * s.omega;
        ss_res += r * r;
        ss_tot += (s.thrust - mean) * (s.thrust - mean);
    }
    return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
}

std::vector<ThrustSample> load_thrust_map(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const auto iw = t.column_index("omega_rad_s");
    const auto it = t.column_index("thrust_N");
    const auto iq = t.column_index("torque_Nm");
    std::vector<ThrustSample> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) out.push_back({row[iw], row[it], row[iq]});
    return out;
}

void save_thrust_map(const std::filesystem::path& path, std::span<const ThrustSample> samples) {
    CsvTable t;
    t.header = {"omega_rad_s", "thrust_N", "torque_Nm"};
    for (const auto& s : samples) t.rows.push_back({s.omega, s.thrust, s.torque});
    write_csv(path, t);
}

} // namespace rotorsim
