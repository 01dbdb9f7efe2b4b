#include "rotorsim/harness/metrics.hpp"

#include "rotorsim/core/errors.hpp"

#include <cmath>

namespace rotorsim {

WrenchRmse wrench_rmse(std::span<const Wrench> pred, std::span<const Wrench> meas, RmsePooling pooling) {
    if (pred.empty()) throw InvalidInput("wrench_rmse: empty log");
    if (pred.size() != meas.size()) throw InvalidInput("wrench_rmse: prediction and log lengths differ");
    Eigen::Array3d sf = Eigen::Array3d::Zero(), sm = Eigen::Array3d::Zero();
    for (std::size_t i = 0; i < pred.size(); ++i) {
        sf += (pred[i].f - meas[i].f).array().square();
        sm += (pred[i].tau - meas[i].tau).array().square();
    }
    const double n = static_cast<double>(pred.size());
    const Eigen::Array3d mf = sf / n, mm = sm / n;
    WrenchRmse r;
    r.F_z = std::sqrt(mf[2]);
    r.M_z = std::sqrt(mm[2]);
    if (pooling == RmsePooling::Concatenated) {
        r.F_xy = std::sqrt(0.5 * (mf[0] + mf[1]));
        r.M_xy = std::sqrt(0.5 * (mm[0] + mm[1]));
        r.F = std::sqrt(mf.sum() / 3.0);
        r.M = std::sqrt(mm.sum() / 3.0);
    } else {
        const Eigen::Array3d rf = mf.sqrt(), rm = mm.sqrt();
        r.F_xy = 0.5 * (rf[0] + rf[1]);
        r.M_xy = 0.5 * (rm[0] + rm[1]);
        r.F = rf.sum() / 3.0;
        r.M = rm.sum() / 3.0;
    }
    return r;
}

WrenchRmse wrench_rmse(std::span<const Wrench> pred, const FlightLog& log, RmsePooling pooling) {
    std::vector<Wrench> meas;
    meas.reserve(log.samples.size());
    for (const auto& s : log.samples) meas.push_back(s.wrench);
    return wrench_rmse(pred, meas, pooling);
}

double closed_loop_rmse(const FlightLog& sim, const FlightLog& ref) {
    if (sim.empty() || ref.empty()) throw InvalidInput("closed_loop_rmse: empty log");
    if (sim.size() != ref.size()) throw InvalidInput("closed_loop_rmse: logs have different lengths");
    double acc = 0.0;
    for (std::size_t i = 0; i < sim.size(); ++i) {
        const double dt_tol = 1e-9 * std::max(1.0, std::abs(ref.samples[i].t));
        if (std::abs(sim.samples[i].t - ref.samples[i].t) > dt_tol)
            throw InvalidInput("closed_loop_rmse: logs are not on a common time grid");
        acc += (sim.samples[i].p - ref.samples[i].p).squaredNorm();
    }
    return std::sqrt(acc / static_cast<double>(sim.size()));
}

double closed_loop_rmse(const FlightLog& sim, const Trajectory& ref) {
    if (sim.empty()) throw InvalidInput("closed_loop_rmse: empty log");
    double acc = 0.0;
    for (const auto& s : sim.samples) acc += (s.p - ref.at(s.t).p).squaredNorm();
    return std::sqrt(acc / static_cast<double>(sim.size()));
}

} // namespace rotorsim
