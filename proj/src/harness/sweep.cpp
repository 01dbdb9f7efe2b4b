#include "rotorsim/harness/sweep.hpp"

#include "rotorsim/core/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

namespace rotorsim {

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream s(text);
    std::string item;
    while (std::getline(s, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

double median_dt(const FlightLog& log) {
    std::vector<double> d;
    for (std::size_t i = 1; i < log.samples.size(); ++i) d.push_back(log.samples[i].t - log.samples[i - 1].t);
    if (d.empty()) return 1e-3;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
    return d[d.size() / 2];
}

} // namespace

LogReference::LogReference(const FlightLog& log) {
    if (log.size() < 4) throw InvalidInput("reference log needs at least 4 samples");
    std::vector<Vec3> p;
    for (const auto& s : log.samples) {
        t_.push_back(s.t);
        p.push_back(s.p);
        const Vec3 x = s.q * Vec3::UnitX();
        double yaw = std::atan2(x.y(), x.x());
        if (!yaw_.empty()) {
            while (yaw - yaw_.back() > std::numbers::pi) yaw -= 2.0 * std::numbers::pi;
            while (yaw - yaw_.back() < -std::numbers::pi) yaw += 2.0 * std::numbers::pi;
        }
        yaw_.push_back(yaw);
    }
    SplineOptions opt;
    opt.smoothing = 0.0;
    p_ = VectorSpline(t_, p, opt);
    t0_ = t_.front();
    duration_ = t_.back() - t_.front();
}

ReferencePoint LogReference::at(double t) const {
    const double tl = std::clamp(t0_ + t, t_.front(), t_.back());
    ReferencePoint r;
    r.p = p_.value(tl);
    r.v = p_.derivative(tl);
    r.a = p_.second_derivative(tl);
    const auto it = std::upper_bound(t_.begin(), t_.end(), tl);
    const std::size_t i = std::min<std::size_t>(it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1,
                                                t_.size() - 2);
    const double f = (tl - t_[i]) / (t_[i + 1] - t_[i]);
    r.yaw = (1.0 - f) * yaw_[i] + f * yaw_[i + 1];
    return r;
}

std::vector<SweepRow> run_sweep(const std::vector<SweepCase>& cases, const SimConfig& base,
                                const ModelResources& resources, int threads) {
    std::vector<SweepRow> rows(cases.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cases.size(); i = next++) {
            const SweepCase& c = cases[i];
            SweepRow& row = rows[i];
            row.trajectory = c.trajectory_name;
            row.model = c.model.name();
            SimConfig cfg = base;
            cfg.model = c.model;
            cfg.trajectory = c.trajectory;
            row.speed_scale = c.reference_log ? 1.0 : c.trajectory.speed_scale;
            const auto start = std::chrono::steady_clock::now();
            try {
                SimResult res;
                if (c.reference_log) {
                    const LogReference ref(*c.reference_log);
                    cfg.dt = median_dt(*c.reference_log);
                    res = track_and_simulate(cfg, resources, [&ref](double t) { return ref.at(t); },
                                             ref.duration(), c.reference_log->name + "_" + row.model);
                    if (res.status == SimStatus::Completed) {
                        double acc = 0.0;
                        for (const auto& s : res.log.samples) acc += (s.p - ref.at(s.t).p).squaredNorm();
                        row.rmse = std::sqrt(acc / static_cast<double>(res.log.size()));
                    }
                } else {
                    const Trajectory traj(c.trajectory);
                    res = track_and_simulate(cfg, resources);
                    if (res.status == SimStatus::Completed) row.rmse = closed_loop_rmse(res.log, traj);
                }
                row.status = res.status;
                row.simulated_s = res.end_time;
                row.message = res.message;
            } catch (const std::exception& e) {
                row.status = SimStatus::SolverFailed;
                row.message = e.what();
            }
            if (row.status != SimStatus::Completed) row.rmse = std::numeric_limits<double>::quiet_NaN();
            row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    };
    int n = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    n = std::max(1, std::min<int>(n, static_cast<int>(cases.size())));
    std::vector<std::jthread> pool;
    for (int k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    return rows;
}

void write_sweep_table(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    std::vector<std::string> models;
    std::vector<std::pair<std::string, double>> keys;
    std::map<std::pair<std::string, double>, std::map<std::string, std::string>> cells;
    for (const auto& r : rows) {
        if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
        const auto key = std::make_pair(r.trajectory, r.speed_scale);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
        cells[key][r.model] = r.status == SimStatus::Completed ? fmt(r.rmse)
                              : r.status == SimStatus::Crashed ? "crash"
                                                               : "solver_failure";
    }
    std::ofstream f(path);
    if (!f) throw InvalidInput("cannot write " + path.string());
    f << "trajectory,speed_scale";
    for (const auto& m : models) f << ',' << m;
    f << '\n';
    for (const auto& k : keys) {
        f << k.first << ',' << fmt(k.second);
        for (const auto& m : models) {
            const auto it = cells[k].find(m);
            f << ',' << (it == cells[k].end() ? "" : it->second);
        }
        f << '\n';
    }
}

std::vector<Wrench> predict_log_wrenches(const FlightLog& log, ModelSelection selection,
                                         const ModelResources& resources) {
    WrenchModel model(selection, resources, median_dt(log));
    std::vector<Wrench> out;
    out.reserve(log.size());
    for (const auto& s : log.samples) {
        const QuadrotorState st = s.state();
        const Wrench residual = model.advance_residual(s.t, st, s.rotor_speeds);
        out.push_back(model.rotor_wrench(st, s.rotor_speeds) + residual);
    }
    return out;
}

EvaluationRow evaluate_model(ModelSelection selection, const ModelResources& resources,
                             const std::vector<FlightLog>& logs, RmsePooling pooling) {
    std::vector<Wrench> pred, meas;
    for (const auto& log : logs) {
        const auto p = predict_log_wrenches(log, selection, resources);
        pred.insert(pred.end(), p.begin(), p.end());
        for (const auto& s : log.samples) meas.push_back(s.wrench);
    }
    EvaluationRow row;
    row.model = selection.name();
    row.rmse = wrench_rmse(pred, meas, pooling);
    row.samples = pred.size();
    return row;
}

void write_evaluation_table(const std::filesystem::path& path, const std::vector<EvaluationRow>& rows) {
    std::ofstream f(path);
    if (!f) throw InvalidInput("cannot write " + path.string());
    f << "model,F_xy_N,F_z_N,M_xy_Nm,M_z_Nm,F_N,M_Nm,samples\n";
    for (const auto& r : rows)
        f << r.model << ',' << fmt(r.rmse.F_xy) << ',' << fmt(r.rmse.F_z) << ',' << fmt(r.rmse.M_xy) << ','
          << fmt(r.rmse.M_z) << ',' << fmt(r.rmse.F) << ',' << fmt(r.rmse.M) << ',' << r.samples << '\n';
}

std::vector<ModelSelection> parse_model_list(const std::string& text) {
    if (text == "all") return all_model_selections();
    std::vector<ModelSelection> out;
    for (const auto& s : split_list(text)) out.push_back(ModelSelection::parse(s));
    if (out.empty()) throw InvalidInput("empty model list");
    return out;
}

std::vector<TrajectoryFamily> parse_trajectory_list(const std::string& text) {
    if (text == "all") return all_trajectory_families();
    std::vector<TrajectoryFamily> out;
    for (const auto& s : split_list(text)) out.push_back(parse_trajectory_family(s));
    if (out.empty()) throw InvalidInput("empty trajectory list");
    return out;
}

} // namespace rotorsim
