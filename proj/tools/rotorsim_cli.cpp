// Command-line front end: simulate, evaluate, sweep, charmap, plot, fit,
// process and split.
#include "rotorsim/core/csv.hpp"
#include "rotorsim/core/errors.hpp"
#include "rotorsim/harness/sweep.hpp"
#include "rotorsim/pipeline/flight_log.hpp"
#include "rotorsim/rotor/bem.hpp"
#include "rotorsim/rotor/quadratic.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace rotorsim;

namespace {

constexpr int kExitError = 1;

struct Range {
    double lo = 0.0, hi = 0.0;
    int n = 1;
    double at(int i) const { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); }
};

// "lo:hi:n" or a single value.
Range parse_range(const std::string& s) {
    Range r;
    const auto a = s.find(':');
    if (a == std::string::npos) {
        r.lo = r.hi = std::stod(s);
        return r;
    }
    const auto b = s.find(':', a + 1);
    if (b == std::string::npos) throw InvalidInput("range must be lo:hi:n, got '" + s + "'");
    r.lo = std::stod(s.substr(0, a));
    r.hi = std::stod(s.substr(a + 1, b - a - 1));
    r.n = std::stoi(s.substr(b + 1));
    if (r.n < 1) throw InvalidInput("range count must be >= 1");
    return r;
}

std::vector<double> parse_numbers(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

struct CommonModelOptions {
    std::string vehicle, propeller, bundle, quadratic;

    void add(CLI::App* app) {
        app->add_option("--vehicle", vehicle, "Vehicle JSON (default: built-in)")->check(CLI::ExistingFile);
        app->add_option("--propeller", propeller, "Propeller geometry JSON (default: built-in estimate)")
            ->check(CLI::ExistingFile);
        app->add_option("--bundle", bundle, "Residual-net bundle for +nn models ('zero' for a zero net)");
        app->add_option("--quadratic", quadratic, "c_lq,c_dq for the fit model (default: identified from BEM)");
    }

    void apply(SimConfig& c) const {
        if (!vehicle.empty()) c.vehicle_file = vehicle;
        if (!propeller.empty()) c.propeller_file = propeller;
        if (!bundle.empty()) c.bundle = bundle;
        if (!quadratic.empty()) {
            const auto v = parse_numbers(quadratic);
            if (v.size() != 2) throw InvalidInput("--quadratic expects c_lq,c_dq");
            c.quadratic = QuadraticCoeffs{v[0], v[1]};
        }
    }
};

ModelResources resources_for(const SimConfig& c, bool need_bundle) {
    SimConfig tmp = c;
    tmp.model.residual = need_bundle;
    return load_resources(tmp);
}

int cmd_simulate(const std::string& config_path, const std::string& out, const std::string& model) {
    SimConfig cfg = load_sim_config(config_path);
    if (!model.empty()) cfg.model = ModelSelection::parse(model);
    if (!out.empty()) cfg.output = out;
    const SimResult r = track_and_simulate(cfg);
    if (!cfg.output.empty()) write_flight_log(cfg.output, r.log);
    std::printf("status: %s\nsimulated: %.3f s\nsamples: %zu\n", to_string(r.status).c_str(), r.end_time,
                r.log.size());
    if (!r.message.empty()) std::printf("message: %s\n", r.message.c_str());
    if (r.status == SimStatus::Completed) {
        const Trajectory traj(cfg.trajectory);
        if (!r.log.empty()) std::printf("position_rmse_m: %.6g\n", closed_loop_rmse(r.log, traj));
    }
    return exit_code(r.status);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quadrotor simulator with blade-element rotor model and learned residual"};
    app.require_subcommand(1);

    // simulate
    std::string sim_config, sim_out, sim_model;
    auto* sim = app.add_subcommand("simulate", "Closed-loop simulation from a JSON config");
    sim->add_option("--config", sim_config, "Simulation config")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", sim_out, "Output log CSV (overrides config)");
    sim->add_option("--model", sim_model, "Model override, e.g. bem+nn");

    // evaluate
    std::string ev_models = "all", ev_logs, ev_out = "table2.csv";
    double ev_max_speed = 0.0;
    bool ev_per_axis = false;
    CommonModelOptions ev_common;
    auto* ev = app.add_subcommand("evaluate", "Force/torque RMSE of models on processed logs");
    ev->add_option("--model,--models", ev_models, "Model name, comma list or 'all'");
    ev->add_option("--log", ev_logs, "Directory of processed log CSVs")->required()->check(CLI::ExistingDirectory);
    ev->add_option("--out", ev_out, "Output table CSV");
    ev->add_option("--max-speed", ev_max_speed, "Only logs whose peak speed stays below this [m/s]");
    ev->add_flag("--per-axis", ev_per_axis, "Average per-axis RMSEs instead of pooling components");
    ev_common.add(ev);

    // sweep
    std::string sw_models = "all", sw_traj = "all", sw_speeds = "1", sw_out = "table3.csv", sw_config,
                sw_refs;
    int sw_threads = 0;
    CommonModelOptions sw_common;
    auto* sw = app.add_subcommand("sweep", "Closed-loop position RMSE over models x trajectories");
    sw->add_option("--models", sw_models, "Comma list or 'all'");
    sw->add_option("--trajectories", sw_traj, "Comma list or 'all'");
    sw->add_option("--speeds", sw_speeds, "Comma list of speed scales");
    sw->add_option("--config", sw_config, "Base simulation config")->check(CLI::ExistingFile);
    sw->add_option("--reference-logs", sw_refs, "Track recorded logs instead of analytic references")
        ->check(CLI::ExistingDirectory);
    sw->add_option("--threads", sw_threads, "Worker threads (0: all cores)");
    sw->add_option("--out", sw_out, "Output table CSV");
    sw_common.add(sw);

    // charmap
    std::string cm_prop, cm_out = "charmap.csv", cm_omega = "500:3000:11", cm_vhor = "0:10:6",
                cm_vver = "-5:5:11";
    double cm_rho = 1.204;
    int cm_spin = 1;
    auto* cm = app.add_subcommand("charmap", "Thrust/H/Q map of the blade-element rotor model");
    cm->add_option("--propeller", cm_prop, "Propeller geometry JSON")->check(CLI::ExistingFile);
    cm->add_option("--omega", cm_omega, "Rotor speed range lo:hi:n [rad/s]");
    cm->add_option("--vhor", cm_vhor, "Horizontal inflow range lo:hi:n [m/s]");
    cm->add_option("--vver", cm_vver, "Vertical inflow range lo:hi:n [m/s], positive descending");
    cm->add_option("--rho", cm_rho, "Air density [kg/m^3]");
    cm->add_option("--spin", cm_spin, "+1 clockwise, -1 counter-clockwise")->check(CLI::IsMember({-1, 1}));
    cm->add_option("--out", cm_out, "Output CSV");

    // plot
    std::string pl_log, pl_out;
    auto* pl = app.add_subcommand("plot", "Emit plot-ready CSV series from a processed log");
    pl->add_option("--log", pl_log, "Processed log CSV")->required()->check(CLI::ExistingFile);
    pl->add_option("--out", pl_out, "Output CSV (default: stdout)");

    // fit
    std::string fit_map, fit_prop, fit_out;
    double fit_lo = 800.0, fit_hi = 2500.0;
    auto* fit = app.add_subcommand("fit", "Quadratic rotor coefficients from a thrust map or the BEM model");
    fit->add_option("--map", fit_map, "Thrust map CSV (omega_rad_s,thrust_N,torque_Nm)")->check(CLI::ExistingFile);
    fit->add_option("--propeller", fit_prop, "Identify from the BEM static map of this geometry")
        ->check(CLI::ExistingFile);
    fit->add_option("--omega-min", fit_lo, "BEM map lower speed [rad/s]");
    fit->add_option("--omega-max", fit_hi, "BEM map upper speed [rad/s]");
    fit->add_option("--out", fit_out, "Write coefficients as JSON");

    // process
    std::string pr_pose, pr_onboard, pr_mapping, pr_vehicle, pr_out;
    double pr_cutoff = 0.0, pr_trim = 0.05;
    auto* pr = app.add_subcommand("process", "Fuse raw pose and onboard streams into a processed log");
    pr->add_option("--pose", pr_pose, "Pose CSV")->required()->check(CLI::ExistingFile);
    pr->add_option("--onboard", pr_onboard, "Onboard CSV")->required()->check(CLI::ExistingFile);
    pr->add_option("--mapping", pr_mapping, "Column mapping JSON")->check(CLI::ExistingFile);
    pr->add_option("--vehicle", pr_vehicle, "Vehicle JSON")->check(CLI::ExistingFile);
    pr->add_option("--cutoff", pr_cutoff, "Motor-speed low-pass cutoff [Hz] (default 1/(2 pi tau))");
    pr->add_option("--trim", pr_trim, "Seconds dropped at both ends");
    pr->add_option("--out", pr_out, "Output log CSV")->required();

    // split
    std::string sp_logs, sp_out;
    double sp_max_speed = 0.0;
    auto* sp = app.add_subcommand("split", "70/20/10 trajectory split stratified by speed");
    sp->add_option("--logs", sp_logs, "Directory of processed log CSVs")->required()->check(CLI::ExistingDirectory);
    sp->add_option("--max-speed", sp_max_speed, "Drop logs whose peak speed exceeds this [m/s]");
    sp->add_option("--out", sp_out, "Write the split as JSON (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help and version exit 0; usage errors exit 1 so 2 and 3 keep their meaning.
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*sim) return cmd_simulate(sim_config, sim_out, sim_model);

        if (*ev) {
            SimConfig base;
            ev_common.apply(base);
            const auto models = parse_model_list(ev_models);
            const ModelResources res = resources_for(base, true);
            auto logs = read_flight_logs(ev_logs);
            if (ev_max_speed > 0.0) logs = filter_max_speed(logs, ev_max_speed);
            if (logs.empty()) throw InvalidInput("no logs to evaluate");
            std::vector<EvaluationRow> rows;
            for (const auto& m : models) {
                rows.push_back(evaluate_model(m, res, logs,
                                              ev_per_axis ? RmsePooling::PerAxisMean : RmsePooling::Concatenated));
                const auto& r = rows.back();
                std::printf("%-8s F_xy %.4f F_z %.4f M_xy %.5f M_z %.5f F %.4f M %.5f\n", r.model.c_str(),
                            r.rmse.F_xy, r.rmse.F_z, r.rmse.M_xy, r.rmse.M_z, r.rmse.F, r.rmse.M);
            }
            write_evaluation_table(ev_out, rows);
            return 0;
        }

        if (*sw) {
            SimConfig base = sw_config.empty() ? SimConfig{} : load_sim_config(sw_config);
            sw_common.apply(base);
            const auto models = parse_model_list(sw_models);
            const ModelResources res = resources_for(base, true);
            std::vector<SweepCase> cases;
            std::vector<FlightLog> refs;
            if (!sw_refs.empty()) {
                refs = read_flight_logs(sw_refs);
                for (const auto& log : refs)
                    for (const auto& m : models) cases.push_back({m, log.name, base.trajectory, &log});
            } else {
                for (auto fam : parse_trajectory_list(sw_traj))
                    for (double s : parse_numbers(sw_speeds))
                        for (const auto& m : models) {
                            TrajectorySpec spec = base.trajectory;
                            spec.family = fam;
                            spec.speed_scale = s;
                            cases.push_back({m, to_string(fam), spec, nullptr});
                        }
            }
            const auto rows = run_sweep(cases, base, res, sw_threads);
            int code = 0;
            for (const auto& r : rows) {
                std::printf("%-18s x%-4g %-8s %-14s rmse %-10.4g wall %.1f s\n", r.trajectory.c_str(),
                            r.speed_scale, r.model.c_str(), to_string(r.status).c_str(), r.rmse, r.wall_s);
                if (r.status == SimStatus::SolverFailed) code = 3;
            }
            write_sweep_table(sw_out, rows);
            return code;
        }

        if (*cm) {
            const PropellerGeometry g =
                cm_prop.empty() ? PropellerGeometry::default_5in_3blade() : load_propeller_geometry(cm_prop);
            const BemRotorModel bem(g);
            const Range om = parse_range(cm_omega), vh = parse_range(cm_vhor), vv = parse_range(cm_vver);
            std::ofstream f(cm_out);
            if (!f) throw InvalidInput("cannot write " + cm_out);
            f << "omega_rad_s,v_hor_m_s,v_ver_m_s,thrust_N,hforce_N,torque_Nm,v_i_m_s,a0_rad,a1_rad,b1_rad,"
                 "vortex_ring,reverse_flow\n";
            char line[512];
            for (int i = 0; i < om.n; ++i)
                for (int j = 0; j < vh.n; ++j)
                    for (int k = 0; k < vv.n; ++k) {
                        RotorOperatingPoint op;
                        op.omega = om.at(i);
                        op.v_hor = vh.at(j);
                        op.v_ver = vv.at(k);
                        op.rho = cm_rho;
                        const auto o = bem.propeller_wrench(op, cm_spin);
                        std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%d\n",
                                      op.omega, op.v_hor, op.v_ver, o.integrals.T, o.integrals.H, o.integrals.Q,
                                      o.induced.v_i, o.flapping.a0, o.flapping.a1, o.flapping.b1,
                                      o.induced.vortex_ring ? 1 : 0, o.integrals.reverse_flow ? 1 : 0);
                        f << line;
                    }
            return 0;
        }

        if (*pl) {
            const FlightLog log = read_flight_log(pl_log);
            CsvTable t;
            t.header = {"t", "px", "py", "pz", "speed", "roll", "pitch", "yaw", "fz", "tau_x", "tau_y", "tau_z",
                        "mot1", "mot2", "mot3", "mot4"};
            for (const auto& s : log.samples) {
                const Vec3 e = s.q.toRotationMatrix().eulerAngles(2, 1, 0);
                t.rows.push_back({s.t, s.p.x(), s.p.y(), s.p.z(), s.v.norm(), e[2], e[1], e[0], s.wrench.f.z(),
                                  s.wrench.tau.x(), s.wrench.tau.y(), s.wrench.tau.z(), s.rotor_speeds[0],
                                  s.rotor_speeds[1], s.rotor_speeds[2], s.rotor_speeds[3]});
            }
            if (pl_out.empty()) write_csv(std::cout, t);
            else write_csv(pl_out, t);
            return 0;
        }

        if (*fit) {
            std::vector<ThrustSample> samples;
            if (!fit_map.empty()) {
                samples = load_thrust_map(fit_map);
            } else {
                const PropellerGeometry g =
                    fit_prop.empty() ? PropellerGeometry::default_5in_3blade() : load_propeller_geometry(fit_prop);
                const BemRotorModel bem(g);
                for (int i = 0; i < 18; ++i) {
                    RotorOperatingPoint op;
                    op.omega = fit_lo + (fit_hi - fit_lo) * i / 17.0;
                    const auto o = bem.propeller_wrench(op, 1);
                    samples.push_back({op.omega, -o.wrench_P.f.z(), o.integrals.Q});
                }
            }
            const QuadraticCoeffs c = fit_quadratic(samples);
            const double r2 = thrust_r_squared(samples, c);
            std::printf("c_lq: %.9g\nc_dq: %.9g\nthrust_r2: %.6f\n", c.c_lq, c.c_dq, r2);
            if (!fit_out.empty()) {
                std::ofstream f(fit_out);
                f << nlohmann::json{{"c_lq", c.c_lq}, {"c_dq", c.c_dq}, {"thrust_r2", r2}}.dump(2) << '\n';
            }
            return 0;
        }

        if (*pr) {
            ColumnMapping mapping;
            if (!pr_mapping.empty()) {
                std::ifstream f(pr_mapping);
                mapping = ColumnMapping::from_json(nlohmann::json::parse(f));
            }
            const VehicleParams vp = pr_vehicle.empty() ? VehicleParams::defaults() : load_vehicle_params(pr_vehicle);
            const RawLog raw = load_raw_log(pr_pose, pr_onboard, mapping);
            AssembleOptions opt;
            if (pr_cutoff > 0.0) opt.motor_cutoff_hz = pr_cutoff;
            opt.edge_trim = pr_trim;
            AssembleReport rep;
            const FlightLog log = assemble_flight_log(raw, vp, opt, &rep);
            write_flight_log(pr_out, log);
            std::printf("clock offset %.6f s, skew %.6f, correlation %.4f, %zu samples\n", rep.clock.offset,
                        rep.clock.skew, rep.clock.score, log.size());
            return 0;
        }

        if (*sp) {
            auto logs = read_flight_logs(sp_logs);
            if (sp_max_speed > 0.0) logs = filter_max_speed(logs, sp_max_speed);
            const DatasetSplit s = split_dataset(logs);
            auto names = [&](const std::vector<std::size_t>& idx) {
                nlohmann::json a = nlohmann::json::array();
                for (auto i : idx) a.push_back(logs[i].name);
                return a;
            };
            const nlohmann::json j{{"train", names(s.train)}, {"validation", names(s.validation)},
                                   {"test", names(s.test)}};
            if (sp_out.empty()) std::cout << j.dump(2) << '\n';
            else std::ofstream(sp_out) << j.dump(2) << '\n';
            return 0;
        }
    } catch (const SolverFailure& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 3;
    } catch (const SyncFailure& e) {
        std::fprintf(stderr, "clock sync failed: %s\n", e.what());
        return kExitError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return 0;
}
