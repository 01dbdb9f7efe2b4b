#include "rotorsim/harness/simulation.hpp"

#include "rotorsim/core/errors.hpp"

#include <cmath>
#include <fstream>

namespace rotorsim {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    if (path.empty() || path.is_absolute() || base.empty()) return path;
    return base / path;
}

Vec3 read_vec3(const nlohmann::json& v, const char* key) {
    if (!v.is_array() || v.size() != 3) throw InvalidInput(std::string("config: '") + key + "' must be [x, y, z]");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

} // namespace

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw InvalidInput("config: dt must be positive");
    if (duration && !(*duration > 0.0)) throw InvalidInput("config: duration must be positive");
    if (log_every < 1) throw InvalidInput("config: log_every must be >= 1");
    if (!(crash_radius > 0.0)) throw InvalidInput("config: crash_radius must be positive");
    for (const auto* f : {&vehicle_file, &propeller_file})
        if (!f->empty() && !std::filesystem::exists(*f))
            throw InvalidInput("config: file not found: " + f->string());
    if (!bundle.empty() && bundle != "zero" && !std::filesystem::exists(bundle))
        throw InvalidInput("config: bundle not found: " + bundle);
}

SimConfig parse_sim_config(const nlohmann::json& j, const std::filesystem::path& base) {
    SimConfig c;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "dt_s") c.dt = v.get<double>();
            else if (key == "duration_s") c.duration = v.get<double>();
            else if (key == "model") c.model = ModelSelection::parse(v.get<std::string>());
            else if (key == "vehicle") c.vehicle_file = resolve(base, v.get<std::string>());
            else if (key == "propeller") c.propeller_file = resolve(base, v.get<std::string>());
            else if (key == "bundle") {
                const auto s = v.get<std::string>();
                c.bundle = s == "zero" ? s : resolve(base, s).string();
            } else if (key == "quadratic") {
                QuadraticCoeffs q;
                q.c_lq = v.at("c_lq").get<double>();
                q.c_dq = v.at("c_dq").get<double>();
                c.quadratic = q;
            } else if (key == "controller") c.gains = parse_controller_gains(v);
            else if (key == "trajectory") c.trajectory = parse_trajectory_spec(v);
            else if (key == "initial_position_offset_m") c.initial_position_offset = read_vec3(v, "initial_position_offset_m");
            else if (key == "initial_body_rate_rad_s") c.initial_body_rate = read_vec3(v, "initial_body_rate_rad_s");
            else if (key == "attitude_update") {
                const auto s = v.get<std::string>();
                if (s == "exponential") c.attitude_update = AttitudeUpdate::ExponentialMap;
                else if (s == "raw") c.attitude_update = AttitudeUpdate::RawDerivative;
                else throw InvalidInput("config: attitude_update must be 'exponential' or 'raw'");
            } else if (key == "log_every") c.log_every = v.get<int>();
            else if (key == "crash_radius_m") c.crash_radius = v.get<double>();
            else if (key == "output") c.output = resolve(base, v.get<std::string>());
            else throw InvalidInput("config: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInput("cannot open config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("config " + path.string() + ": " + e.what());
    }
    return parse_sim_config(j, path.parent_path());
}

ModelResources load_resources(const SimConfig& c) {
    ModelResources r;
    r.vehicle = c.vehicle_file.empty() ? VehicleParams::defaults() : load_vehicle_params(c.vehicle_file);
    std::filesystem::path prop = c.propeller_file;
    if (prop.empty() && !c.vehicle_file.empty()) {
        // The vehicle file may name its propeller geometry.
        std::ifstream f(c.vehicle_file);
        const nlohmann::json j = nlohmann::json::parse(f, nullptr, false);
        if (j.is_object() && j.contains("propeller") && j["propeller"].is_string())
            prop = resolve(c.vehicle_file.parent_path(), j["propeller"].get<std::string>());
    }
    const PropellerGeometry geom =
        prop.empty() ? PropellerGeometry::default_5in_3blade() : load_propeller_geometry(prop);
    r.bem = std::make_shared<const BemRotorModel>(geom);
    r.quadratic = c.quadratic ? *c.quadratic : identify_quadratic_from_bem(*r.bem, r.vehicle);
    if (c.model.residual)
        r.bundle = c.bundle.empty() || c.bundle == "zero"
                       ? zero_bundle()
                       : std::make_shared<const ResidualNetBundle>(load_bundle(c.bundle));
    return r;
}

SimResult track_and_simulate(const SimConfig& config, const ModelResources& res) {
    const Trajectory traj(config.trajectory);
    const double duration = config.duration ? *config.duration : traj.duration();
    return track_and_simulate(
        config, res, [&traj](double t) { return traj.at(t); }, duration,
        to_string(config.trajectory.family) + "_" + config.model.name());
}

SimResult track_and_simulate(const SimConfig& config, const ModelResources& res,
                             const ReferenceFn& reference, double duration, const std::string& name) {
    config.validate();
    if (!(duration > 0.0)) throw InvalidInput("track_and_simulate: duration must be positive");
    const TrackingController controller(config.gains, res.vehicle, res.quadratic);
    WrenchModel model(config.model, res, config.dt);
    const VehicleParams& vp = res.vehicle;
    const auto steps = static_cast<long>(std::llround(duration / config.dt));

    const ReferencePoint r0 = reference(0.0);
    QuadrotorState state;
    state.p_WB = r0.p + config.initial_position_offset;
    state.v_WB = r0.v;
    state.q_WB = Quat(Eigen::AngleAxisd(r0.yaw, Vec3::UnitZ()));
    state.omega_B = config.initial_body_rate;
    RotorSpeeds speeds = RotorSpeeds::uniform(controller.hover_speed());

    SimResult result;
    result.log.name = name;
    result.log.samples.reserve(static_cast<std::size_t>(steps / config.log_every + 1));
    for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * config.dt;
        try {
            const RotorSpeeds cmd = controller.command(state, reference(t));
            const Wrench residual = model.advance_residual(t, state, speeds);
            const WrenchFn fn = [&](const QuadrotorState& s, const RotorSpeeds& w) {
                return model.rotor_wrench(s, w) + residual;
            };
            const StepResult step =
                symplectic_euler_step(state, speeds, cmd, fn, vp, config.dt, config.attitude_update);
            if (k % config.log_every == 0) {
                const StateDerivative d = rigid_body_derivative(state, step.wrench, vp);
                FlightSample s;
                s.t = t;
                s.p = state.p_WB;
                s.q = state.q_WB;
                s.v = state.v_WB;
                s.omega = state.omega_B;
                s.omega_dot = d.omega_dot;
                s.a = d.v_dot;
                s.rotor_speeds = step.rotor_speeds;
                s.wrench = step.wrench;
                result.log.samples.push_back(s);
            }
            state = step.state;
            speeds = step.rotor_speeds;
        } catch (const SolverFailure& e) {
            result.status = SimStatus::SolverFailed;
            result.message = e.what();
            result.end_time = t;
            return result;
        } catch (const InvalidInput& e) {
            // Non-finite states surface as invalid input inside the models.
            if (state.all_finite()) throw;
            result.status = SimStatus::Crashed;
            result.message = e.what();
            result.end_time = t;
            return result;
        }
        result.end_time = t + config.dt;
        if (!state.all_finite() || state.p_WB.norm() > config.crash_radius) {
            result.status = SimStatus::Crashed;
            result.message = state.all_finite() ? "position left the " + std::to_string(config.crash_radius) +
                                                      " m sphere at t = " + std::to_string(result.end_time) + " s"
                                                : "non-finite state at t = " + std::to_string(result.end_time) + " s";
            return result;
        }
    }
    return result;
}

SimResult track_and_simulate(const SimConfig& config) {
    return track_and_simulate(config, load_resources(config));
}

int exit_code(SimStatus s) {
    switch (s) {
    case SimStatus::Completed: return 0;
    case SimStatus::Crashed: return 2;
    case SimStatus::SolverFailed: return 3;
    }
    return 1;
}

std::string to_string(SimStatus s) {
    switch (s) {
    case SimStatus::Completed: return "completed";
    case SimStatus::Crashed: return "crashed";
    case SimStatus::SolverFailed: return "solver_failure";
    }
    return "?";
}

} // namespace rotorsim
