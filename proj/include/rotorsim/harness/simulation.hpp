#pragma once

#include "rotorsim/core/dynamics.hpp"
#include "rotorsim/harness/controller.hpp"
#include "rotorsim/harness/model.hpp"
#include "rotorsim/harness/trajectory.hpp"
#include "rotorsim/pipeline/flight_log.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace rotorsim {

struct SimConfig {
    double dt = 1e-3;
    std::optional<double> duration; // default: trajectory duration
    ModelSelection model;
    std::filesystem::path vehicle_file;   // empty: built-in defaults
    std::filesystem::path propeller_file; // empty: built-in 5-inch estimate
    std::string bundle;                   // path, or empty / "zero" for a zero-weight net
    std::optional<QuadraticCoeffs> quadratic; // empty: identified from the BEM static map
    ControllerGains gains;
    TrajectorySpec trajectory;
    Vec3 initial_position_offset = Vec3::Zero();
    Vec3 initial_body_rate = Vec3::Zero();
    AttitudeUpdate attitude_update = AttitudeUpdate::ExponentialMap;
    int log_every = 1;
    double crash_radius = 100.0;
    std::filesystem::path output;

    void validate() const;
};

/// Relative paths are resolved against `base_dir`.
SimConfig parse_sim_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
SimConfig load_sim_config(const std::filesystem::path& path);

/// Loads vehicle, propeller, bundle and quadratic coefficients for a config.
ModelResources load_resources(const SimConfig& config);

enum class SimStatus { Completed, Crashed, SolverFailed };

struct SimResult {
    SimStatus status = SimStatus::Completed;
    FlightLog log;          // logged samples up to the end or the crash
    double end_time = 0.0;  // time of the last integrated state
    std::string message;    // crash or failure description
};

/// Closed-loop run of the tracking controller against the selected model.
/// Crash: |p| > crash_radius or a non-finite state.
SimResult track_and_simulate(const SimConfig& config, const ModelResources& resources);
SimResult track_and_simulate(const SimConfig& config);

using ReferenceFn = std::function<ReferencePoint(double)>;

/// Same loop against an arbitrary reference; t runs from 0 to duration.
SimResult track_and_simulate(const SimConfig& config, const ModelResources& resources,
                             const ReferenceFn& reference, double duration,
                             const std::string& name);

/// Process exit code for a result: 0 completed, 2 crashed, 3 solver failure.
int exit_code(SimStatus status);
std::string to_string(SimStatus status);

} // namespace rotorsim
