#pragma once

#include "rotorsim/harness/metrics.hpp"
#include "rotorsim/harness/model.hpp"
#include "rotorsim/harness/simulation.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace rotorsim {

/// Reference positions taken from a recorded log (splined), yaw from its attitude.
class LogReference {
public:
    explicit LogReference(const FlightLog& log);
    ReferencePoint at(double t) const;
    double t_begin() const { return t0_; }
    double duration() const { return duration_; }

private:
    VectorSpline p_;
    double t0_ = 0.0;
    double duration_ = 0.0;
    std::vector<double> t_;
    std::vector<double> yaw_;
};

struct SweepCase {
    ModelSelection model;
    std::string trajectory_name;
    TrajectorySpec trajectory;     // used when reference_log is null
    const FlightLog* reference_log = nullptr;
};

struct SweepRow {
    std::string trajectory;
    double speed_scale = 1.0;
    std::string model;
    SimStatus status = SimStatus::Completed;
    double rmse = 0.0; // [m], NaN unless completed
    double simulated_s = 0.0;
    double wall_s = 0.0;
    std::string message;
};

/// Runs every case with up to `threads` workers (0: hardware concurrency).
/// Results keep the order of `cases`.
std::vector<SweepRow> run_sweep(const std::vector<SweepCase>& cases, const SimConfig& base,
                                const ModelResources& resources, int threads = 0);

/// One row per (trajectory, speed) and one RMSE column per model; crashed cells read "crash".
void write_sweep_table(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

struct EvaluationRow {
    std::string model;
    WrenchRmse rmse;
    std::size_t samples = 0;
};

/// Model wrench (rotor + residual) for every sample of a log.
std::vector<Wrench> predict_log_wrenches(const FlightLog& log, ModelSelection selection,
                                         const ModelResources& resources);

/// Pooled force/torque RMSE of one model over a set of logs.
EvaluationRow evaluate_model(ModelSelection selection, const ModelResources& resources,
                             const std::vector<FlightLog>& logs,
                             RmsePooling pooling = RmsePooling::Concatenated);

void write_evaluation_table(const std::filesystem::path& path, const std::vector<EvaluationRow>& rows);

/// Parses "all" or a comma-separated list of model names.
std::vector<ModelSelection> parse_model_list(const std::string& text);
/// Parses "all" or a comma-separated list of trajectory families.
std::vector<TrajectoryFamily> parse_trajectory_list(const std::string& text);

} // namespace rotorsim
