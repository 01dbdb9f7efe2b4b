#pragma once

#include "rotorsim/core/types.hpp"
#include "rotorsim/harness/trajectory.hpp"
#include "rotorsim/pipeline/flight_log.hpp"

#include <span>
#include <vector>

namespace rotorsim {

struct WrenchRmse {
    double F_xy = 0.0, F_z = 0.0, M_xy = 0.0, M_z = 0.0, F = 0.0, M = 0.0;
};

enum class RmsePooling {
    Concatenated, // RMSE over all component errors of a group
    PerAxisMean,  // mean of the per-axis RMSEs of a group
};

/// Throws InvalidInput when the sequences are empty or differ in length.
WrenchRmse wrench_rmse(std::span<const Wrench> predicted, std::span<const Wrench> measured,
                       RmsePooling pooling = RmsePooling::Concatenated);
WrenchRmse wrench_rmse(std::span<const Wrench> predicted, const FlightLog& log,
                       RmsePooling pooling = RmsePooling::Concatenated);

/// sqrt(mean |p_sim - p_ref|^2). Both logs must share the time grid.
double closed_loop_rmse(const FlightLog& sim, const FlightLog& reference);

/// Positional RMSE of a log against an analytic reference trajectory.
double closed_loop_rmse(const FlightLog& sim, const Trajectory& reference);

} // namespace rotorsim
