#pragma once

#include "rotorsim/core/types.hpp"
#include "rotorsim/pipeline/spline.hpp"

#include <span>

namespace rotorsim {

/// Clock model t_onboard = offset + skew * t_pose.
struct ClockSync {
    double offset = 0.0;
    double skew = 1.0;
    double score = 0.0; // mean axis-wise correlation at the optimum

    double to_pose(double t_onboard) const { return (t_onboard - offset) / skew; }
    double to_onboard(double t_pose) const { return offset + skew * t_pose; }
};

struct ClockSyncOptions {
    double skew_min = 0.95;
    double skew_max = 1.05;
    double skew_step = 1e-3;
    double offset_half_range = 1.0; // [s] around the midpoint alignment of both streams
    double offset_step = 5e-3;      // [s]
    int coarse_samples = 1500;
    int fine_samples = 20000;
    double min_score = 0.9;
    double min_overlap = 0.5; // fraction of onboard samples that must map into the pose range
};

/// Mean over axes of the Pearson correlation between gyro samples and the
/// spline body rate at the mapped pose times. Returns -1 when the overlap is
/// too small or no axis has variation.
double sync_score(const AttitudeSpline& pose, std::span<const double> t_onboard,
                  std::span<const Vec3> gyro, double offset, double skew,
                  double min_overlap = 0.5);

/// Coarse grid over (offset, skew) followed by golden-section refinement.
/// Throws SyncFailure when the best correlation stays below min_score.
ClockSync sync_clocks(const AttitudeSpline& pose, std::span<const double> t_onboard,
                      std::span<const Vec3> gyro, const ClockSyncOptions& options = {});

} // namespace rotorsim
