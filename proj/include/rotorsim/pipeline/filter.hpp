#pragma once

#include <array>
#include <span>
#include <vector>

namespace rotorsim {

/// Second-order section, transposed direct form II. a0 is normalised to 1.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

/// Fourth-order Butterworth low-pass as two biquads (bilinear transform with
/// pre-warping), -3 dB at design_cutoff_hz for a single pass.
std::array<Biquad, 2> butterworth4_lowpass(double design_cutoff_hz, double sample_rate_hz);

/// Design frequency for which a forward-backward pass is -3 dB at cutoff_hz.
double filtfilt_design_cutoff(double cutoff_hz, double sample_rate_hz);

/// Single causal pass, starting from the steady state of the first sample.
std::vector<double> sosfilt(std::span<const Biquad> sections, std::span<const double> x);

/// Zero-phase low-pass: forward-backward fourth-order Butterworth with odd
/// reflection padding. The combined response is -3 dB at cutoff_hz.
/// Throws InvalidInput if cutoff_hz is not in (0, fs/2).
std::vector<double> filter_motor_speeds(std::span<const double> x, double cutoff_hz,
                                        double sample_rate_hz);

/// 1 / (2 pi tau).
double motor_cutoff_hz(double tau_motor);

/// Magnitude of the single-pass response at frequency f.
double sos_magnitude(std::span<const Biquad> sections, double f_hz, double sample_rate_hz);

} // namespace rotorsim
