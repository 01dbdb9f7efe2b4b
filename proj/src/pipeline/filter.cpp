#include "rotorsim/pipeline/filter.hpp"

#include "rotorsim/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace rotorsim {

namespace {

void check_cutoff(double cutoff_hz, double fs) {
    if (!(fs > 0.0) || !std::isfinite(fs)) throw InvalidInput("filter: sample rate must be positive");
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * fs))
        throw InvalidInput("filter: cutoff must lie strictly between 0 and the Nyquist frequency");
}

} // namespace

std::array<Biquad, 2> butterworth4_lowpass(double fc, double fs) {
    check_cutoff(fc, fs);
    const double K = std::tan(std::numbers::pi * fc / fs);
    // Pole-pair quality factors of the 4th-order prototype.
    const double qs[2] = {1.0 / (2.0 * std::cos(std::numbers::pi / 8.0)),
                          1.0 / (2.0 * std::cos(3.0 * std::numbers::pi / 8.0))};
    std::array<Biquad, 2> out;
    for (int i = 0; i < 2; ++i) {
        const double q = qs[i];
        const double norm = 1.0 / (1.0 + K / q + K * K);
        Biquad& s = out[i];
        s.b0 = K * K * norm;
        s.b1 = 2.0 * s.b0;
        s.b2 = s.b0;
        s.a1 = 2.0 * (K * K - 1.0) * norm;
        s.a2 = (1.0 - K / q + K * K) * norm;
    }
    return out;
}

double filtfilt_design_cutoff(double cutoff_hz, double fs) {
    check_cutoff(cutoff_hz, fs);
    // |H|^2 = 1 / (1 + (K_f / K_d)^8); the doubled pass needs |H|^4 = 1/2 at cutoff.
    const double ratio = std::pow(std::sqrt(2.0) - 1.0, 1.0 / 8.0);
    const double Kd = std::tan(std::numbers::pi * cutoff_hz / fs) / ratio;
    return std::atan(Kd) * fs / std::numbers::pi;
}

std::vector<double> sosfilt(std::span<const Biquad> sections, std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    if (y.empty()) return y;
    for (const Biquad& s : sections) {
        // Steady state for a constant input equal to the first sample.
        const double x0 = y[0];
        const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        double z1 = x0 * dc - s.b0 * x0;
        double z2 = s.b2 * x0 - s.a2 * x0 * dc;
        for (double& v : y) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
    return y;
}

std::vector<double> filter_motor_speeds(std::span<const double> x, double cutoff_hz, double fs) {
    const auto sos = butterworth4_lowpass(filtfilt_design_cutoff(cutoff_hz, fs), fs);
    const std::size_t n = x.size();
    if (n == 0) return {};
    if (n == 1) return {x[0]};
    const std::size_t pad = std::min<std::size_t>(
        n - 1, std::max<std::size_t>(15, static_cast<std::size_t>(std::ceil(fs / cutoff_hz))));

    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    std::vector<double> y = sosfilt(sos, ext);
    std::reverse(y.begin(), y.end());
    y = sosfilt(sos, y);
    std::reverse(y.begin(), y.end());
    return {y.begin() + static_cast<std::ptrdiff_t>(pad),
            y.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

double motor_cutoff_hz(double tau_motor) {
    if (!(tau_motor > 0.0)) throw InvalidInput("motor_cutoff_hz: time constant must be positive");
    return 1.0 / (2.0 * std::numbers::pi * tau_motor);
}

double sos_magnitude(std::span<const Biquad> sections, double f, double fs) {
    const std::complex<double> z = std::polar(1.0, -2.0 * std::numbers::pi * f / fs); // z^-1
    std::complex<double> h = 1.0;
    for (const Biquad& s : sections)
        h *= (s.b0 + s.b1 * z + s.b2 * z * z) / (1.0 + s.a1 * z + s.a2 * z * z);
    return std::abs(h);
}

} // namespace rotorsim
