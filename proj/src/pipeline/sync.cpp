#include "rotorsim/pipeline/sync.hpp"

#include "rotorsim/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rotorsim {

namespace {

// Body rates tabulated on a fine uniform grid; cheap to evaluate many times.
struct RateTable {
    double t0 = 0.0;
    double dt = 5e-4;
    std::vector<Vec3> w;

    explicit RateTable(const AttitudeSpline& pose, double step = 5e-4) : t0(pose.t_min()), dt(step) {
        const auto n = static_cast<std::size_t>(std::floor((pose.t_max() - t0) / dt)) + 1;
        w.resize(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = pose.body_rate(t0 + dt * static_cast<double>(i));
    }
    double t_end() const { return t0 + dt * static_cast<double>(w.size() - 1); }

    bool at(double t, Vec3& out) const {
        const double s = (t - t0) / dt;
        if (!(s >= 0.0) || s > static_cast<double>(w.size() - 1)) return false;
        const auto i = std::min(static_cast<std::size_t>(s), w.size() - 2);
        const double f = s - static_cast<double>(i);
        out = (1.0 - f) * w[i] + f * w[i + 1];
        return true;
    }
};

struct Samples {
    std::vector<double> t;
    std::vector<Vec3> g;
};

Samples subsample(std::span<const double> t, std::span<const Vec3> g, int max_count) {
    Samples s;
    const std::size_t n = t.size();
    const std::size_t stride = std::max<std::size_t>(1, n / static_cast<std::size_t>(std::max(1, max_count)));
    for (std::size_t i = 0; i < n; i += stride) {
        s.t.push_back(t[i]);
        s.g.push_back(g[i]);
    }
    return s;
}

// Correlation with parameters centred at pose time c: t_o = oc + skew (t_p - c).
double score(const RateTable& table, const Samples& s, double oc, double skew, double c,
             double min_overlap) {
    double n = 0.0;
    Eigen::Array3d sx = Eigen::Array3d::Zero(), sy = sx, sxx = sx, syy = sx, sxy = sx;
    Vec3 w;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        const double tp = c + (s.t[i] - oc) / skew;
        if (!table.at(tp, w)) continue;
        const Eigen::Array3d x = s.g[i].array();
        const Eigen::Array3d y = w.array();
        n += 1.0;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    if (n < std::max(20.0, min_overlap * static_cast<double>(s.t.size()))) return -1.0;
    double total = 0.0;
    int axes = 0;
    for (int k = 0; k < 3; ++k) {
        const double vx = sxx[k] - sx[k] * sx[k] / n;
        const double vy = syy[k] - sy[k] * sy[k] / n;
        if (vx <= 1e-12 * n || vy <= 1e-12 * n) continue;
        total += (sxy[k] - sx[k] * sy[k] / n) / std::sqrt(vx * vy);
        ++axes;
    }
    return axes == 0 ? -1.0 : total / axes;
}

template <class F>
double golden_max(F&& f, double a, double b, double tol) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

void check_inputs(std::span<const double> t, std::span<const Vec3> gyro) {
    if (t.size() != gyro.size()) throw InvalidInput("sync_clocks: time and gyro counts differ");
    if (t.size() < 20) throw InvalidInput("sync_clocks: too few onboard samples");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw InvalidInput("sync_clocks: onboard time must be increasing");
}

} // namespace

double sync_score(const AttitudeSpline& pose, std::span<const double> t_onboard,
                  std::span<const Vec3> gyro, double offset, double skew, double min_overlap) {
    check_inputs(t_onboard, gyro);
    const RateTable table(pose);
    const Samples s = subsample(t_onboard, gyro, static_cast<int>(t_onboard.size()));
    return score(table, s, offset, skew, 0.0, min_overlap);
}

ClockSync sync_clocks(const AttitudeSpline& pose, std::span<const double> t_onboard,
                      std::span<const Vec3> gyro, const ClockSyncOptions& o) {
    check_inputs(t_onboard, gyro);
    if (!(o.skew_min > 0.0) || !(o.skew_max >= o.skew_min) || !(o.skew_step > 0.0) ||
        !(o.offset_step > 0.0) || !(o.offset_half_range >= 0.0))
        throw InvalidInput("sync_clocks: invalid search options");

    const RateTable table(pose);
    const double c = 0.5 * (pose.t_min() + pose.t_max());
    const double oc_guess = 0.5 * (t_onboard.front() + t_onboard.back());
    const Samples coarse = subsample(t_onboard, gyro, o.coarse_samples);
    const Samples fine = subsample(t_onboard, gyro, o.fine_samples);

    double best = -2.0, best_oc = oc_guess, best_skew = 1.0;
    const int n_skew = static_cast<int>(std::floor((o.skew_max - o.skew_min) / o.skew_step + 1e-9)) + 1;
    const int n_off = static_cast<int>(std::floor(o.offset_half_range / o.offset_step + 1e-9));
    for (int i = 0; i < n_skew; ++i) {
        const double skew = o.skew_min + i * o.skew_step;
        for (int j = -n_off; j <= n_off; ++j) {
            const double oc = oc_guess + j * o.offset_step;
            const double sc = score(table, coarse, oc, skew, c, o.min_overlap);
            if (sc > best) {
                best = sc;
                best_oc = oc;
                best_skew = skew;
            }
        }
    }
    if (best < o.min_score - 0.2)
        throw SyncFailure("sync_clocks: no correlation peak (best " + std::to_string(best) + ")", best);

    // Coordinate-wise golden-section refinement on the dense sample set.
    double oc = best_oc, skew = best_skew;
    double w_off = o.offset_step, w_skew = o.skew_step;
    for (int round = 0; round < 6; ++round) {
        oc = golden_max([&](double x) { return score(table, fine, x, skew, c, o.min_overlap); },
                        oc - w_off, oc + w_off, 1e-6);
        skew = golden_max([&](double x) { return score(table, fine, oc, x, c, o.min_overlap); },
                          skew - w_skew, skew + w_skew, 1e-7);
        w_off *= 0.5;
        w_skew *= 0.5;
    }
    ClockSync out;
    out.skew = skew;
    out.offset = oc - skew * c;
    out.score = score(table, fine, oc, skew, c, o.min_overlap);
    if (!(out.score >= o.min_score))
        throw SyncFailure("sync_clocks: best correlation " + std::to_string(out.score) +
                              " below " + std::to_string(o.min_score),
                          out.score);
    return out;
}

} // namespace rotorsim
