#include "rotorsim/pipeline/spline.hpp"

#include "rotorsim/core/dynamics.hpp"
#include "rotorsim/core/errors.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace rotorsim {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

void check_samples(std::span<const double> t, std::size_t n_values) {
    if (t.size() != n_values) throw InvalidInput("spline: time and value counts differ");
    if (t.size() < 4) throw InvalidInput("spline: need at least 4 samples");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i])) throw InvalidInput("spline: non-finite time stamp");
        if (i > 0 && !(t[i] > t[i - 1])) throw InvalidInput("spline: time must be increasing");
    }
}

// Q (n x n-2) of the second-difference operator and R (n-2 x n-2).
void difference_matrices(std::span<const double> t, SpMat& Q, SpMat& R) {
    const int n = static_cast<int>(t.size());
    Triplets q, r;
    for (int j = 0; j < n - 2; ++j) {
        const int i = j + 1;
        const double h0 = t[i] - t[i - 1];
        const double h1 = t[i + 1] - t[i];
        q.emplace_back(i - 1, j, 1.0 / h0);
        q.emplace_back(i, j, -1.0 / h0 - 1.0 / h1);
        q.emplace_back(i + 1, j, 1.0 / h1);
        r.emplace_back(j, j, (h0 + h1) / 3.0);
        if (j + 1 < n - 2) {
            r.emplace_back(j, j + 1, h1 / 6.0);
            r.emplace_back(j + 1, j, h1 / 6.0);
        }
    }
    Q.resize(n, n - 2);
    Q.setFromTriplets(q.begin(), q.end());
    R.resize(n - 2, n - 2);
    R.setFromTriplets(r.begin(), r.end());
}

/// Smoother for one knot set; the sparsity pattern is analysed once.
class Smoother {
public:
    Smoother(std::span<const double> t, std::span<const double> y)
        : y_(Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()))) {
        difference_matrices(t, Q_, R_);
        QtQ_ = SpMat(Q_.transpose() * Q_);
        Qty_ = Q_.transpose() * y_;
        const SpMat pattern = R_ + QtQ_;
        solver_.analyzePattern(pattern);
    }

    Eigen::VectorXd values(double lambda) {
        if (lambda == 0.0) return y_;
        const SpMat A = R_ + lambda * QtQ_;
        solver_.factorize(A);
        if (solver_.info() != Eigen::Success) throw SolverFailure("smoothing spline: factorisation failed");
        const Eigen::VectorXd gamma = solver_.solve(Qty_);
        return y_ - lambda * (Q_ * gamma);
    }

    double rss(double lambda) { return (values(lambda) - y_).squaredNorm(); }

private:
    Eigen::VectorXd y_;
    SpMat Q_, R_, QtQ_;
    Eigen::VectorXd Qty_;
    Eigen::SimplicialLDLT<SpMat> solver_;
};

} // namespace

CubicSpline::CubicSpline(std::vector<double> t, std::vector<double> values,
                         std::vector<double> second)
    : t_(std::move(t)), g_(std::move(values)), m_(std::move(second)) {
    if (t_.size() < 2 || g_.size() != t_.size() || m_.size() != t_.size())
        throw InvalidInput("CubicSpline: inconsistent knot arrays");
}

std::size_t CubicSpline::segment(double t) const {
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    return std::min(i, t_.size() - 2);
}

double CubicSpline::value(double t) const {
    const std::size_t i = segment(t);
    const double h = t_[i + 1] - t_[i];
    const double a = (t_[i + 1] - t) / h;
    const double b = (t - t_[i]) / h;
    return a * g_[i] + b * g_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double t) const {
    const std::size_t i = segment(t);
    const double h = t_[i + 1] - t_[i];
    const double a = (t_[i + 1] - t) / h;
    const double b = (t - t_[i]) / h;
    return (g_[i + 1] - g_[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m_[i] +
           (3.0 * b * b - 1.0) / 6.0 * h * m_[i + 1];
}

double CubicSpline::second_derivative(double t) const {
    const std::size_t i = segment(t);
    const double h = t_[i + 1] - t_[i];
    const double a = (t_[i + 1] - t) / h;
    const double b = (t - t_[i]) / h;
    return a * m_[i] + b * m_[i + 1];
}

double estimate_noise_sigma(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size()) throw InvalidInput("estimate_noise_sigma: size mismatch");
    const std::size_t n = t.size();
    if (n < 5) return 0.0;
    std::vector<double> r;
    r.reserve(n - 4);
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const double nodes[4] = {t[i - 2], t[i - 1], t[i + 1], t[i + 2]};
        const double vals[4] = {y[i - 2], y[i - 1], y[i + 1], y[i + 2]};
        double pred = 0.0, wsq = 0.0;
        for (int a = 0; a < 4; ++a) {
            double w = 1.0;
            for (int b = 0; b < 4; ++b)
                if (b != a) w *= (t[i] - nodes[b]) / (nodes[a] - nodes[b]);
            pred += w * vals[a];
            wsq += w * w;
        }
        r.push_back(std::abs(y[i] - pred) / std::sqrt(1.0 + wsq));
    }
    const auto mid = r.begin() + static_cast<std::ptrdiff_t>(r.size() / 2);
    std::nth_element(r.begin(), mid, r.end());
    return *mid / 0.6744897501960817; // MAD of a unit normal
}

CubicSpline interpolating_spline(std::span<const double> t, std::span<const double> y) {
    check_samples(t, y.size());
    const int n = static_cast<int>(t.size());
    std::vector<double> h(n - 1);
    for (int i = 0; i + 1 < n; ++i) h[i] = t[i + 1] - t[i];

    Triplets trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    // Not-a-knot: third derivative continuous across the second and
    // second-to-last knots.
    trip.emplace_back(0, 0, -h[1]);
    trip.emplace_back(0, 1, h[0] + h[1]);
    trip.emplace_back(0, 2, -h[0]);
    for (int i = 1; i + 1 < n; ++i) {
        trip.emplace_back(i, i - 1, h[i - 1] / 6.0);
        trip.emplace_back(i, i, (h[i - 1] + h[i]) / 3.0);
        trip.emplace_back(i, i + 1, h[i] / 6.0);
        rhs[i] = (y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1];
    }
    trip.emplace_back(n - 1, n - 3, -h[n - 2]);
    trip.emplace_back(n - 1, n - 2, h[n - 3] + h[n - 2]);
    trip.emplace_back(n - 1, n - 1, -h[n - 3]);
    SpMat A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<SpMat> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SolverFailure("interpolating spline: singular system");
    const Eigen::VectorXd m = lu.solve(rhs);
    return CubicSpline(std::vector<double>(t.begin(), t.end()), std::vector<double>(y.begin(), y.end()),
                       std::vector<double>(m.data(), m.data() + n));
}

std::vector<double> smooth_values(std::span<const double> t, std::span<const double> y,
                                  double lambda) {
    check_samples(t, y.size());
    if (!(lambda >= 0.0)) throw InvalidInput("smooth_values: negative smoothing weight");
    Smoother s(t, y);
    const Eigen::VectorXd g = s.values(lambda);
    return {g.data(), g.data() + g.size()};
}

CubicSpline fit_spline(std::span<const double> t, std::span<const double> y,
                       const SplineOptions& options) {
    check_samples(t, y.size());
    for (double v : y)
        if (!std::isfinite(v)) throw InvalidInput("spline: non-finite sample");
    const std::size_t n = t.size();

    double lambda = 0.0;
    if (options.smoothing) {
        lambda = *options.smoothing;
        if (!(lambda >= 0.0)) throw InvalidInput("spline: negative smoothing weight");
    } else {
        const double sigma = estimate_noise_sigma(t, y);
        double scale = 1.0;
        for (double v : y) scale = std::max(scale, std::abs(v));
        if (sigma > 1e-12 * scale && n > 4) {
            // Discrepancy principle: residual sum of squares equal to n sigma^2.
            Smoother s(t, y);
            const double target = static_cast<double>(n) * sigma * sigma;
            const double h = (t.back() - t.front()) / static_cast<double>(n - 1);
            double lo = h * h * h, hi = lo;
            double rss_lo = s.rss(lo);
            while (rss_lo > target && lo > 1e-30 * h * h * h) {
                lo *= 1e-3;
                rss_lo = s.rss(lo);
            }
            double rss_hi = s.rss(hi);
            while (rss_hi < target && hi < 1e30 * h * h * h) {
                hi *= 1e3;
                rss_hi = s.rss(hi);
            }
            if (rss_lo > target) lambda = lo;
            else if (rss_hi < target) lambda = hi;
            else {
                for (int it = 0; it < 50 && hi / lo > 1.0 + 1e-6; ++it) {
                    const double mid = std::sqrt(lo * hi);
                    (s.rss(mid) < target ? lo : hi) = mid;
                }
                lambda = std::sqrt(lo * hi);
            }
        }
    }
    if (lambda == 0.0) return interpolating_spline(t, y);
    const std::vector<double> g = smooth_values(t, y, lambda);
    return interpolating_spline(t, g);
}

VectorSpline::VectorSpline(std::span<const double> t, std::span<const Vec3> values,
                           const SplineOptions& options) {
    std::vector<double> ch(values.size());
    for (int k = 0; k < 3; ++k) {
        for (std::size_t i = 0; i < values.size(); ++i) ch[i] = values[i][k];
        c_[k] = fit_spline(t, ch, options);
    }
}

Vec3 VectorSpline::value(double t) const {
    return {c_[0].value(t), c_[1].value(t), c_[2].value(t)};
}
Vec3 VectorSpline::derivative(double t) const {
    return {c_[0].derivative(t), c_[1].derivative(t), c_[2].derivative(t)};
}
Vec3 VectorSpline::second_derivative(double t) const {
    return {c_[0].second_derivative(t), c_[1].second_derivative(t), c_[2].second_derivative(t)};
}

Mat3 so3_right_jacobian(const Vec3& phi) {
    const double th2 = phi.squaredNorm();
    Mat3 K;
    K << 0.0, -phi.z(), phi.y(), phi.z(), 0.0, -phi.x(), -phi.y(), phi.x(), 0.0;
    double c1, c2;
    if (th2 < 1e-8) {
        c1 = 0.5 - th2 / 24.0;
        c2 = 1.0 / 6.0 - th2 / 120.0;
    } else {
        const double th = std::sqrt(th2);
        c1 = (1.0 - std::cos(th)) / th2;
        c2 = (th - std::sin(th)) / (th2 * th);
    }
    return Mat3::Identity() - c1 * K + c2 * K * K;
}

AttitudeSpline::AttitudeSpline(std::span<const double> t, std::span<const Quat> q,
                               const SplineOptions& options, int block, int overlap) {
    check_samples(t, q.size());
    if (block < 2 || overlap < 0) throw InvalidInput("AttitudeSpline: bad block layout");
    const int n = static_cast<int>(t.size());
    // Consistent hemisphere so neighbouring samples are close in R^4.
    std::vector<Quat> qs(q.begin(), q.end());
    for (int i = 0; i < n; ++i) {
        if (!qs[i].coeffs().allFinite() || std::abs(qs[i].norm() - 1.0) > 1e-6)
            throw InvalidInput("AttitudeSpline: quaternion samples must be unit length");
        qs[i].normalize();
        if (i > 0 && qs[i].dot(qs[i - 1]) < 0.0) qs[i].coeffs() *= -1.0;
    }
    t_min_ = t.front();
    t_max_ = t.back();
    for (int start = 0; start < n - 1; start += block) {
        const bool last = n - 1 - (start + block) < block / 2;
        int lo = std::max(0, start - overlap);
        int hi = last ? n - 1 : std::min(n - 1, start + block + overlap);
        while (hi - lo + 1 < 4) {
            if (hi < n - 1) ++hi;
            else --lo;
        }
        const Quat ref = qs[start];
        std::vector<double> tt;
        std::vector<Vec3> phi;
        for (int i = lo; i <= hi; ++i) {
            tt.push_back(t[i]);
            phi.push_back(quat_log(ref.conjugate() * qs[i]));
        }
        pieces_.push_back({t[start], ref, VectorSpline(tt, phi, options)});
        if (last) break;
    }
}

const AttitudeSpline::Piece& AttitudeSpline::piece(double t) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                               [](double x, const Piece& p) { return x < p.t_begin; });
    if (it == pieces_.begin()) return pieces_.front();
    return *(it - 1);
}

Quat AttitudeSpline::attitude(double t) const {
    const Piece& p = piece(t);
    return (p.reference * quat_exp(p.phi.value(t))).normalized();
}

Vec3 AttitudeSpline::body_rate(double t) const {
    const Piece& p = piece(t);
    return so3_right_jacobian(p.phi.value(t)) * p.phi.derivative(t);
}

Vec3 AttitudeSpline::body_acceleration(double t) const {
    const Piece& p = piece(t);
    const Vec3 phi = p.phi.value(t);
    const Vec3 dphi = p.phi.derivative(t);
    const Vec3 ddphi = p.phi.second_derivative(t);
    // d/dt J_r(phi(t)) by a central difference along dphi.
    const double eps = 1e-6;
    const Mat3 dJ = (so3_right_jacobian(phi + eps * dphi) - so3_right_jacobian(phi - eps * dphi)) /
                    (2.0 * eps);
    return so3_right_jacobian(phi) * ddphi + dJ * dphi;
}

} // namespace rotorsim
