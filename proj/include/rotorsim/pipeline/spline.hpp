#pragma once

#include "rotorsim/core/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace rotorsim {

/// Piecewise cubic stored as knot values and second derivatives. Evaluation
/// outside the knot range extends the end pieces.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> t, std::vector<double> values, std::vector<double> second);

    double value(double t) const;
    double derivative(double t) const;
    double second_derivative(double t) const;

    double t_min() const { return t_.front(); }
    double t_max() const { return t_.back(); }
    const std::vector<double>& knots() const { return t_; }
    const std::vector<double>& knot_values() const { return g_; }

private:
    std::size_t segment(double t) const;

    std::vector<double> t_;
    std::vector<double> g_;
    std::vector<double> m_;
};

struct SplineOptions {
    /// Roughness weight. Unset: picked per channel so that the residual sum of
    /// squares matches the estimated noise level. Zero: interpolation.
    std::optional<double> smoothing;
};

/// Robust noise standard deviation of a sampled signal. Each sample is compared
/// against the cubic through its two neighbours on either side, so polynomials
/// up to degree three give exactly zero.
double estimate_noise_sigma(std::span<const double> t, std::span<const double> y);

/// Not-a-knot interpolating cubic; reproduces cubics exactly. Needs >= 4 points.
CubicSpline interpolating_spline(std::span<const double> t, std::span<const double> y);

/// Smoothing spline values at the knots: argmin sum (y - g)^2 + lambda int g''^2.
std::vector<double> smooth_values(std::span<const double> t, std::span<const double> y,
                                  double lambda);

/// Smoothing followed by not-a-knot interpolation of the smoothed values.
/// Throws InvalidInput for fewer than 4 points or non-increasing time.
CubicSpline fit_spline(std::span<const double> t, std::span<const double> y,
                       const SplineOptions& options = {});

/// Three independent channels.
class VectorSpline {
public:
    VectorSpline() = default;
    VectorSpline(std::span<const double> t, std::span<const Vec3> values,
                 const SplineOptions& options = {});

    Vec3 value(double t) const;
    Vec3 derivative(double t) const;
    Vec3 second_derivative(double t) const;
    double t_min() const { return c_[0].t_min(); }
    double t_max() const { return c_[0].t_max(); }

private:
    std::array<CubicSpline, 3> c_;
};

/// Right Jacobian of SO(3) for the rotation vector phi.
Mat3 so3_right_jacobian(const Vec3& phi);

/// Attitude trajectory splined in local tangent coordinates around reference
/// attitudes placed every `block` samples, with `overlap` extra samples on
/// each side of a block. Body rates follow from the right Jacobian.
class AttitudeSpline {
public:
    AttitudeSpline() = default;
    AttitudeSpline(std::span<const double> t, std::span<const Quat> q,
                   const SplineOptions& options = {}, int block = 40, int overlap = 20);

    Quat attitude(double t) const;
    Vec3 body_rate(double t) const;
    Vec3 body_acceleration(double t) const;
    double t_min() const { return t_min_; }
    double t_max() const { return t_max_; }

private:
    struct Piece {
        double t_begin;
        Quat reference;
        VectorSpline phi;
    };
    const Piece& piece(double t) const;

    std::vector<Piece> pieces_;
    double t_min_ = 0.0;
    double t_max_ = 0.0;
};

} // namespace rotorsim
