#pragma once

#include "rotorsim/core/types.hpp"
#include "rotorsim/residual/bundle.hpp"

#include <array>
#include <memory>
#include <vector>

namespace rotorsim {

using FeatureRow = std::array<double, kInputFeatures>;

/// (v_B, omega_B, rotor speeds) for one instant.
FeatureRow make_features(const QuadrotorState& state, const RotorSpeeds& speeds);

/// Fixed-capacity ring of feature rows, oldest first.
class HistoryBuffer {
public:
    explicit HistoryBuffer(int capacity = kHistoryLength);

    void push(const FeatureRow& row);
    void clear();

    int capacity() const { return static_cast<int>(rows_.size()); }
    int size() const { return size_; }
    bool full() const { return size_ == capacity(); }

    /// k = 0 is the oldest stored row.
    const FeatureRow& row(int k) const;

private:
    std::vector<FeatureRow> rows_;
    int head_ = 0; // next write position
    int size_ = 0;
};

/// Picks samples from a fast uniform stream so that the kept samples are the
/// ones nearest to a slower uniform grid (1 ms -> 2.5 ms gives strides 2, 3, 2, 3).
class HistoryDecimator {
public:
    HistoryDecimator(double period = 2.5e-3, double sample_dt = 1e-3);

    /// True when the sample at time t should be appended.
    bool accept(double t);
    void reset();

    double period() const { return period_; }

private:
    double period_;
    double half_dt_;
    double next_ = 0.0;
    bool started_ = false;
};

/// Scratch memory for predict_residual; sized once per bundle.
class InferenceWorkspace {
public:
    InferenceWorkspace() = default;
    explicit InferenceWorkspace(const ResidualNetBundle& bundle) { reserve(bundle); }
    void reserve(const ResidualNetBundle& bundle);

private:
    friend Wrench predict_residual(const ResidualNetBundle&, const HistoryBuffer&,
                                   InferenceWorkspace&);
    std::vector<double> a_;
    std::vector<double> b_;
};

/// Body-frame residual wrench from a full history. Throws NotReady when the
/// history is not full and BundleInvalid on shape mismatch.
Wrench predict_residual(const ResidualNetBundle& bundle, const HistoryBuffer& history,
                        InferenceWorkspace& workspace);
Wrench predict_residual(const ResidualNetBundle& bundle, const HistoryBuffer& history);

/// Per-simulation residual source: decimates the state stream into a history
/// and re-evaluates the network whenever a row is added. Returns zero until the
/// history is full.
class ResidualEstimator {
public:
    ResidualEstimator(std::shared_ptr<const ResidualNetBundle> bundle, double sample_dt = 1e-3);

    const Wrench& update(double t, const QuadrotorState& state, const RotorSpeeds& speeds);
    const Wrench& current() const { return current_; }
    void reset();

private:
    std::shared_ptr<const ResidualNetBundle> bundle_;
    HistoryBuffer history_;
    HistoryDecimator decimator_;
    InferenceWorkspace workspace_;
    Wrench current_;
};

} // namespace rotorsim
