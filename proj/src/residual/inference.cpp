#include "rotorsim/residual/inference.hpp"

#include "rotorsim/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace rotorsim {

FeatureRow make_features(const QuadrotorState& state, const RotorSpeeds& speeds) {
    const Vec3 v_B = state.q_WB.conjugate() * state.v_WB;
    return {v_B.x(),           v_B.y(),           v_B.z(),   state.omega_B.x(),
            state.omega_B.y(), state.omega_B.z(), speeds[0], speeds[1],
            speeds[2],         speeds[3]};
}

HistoryBuffer::HistoryBuffer(int capacity) {
    if (capacity <= 0) throw InvalidInput("HistoryBuffer: capacity must be positive");
    rows_.resize(capacity);
}

void HistoryBuffer::push(const FeatureRow& row) {
    rows_[head_] = row;
    head_ = (head_ + 1) % capacity();
    size_ = std::min(size_ + 1, capacity());
}

void HistoryBuffer::clear() {
    head_ = 0;
    size_ = 0;
}

const FeatureRow& HistoryBuffer::row(int k) const {
    if (k < 0 || k >= size_) throw InvalidInput("HistoryBuffer: row index out of range");
    const int oldest = (head_ - size_ + capacity()) % capacity();
    return rows_[(oldest + k) % capacity()];
}

HistoryDecimator::HistoryDecimator(double period, double sample_dt)
    : period_(period), half_dt_(0.5 * sample_dt) {
    if (!(period > 0.0) || !(sample_dt > 0.0))
        throw InvalidInput("HistoryDecimator: period and sample_dt must be positive");
}

bool HistoryDecimator::accept(double t) {
    if (!started_) {
        started_ = true;
        next_ = t + period_;
        return true;
    }
    // Sample nearest to the target; ties go to the earlier sample.
    if (t >= next_ - half_dt_ - 1e-12) {
        do next_ += period_;
        while (t >= next_ - half_dt_ - 1e-12);
        return true;
    }
    return false;
}

void HistoryDecimator::reset() {
    started_ = false;
    next_ = 0.0;
}

void InferenceWorkspace::reserve(const ResidualNetBundle& bundle) {
    std::size_t n = static_cast<std::size_t>(bundle.input_features) * bundle.history_length;
    for (const auto& l : bundle.layers) {
        const std::size_t m = l.kind == LayerKind::CausalConv1d
                                  ? static_cast<std::size_t>(l.out) * bundle.history_length
                                  : static_cast<std::size_t>(l.out);
        n = std::max(n, m);
    }
    if (a_.size() < n) a_.resize(n);
    if (b_.size() < n) b_.resize(n);
}

Wrench predict_residual(const ResidualNetBundle& bundle, const HistoryBuffer& history,
                        InferenceWorkspace& ws) {
    const int T = bundle.history_length;
    const int F = bundle.input_features;
    if (bundle.outputs != kResidualOutputs || F != kInputFeatures)
        throw BundleInvalid("predict_residual: bundle must map 10 features to 6 outputs");
    if (history.capacity() != T)
        throw BundleInvalid("predict_residual: history length " +
                            std::to_string(history.capacity()) + " does not match bundle (" +
                            std::to_string(T) + ")");
    if (!history.full())
        throw NotReady("predict_residual: history holds " + std::to_string(history.size()) +
                       " of " + std::to_string(T) + " rows");
    ws.reserve(bundle);

    double* cur = ws.a_.data();
    double* nxt = ws.b_.data();
    for (int t = 0; t < T; ++t) {
        const FeatureRow& r = history.row(t);
        for (int c = 0; c < F; ++c)
            cur[c * T + t] = (r[c] - bundle.input_mean[c]) / static_cast<double>(bundle.input_std[c]);
    }
    const double slope = bundle.leaky_relu_slope;
    int channels = F;
    int width = F * T;
    for (const Layer& l : bundle.layers) {
        if (l.weight.size() != l.weight_count() || l.bias.size() != static_cast<std::size_t>(l.out))
            throw BundleInvalid("predict_residual: weight/bias array size mismatch");
        int produced = 0;
        if (l.kind == LayerKind::CausalConv1d) {
            if (l.in != channels || width != channels * T)
                throw BundleInvalid("predict_residual: channel mismatch");
            const int K = l.kernel;
            for (int o = 0; o < l.out; ++o) {
                double* y = nxt + o * T;
                std::fill(y, y + T, static_cast<double>(l.bias[o]));
                for (int i = 0; i < l.in; ++i) {
                    const double* x = cur + i * T;
                    const float* w = l.weight.data() + (static_cast<std::size_t>(o) * l.in + i) * K;
                    for (int k = 0; k < K; ++k) {
                        const int shift = (K - 1 - k) * l.dilation;
                        const double wk = w[k];
                        for (int t = shift; t < T; ++t) y[t] += wk * x[t - shift];
                    }
                }
            }
            channels = l.out;
            produced = l.out * T;
        } else {
            if (l.in != width || l.groups < 1 || l.in % l.groups || l.out % l.groups)
                throw BundleInvalid("predict_residual: dense layer expects " + std::to_string(l.in) +
                                    " inputs, previous layer gives " + std::to_string(width));
            const int gin = l.in / l.groups;
            const int gout = l.out / l.groups;
            for (int g = 0; g < l.groups; ++g) {
                const double* x = cur + g * gin;
                for (int o = g * gout; o < (g + 1) * gout; ++o) {
                    const float* w = l.weight.data() + static_cast<std::size_t>(o) * gin;
                    double acc = l.bias[o];
                    for (int i = 0; i < gin; ++i) acc += w[i] * x[i];
                    nxt[o] = acc;
                }
            }
            produced = l.out;
        }
        width = produced;
        if (l.activation)
            for (int i = 0; i < produced; ++i)
                if (nxt[i] < 0.0) nxt[i] *= slope;
        std::swap(cur, nxt);
    }

    if (width != kResidualOutputs) throw BundleInvalid("predict_residual: network does not end in 6 outputs");
    Wrench w;
    for (int k = 0; k < 3; ++k) {
        w.f[k] = cur[k] * bundle.output_std[k] + bundle.output_mean[k];
        w.tau[k] = cur[3 + k] * bundle.output_std[3 + k] + bundle.output_mean[3 + k];
    }
    return w;
}

Wrench predict_residual(const ResidualNetBundle& bundle, const HistoryBuffer& history) {
    InferenceWorkspace ws(bundle);
    return predict_residual(bundle, history, ws);
}

ResidualEstimator::ResidualEstimator(std::shared_ptr<const ResidualNetBundle> bundle,
                                     double sample_dt)
    : bundle_(std::move(bundle)),
      history_(bundle_ ? bundle_->history_length : kHistoryLength),
      decimator_(2.5e-3, sample_dt) {
    if (!bundle_) throw InvalidInput("ResidualEstimator: null bundle");
    bundle_->validate();
    workspace_.reserve(*bundle_);
}

const Wrench& ResidualEstimator::update(double t, const QuadrotorState& state,
                                        const RotorSpeeds& speeds) {
    if (decimator_.accept(t)) {
        history_.push(make_features(state, speeds));
        if (history_.full()) current_ = predict_residual(*bundle_, history_, workspace_);
    }
    return current_;
}

void ResidualEstimator::reset() {
    history_.clear();
    decimator_.reset();
    current_ = Wrench{};
}

} // namespace rotorsim
