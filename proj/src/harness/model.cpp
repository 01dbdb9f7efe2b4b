#include "rotorsim/harness/model.hpp"

#include "rotorsim/core/dynamics.hpp"
#include "rotorsim/core/errors.hpp"

#include <array>

namespace rotorsim {

ModelSelection ModelSelection::parse(const std::string& text) {
    ModelSelection m;
    std::string base = text;
    const auto plus = text.find('+');
    if (plus != std::string::npos) {
        if (text.substr(plus) != "+nn") throw InvalidInput("unknown model suffix in '" + text + "'");
        m.residual = true;
        base = text.substr(0, plus);
    }
    if (base == "none") m.rotor = RotorModelKind::None;
    else if (base == "fit") m.rotor = RotorModelKind::Fit;
    else if (base == "bem") m.rotor = RotorModelKind::Bem;
    else throw InvalidInput("unknown model '" + text + "' (none, fit, bem, optionally +nn)");
    return m;
}

std::string ModelSelection::name() const {
    std::string s = rotor == RotorModelKind::None ? "none" : rotor == RotorModelKind::Fit ? "fit" : "bem";
    return residual ? s + "+nn" : s;
}

const std::vector<ModelSelection>& all_model_selections() {
    static const std::vector<ModelSelection> all = {
        {RotorModelKind::None, false}, {RotorModelKind::Fit, false}, {RotorModelKind::Bem, false},
        {RotorModelKind::None, true},  {RotorModelKind::Fit, true},  {RotorModelKind::Bem, true}};
    return all;
}

std::shared_ptr<const ResidualNetBundle> zero_bundle() {
    static const auto b = std::make_shared<const ResidualNetBundle>(build_architecture("tcn-medium"));
    return b;
}

QuadraticCoeffs identify_quadratic_from_bem(const BemRotorModel& bem, const VehicleParams& params,
                                            double omega_lo, double omega_hi, int points,
                                            double* r_squared) {
    if (points < 2 || !(omega_hi > omega_lo) || !(omega_lo > 0.0))
        throw InvalidInput("identify_quadratic_from_bem: bad speed grid");
    std::vector<ThrustSample> samples;
    for (int i = 0; i < points; ++i) {
        RotorOperatingPoint op;
        op.omega = omega_lo + (omega_hi - omega_lo) * i / (points - 1);
        op.rho = params.rho;
        const auto out = bem.propeller_wrench(op, +1);
        samples.push_back({op.omega, -out.wrench_P.f.z(), out.integrals.Q});
    }
    const QuadraticCoeffs c = fit_quadratic(samples);
    if (r_squared) *r_squared = thrust_r_squared(samples, c);
    return c;
}

WrenchModel::WrenchModel(ModelSelection selection, const ModelResources& res, double sample_dt)
    : selection_(selection), vehicle_(res.vehicle), quadratic_(res.quadratic), bem_(res.bem) {
    vehicle_.validate();
    if (selection_.rotor == RotorModelKind::Bem && !bem_)
        throw InvalidInput("model '" + selection_.name() + "' needs a propeller geometry");
    if (selection_.rotor == RotorModelKind::Fit && !(quadratic_.c_lq > 0.0 && quadratic_.c_dq > 0.0))
        throw InvalidInput("model 'fit' needs positive quadratic coefficients");
    if (selection_.residual) residual_.emplace(res.bundle ? res.bundle : zero_bundle(), sample_dt);
}

Wrench WrenchModel::rotor_wrench(const QuadrotorState& state, const RotorSpeeds& speeds) const {
    std::array<RotorContribution, kNumRotors> parts;
    for (int i = 0; i < kNumRotors; ++i) {
        parts[i].position = vehicle_.rotor_positions[i];
        switch (selection_.rotor) {
        case RotorModelKind::None:
            break;
        case RotorModelKind::Fit:
            parts[i].wrench = quadratic_rotor_wrench(speeds[i], quadratic_, vehicle_.rotor_spin[i]);
            break;
        case RotorModelKind::Bem:
            parts[i].wrench = bem_->rotor_wrench(state, i, vehicle_, speeds[i]).wrench_B;
            break;
        }
    }
    return aggregate_wrench(parts);
}

Wrench WrenchModel::advance_residual(double t, const QuadrotorState& state, const RotorSpeeds& speeds) {
    if (!residual_) return {};
    return residual_->update(t, state, speeds);
}

void WrenchModel::reset() {
    if (residual_) residual_->reset();
}

} // namespace rotorsim
