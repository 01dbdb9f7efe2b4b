#pragma once

#include "rotorsim/core/types.hpp"
#include "rotorsim/core/vehicle.hpp"
#include "rotorsim/residual/bundle.hpp"
#include "rotorsim/residual/inference.hpp"
#include "rotorsim/rotor/bem.hpp"
#include "rotorsim/rotor/quadratic.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rotorsim {

enum class RotorModelKind { None, Fit, Bem };

/// One cell of the model matrix: rotor model and whether the residual net is added.
struct ModelSelection {
    RotorModelKind rotor = RotorModelKind::Bem;
    bool residual = false;

    /// "none", "fit", "bem", each optionally followed by "+nn".
    static ModelSelection parse(const std::string& text);
    std::string name() const;
    bool operator==(const ModelSelection&) const = default;
};

/// The six cells in a fixed order.
const std::vector<ModelSelection>& all_model_selections();

/// Immutable ingredients shared across runs.
struct ModelResources {
    VehicleParams vehicle = VehicleParams::defaults();
    QuadraticCoeffs quadratic;                       // used by "fit" and the controller
    std::shared_ptr<const BemRotorModel> bem;        // required for "bem"
    std::shared_ptr<const ResidualNetBundle> bundle; // required for "+nn"
};

/// Zero-weight tcn-medium bundle.
std::shared_ptr<const ResidualNetBundle> zero_bundle();

/// Quadratic coefficients fitted to the static BEM map over [omega_lo, omega_hi].
QuadraticCoeffs identify_quadratic_from_bem(const BemRotorModel& bem, const VehicleParams& params,
                                            double omega_lo = 800.0, double omega_hi = 2500.0,
                                            int points = 18, double* r_squared = nullptr);

/// Stateful total-wrench model for one run: rotor wrench from the selected
/// rotor model plus, optionally, the residual net fed by its own history.
class WrenchModel {
public:
    WrenchModel(ModelSelection selection, const ModelResources& resources, double sample_dt = 1e-3);

    /// Sum of the four rotor wrenches about the centre of mass.
    Wrench rotor_wrench(const QuadrotorState& state, const RotorSpeeds& speeds) const;

    /// Advances the residual history with the sample at time t; returns the
    /// current residual (zero without +nn or before the history fills).
    Wrench advance_residual(double t, const QuadrotorState& state, const RotorSpeeds& speeds);

    const ModelSelection& selection() const { return selection_; }
    void reset();

private:
    ModelSelection selection_;
    VehicleParams vehicle_;
    QuadraticCoeffs quadratic_;
    std::shared_ptr<const BemRotorModel> bem_;
    std::optional<ResidualEstimator> residual_;
};

} // namespace rotorsim
