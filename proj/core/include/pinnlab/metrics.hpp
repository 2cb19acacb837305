#pragma once

// Scoring of trained models: R^2, MSE breakdowns and pole MAPE.

#include <optional>
#include <span>
#include <vector>

#include "pinnlab/circuit.hpp"
#include "pinnlab/dataset.hpp"
#include "pinnlab/loss.hpp"

namespace pinnlab {

struct TrainReport;

/// 1 - SS_res / SS_tot. Throws ConfigError on length mismatch, empty input
/// or constant y_true.
[[nodiscard]] double r_squared(std::span<const double> y_true, std::span<const double> y_pred);

/// Poles implied by equation parameters: -1/(rho mu) for one stage, the
/// second-order characteristic roots for two. Throws NumericError when complex.
[[nodiscard]] std::vector<double> learned_poles(const EqParams& params);

/// Closed-form poles of a one- or two-stage circuit, eigenvalues otherwise.
[[nodiscard]] Poles true_poles(const CircuitSpec& circuit);

/// 100 |p_learned - p_true| / |p_true| per pole, both sorted descending.
[[nodiscard]] std::vector<double> mape_poles(const Poles& truth, const EqParams& learned);

struct Metrics {
    double mse_data = 0.0;
    double mse_phys = 0.0;
    double mse_val = 0.0;
    double r2_data = 0.0;
    double r2_val = 0.0;
    std::optional<std::vector<double>> mape_p;  // absent in forward mode
    bool params_positive = true;                // every learned mu, rho > 0
    bool poles_real = true;                     // false leaves mape_p absent

    friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct ScoreOptions {
    bool pooled_two_output = true;  // score (v_1, v_out) together, else v_out only
    int phys_grid_points = 1000;
};

/// Fills every Metrics field from a finished run.
[[nodiscard]] Metrics score(const TrainReport& report, const Dataset& dataset, const CircuitSpec& truth,
                            const ScoreOptions& options = {});

}  // namespace pinnlab
