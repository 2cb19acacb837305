#pragma once

// Physics residuals, data misfit and the composite training objective.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinnlab/autodiff.hpp"
#include "pinnlab/circuit.hpp"
#include "pinnlab/dataset.hpp"

namespace pinnlab {

enum class PhysicsVariant {
    single_eq2,            // v_in - v_out - rho1 mu1 v_out'
    two_system_eq4,        // KCL at both nodes, residuals in amps
    two_first_order_eq5,   // v_in - v_1 - rho1 mu1 v_1' - rho1 mu2 v_out'
    two_second_order_eq6,  // second-order ODE in v_out only
};

[[nodiscard]] std::string to_string(PhysicsVariant v);
[[nodiscard]] PhysicsVariant parse_variant(const std::string& name);

/// Network outputs the variant needs: 1 (v_out) or 2 (v_1, v_out).
[[nodiscard]] int variant_outputs(PhysicsVariant v);
/// Number of stages in the circuit the variant describes.
[[nodiscard]] std::size_t variant_stages(PhysicsVariant v);

/// Trainable stand-ins for the circuit constants: mu_i ~ C_i, rho_i ~ R_i.
struct EqParams {
    std::vector<double> mu;   // farads
    std::vector<double> rho;  // ohms
    std::vector<bool> mu_frozen;
    std::vector<bool> rho_frozen;

    /// Unfrozen parameters initialised to the given values.
    [[nodiscard]] static EqParams initial(std::size_t stages, double mu_init, double rho_init);
    /// Every entry frozen at the true circuit values.
    [[nodiscard]] static EqParams truth(const CircuitSpec& circuit);

    [[nodiscard]] std::size_t stages() const noexcept { return mu.size(); }
    [[nodiscard]] bool all_frozen() const;

    friend bool operator==(const EqParams&, const EqParams&) = default;
};

/// Fixes the named entries ("mu1", "rho2", ...) at the given values.
/// Unknown names throw ConfigError.
[[nodiscard]] EqParams freeze(const EqParams& params, const std::map<std::string, double>& values);

/// EqParams placed on a tape: frozen entries are constants, the rest leaves.
/// With log_space the leaves hold log(value) and the entry is exp(leaf).
struct EqNodes {
    std::vector<ad::NodeRef> mu;
    std::vector<ad::NodeRef> rho;
    std::vector<ad::NodeRef> mu_leaf;   // trainable leaf per unfrozen mu
    std::vector<ad::NodeRef> rho_leaf;  // trainable leaf per unfrozen rho
    std::vector<bool> mu_frozen;
    std::vector<bool> rho_frozen;
};

[[nodiscard]] EqNodes bind(ad::Tape& tape, const EqParams& params, bool log_space = false);

/// Coefficient nodes of one variant, built once per tape and shared by
/// every collocation point.
class ResidualModel {
public:
    ResidualModel(ad::Tape& tape, PhysicsVariant variant, const EqNodes& params);

    [[nodiscard]] PhysicsVariant variant() const noexcept { return variant_; }

    /// Residual nodes at one time point. `outputs` holds v_out for
    /// one-output variants and (v_1, v_out) for two-output variants.
    [[nodiscard]] std::vector<ad::NodeRef> residuals(std::span<const ad::Taylor2> outputs, double v_in) const;

private:
    ad::Tape* tape_;
    PhysicsVariant variant_;
    ad::NodeRef rho1_mu1_{};
    ad::NodeRef rho1_mu2_{};
    ad::NodeRef rho2_mu2_{};
    ad::NodeRef second_order_{};  // rho1 mu1 rho2 mu2
    ad::NodeRef first_order_{};   // rho2 mu2 + rho1 (mu1 + mu2)
    ad::NodeRef mu1_{};
    ad::NodeRef mu2_{};
    ad::NodeRef rho1_{};
    ad::NodeRef rho2_{};
};

/// One-shot form of ResidualModel::residuals.
[[nodiscard]] std::vector<ad::NodeRef> physics_residuals(PhysicsVariant variant, ad::Tape& tape,
                                                         std::span<const ad::Taylor2> outputs, double v_in,
                                                         const EqNodes& params);

/// Mean of squares. Throws ConfigError on an empty list.
[[nodiscard]] ad::NodeRef mse_over(ad::Tape& tape, std::span<const ad::NodeRef> nodes);

/// Pooled mean squared error of predictions against rows. predictions[i]
/// holds the network outputs at rows[i].t. Two-output networks compare
/// (v_1, v_out) when fit_v1 is set, v_out only otherwise.
[[nodiscard]] ad::NodeRef data_mse(ad::Tape& tape, std::span<const std::vector<ad::NodeRef>> predictions,
                                   std::span<const DataRow> rows, bool fit_v1 = true);

enum class SwishDirection {
    literal,  // sum x sigmoid(x)
    negated,  // sum (-x) sigmoid(-x)
};

[[nodiscard]] std::string to_string(SwishDirection d);
[[nodiscard]] SwishDirection parse_swish(const std::string& name);

/// Swish over every unfrozen mu and rho. Zero node when all are frozen.
[[nodiscard]] ad::NodeRef swish_penalty(ad::Tape& tape, const EqNodes& params, SwishDirection direction);

struct LossConfig {
    double lambda = 0.5;
    SwishDirection swish_direction = SwishDirection::literal;

    void validate() const;
};

/// (1 - lambda) mse_data + lambda mse_phys + penalty.
[[nodiscard]] ad::NodeRef total_loss(ad::Tape& tape, const LossConfig& config, ad::NodeRef mse_data,
                                     ad::NodeRef mse_phys, ad::NodeRef penalty);

struct LossBreakdown {
    double mse_data = 0.0;
    double mse_phys = 0.0;
    double penalty = 0.0;
    double total = 0.0;
    // Per-equation means; only the first entry is used by one-residual variants.
    std::vector<double> mse_phys_per_equation;
};

}  // namespace pinnlab
