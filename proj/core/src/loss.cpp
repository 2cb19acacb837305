#include "pinnlab/loss.hpp"

#include <cmath>

#include "pinnlab/errors.hpp"

namespace pinnlab {

std::string to_string(PhysicsVariant v) {
    switch (v) {
        case PhysicsVariant::single_eq2: return "single_eq2";
        case PhysicsVariant::two_system_eq4: return "two_system_eq4";
        case PhysicsVariant::two_first_order_eq5: return "two_first_order_eq5";
        case PhysicsVariant::two_second_order_eq6: return "two_second_order_eq6";
    }
    return "unknown";
}

PhysicsVariant parse_variant(const std::string& name) {
    if (name == "single_eq2" || name == "eq2") return PhysicsVariant::single_eq2;
    if (name == "two_system_eq4" || name == "eq4") return PhysicsVariant::two_system_eq4;
    if (name == "two_first_order_eq5" || name == "eq5") return PhysicsVariant::two_first_order_eq5;
    if (name == "two_second_order_eq6" || name == "eq6") return PhysicsVariant::two_second_order_eq6;
    throw ConfigError("unknown physics variant '" + name + "'");
}

int variant_outputs(PhysicsVariant v) {
    return v == PhysicsVariant::two_system_eq4 || v == PhysicsVariant::two_first_order_eq5 ? 2 : 1;
}

std::size_t variant_stages(PhysicsVariant v) {
    return v == PhysicsVariant::single_eq2 ? 1 : 2;
}

EqParams EqParams::initial(std::size_t stages, double mu_init, double rho_init) {
    if (!std::isfinite(mu_init) || !std::isfinite(rho_init)) {
        throw ConfigError("mu_init and rho_init must be finite");
    }
    EqParams p;
    p.mu.assign(stages, mu_init);
    p.rho.assign(stages, rho_init);
    p.mu_frozen.assign(stages, false);
    p.rho_frozen.assign(stages, false);
    return p;
}

EqParams EqParams::truth(const CircuitSpec& circuit) {
    const LadderSpec ladder = to_ladder(circuit);
    EqParams p;
    for (const auto& s : ladder.stages) {
        p.mu.push_back(s.C);
        p.rho.push_back(s.R);
    }
    p.mu_frozen.assign(ladder.order(), true);
    p.rho_frozen.assign(ladder.order(), true);
    return p;
}

bool EqParams::all_frozen() const {
    for (std::size_t i = 0; i < stages(); ++i) {
        if (!mu_frozen[i] || !rho_frozen[i]) {
            return false;
        }
    }
    return true;
}

EqParams freeze(const EqParams& params, const std::map<std::string, double>& values) {
    EqParams out = params;
    for (const auto& [name, value] : values) {
        const bool is_mu = name.rfind("mu", 0) == 0;
        const bool is_rho = name.rfind("rho", 0) == 0;
        const std::string digits = is_mu || is_rho ? name.substr(is_mu ? 2 : 3) : std::string();
        std::size_t index = 0;
        bool ok = !digits.empty() && digits.size() <= 3 && digits.find_first_not_of("0123456789") == std::string::npos;
        if (ok) {
            index = std::stoul(digits);
            ok = index >= 1 && index <= params.stages();
        }
        if (!ok) {
            throw ConfigError("cannot freeze '" + name + "': expected mu1.." + "mu" +
                              std::to_string(params.stages()) + " or rho1..rho" + std::to_string(params.stages()));
        }
        if (!std::isfinite(value)) {
            throw ConfigError("frozen value for '" + name + "' must be finite");
        }
        if (is_mu) {
            out.mu[index - 1] = value;
            out.mu_frozen[index - 1] = true;
        } else {
            out.rho[index - 1] = value;
            out.rho_frozen[index - 1] = true;
        }
    }
    return out;
}

EqNodes bind(ad::Tape& tape, const EqParams& params, bool log_space) {
    EqNodes nodes;
    nodes.mu_frozen = params.mu_frozen;
    nodes.rho_frozen = params.rho_frozen;
    auto place = [&](double value, bool frozen, std::vector<ad::NodeRef>& actual, std::vector<ad::NodeRef>& leaves) {
        if (frozen) {
            actual.push_back(tape.constant(value));
            return;
        }
        if (log_space) {
            if (!(value > 0.0)) {
                throw ConfigError("log-space parameters need positive values");
            }
            const ad::NodeRef leaf = tape.leaf(std::log(value));
            leaves.push_back(leaf);
            actual.push_back(tape.exp(leaf));
        } else {
            const ad::NodeRef leaf = tape.leaf(value);
            leaves.push_back(leaf);
            actual.push_back(leaf);
        }
    };
    for (std::size_t i = 0; i < params.stages(); ++i) {
        place(params.mu[i], params.mu_frozen[i], nodes.mu, nodes.mu_leaf);
    }
    for (std::size_t i = 0; i < params.stages(); ++i) {
        place(params.rho[i], params.rho_frozen[i], nodes.rho, nodes.rho_leaf);
    }
    return nodes;
}

ResidualModel::ResidualModel(ad::Tape& tape, PhysicsVariant variant, const EqNodes& params)
    : tape_(&tape), variant_(variant) {
    const std::size_t stages = variant_stages(variant);
    if (params.mu.size() != stages || params.rho.size() != stages) {
        throw ConfigError(to_string(variant) + " needs " + std::to_string(stages) + " mu and rho entries");
    }
    switch (variant) {
        case PhysicsVariant::single_eq2:
            rho1_mu1_ = tape.mul(params.rho[0], params.mu[0]);
            break;
        case PhysicsVariant::two_system_eq4:
            mu1_ = params.mu[0];
            mu2_ = params.mu[1];
            rho1_ = params.rho[0];
            rho2_ = params.rho[1];
            break;
        case PhysicsVariant::two_first_order_eq5:
            rho1_mu1_ = tape.mul(params.rho[0], params.mu[0]);
            rho1_mu2_ = tape.mul(params.rho[0], params.mu[1]);
            break;
        case PhysicsVariant::two_second_order_eq6:
            rho1_mu1_ = tape.mul(params.rho[0], params.mu[0]);
            rho2_mu2_ = tape.mul(params.rho[1], params.mu[1]);
            second_order_ = tape.mul(rho1_mu1_, rho2_mu2_);
            first_order_ = tape.add(rho2_mu2_, tape.mul(params.rho[0], tape.add(params.mu[0], params.mu[1])));
            break;
    }
}

std::vector<ad::NodeRef> ResidualModel::residuals(std::span<const ad::Taylor2> outputs, double v_in) const {
    ad::Tape& t = *tape_;
    const auto expected = static_cast<std::size_t>(variant_outputs(variant_));
    if (outputs.size() != expected) {
        throw ConfigError(to_string(variant_) + " expects " + std::to_string(expected) + " network outputs, got " +
                          std::to_string(outputs.size()));
    }
    const ad::NodeRef vin = t.constant(v_in);
    switch (variant_) {
        case PhysicsVariant::single_eq2: {
            const ad::Taylor2& v = outputs[0];
            return {t.sub(t.sub(vin, v.v0), t.mul(rho1_mu1_, v.v1))};
        }
        case PhysicsVariant::two_system_eq4: {
            const ad::Taylor2& v1 = outputs[0];
            const ad::Taylor2& vo = outputs[1];
            const ad::NodeRef i2 = t.div(t.sub(v1.v0, vo.v0), rho2_);
            const ad::NodeRef node1 = t.sub(t.sub(t.div(t.sub(vin, v1.v0), rho1_), t.mul(mu1_, v1.v1)), i2);
            const ad::NodeRef node2 = t.sub(i2, t.mul(mu2_, vo.v1));
            return {node1, node2};
        }
        case PhysicsVariant::two_first_order_eq5: {
            const ad::Taylor2& v1 = outputs[0];
            const ad::Taylor2& vo = outputs[1];
            const ad::NodeRef lhs = t.sub(t.sub(vin, v1.v0), t.mul(rho1_mu1_, v1.v1));
            return {t.sub(lhs, t.mul(rho1_mu2_, vo.v1))};
        }
        case PhysicsVariant::two_second_order_eq6: {
            const ad::Taylor2& v = outputs[0];
            const ad::NodeRef dyn = t.add(t.mul(second_order_, v.v2), t.mul(first_order_, v.v1));
            return {t.sub(t.add(dyn, v.v0), vin)};
        }
    }
    return {};
}

std::vector<ad::NodeRef> physics_residuals(PhysicsVariant variant, ad::Tape& tape, std::span<const ad::Taylor2> outputs,
                                           double v_in, const EqNodes& params) {
    return ResidualModel(tape, variant, params).residuals(outputs, v_in);
}

ad::NodeRef mse_over(ad::Tape& tape, std::span<const ad::NodeRef> nodes) {
    if (nodes.empty()) {
        throw ConfigError("mean squared error over an empty list");
    }
    std::vector<ad::NodeRef> squares;
    squares.reserve(nodes.size());
    for (const ad::NodeRef n : nodes) {
        squares.push_back(tape.square(n));
    }
    return tape.div(tape.sum(squares), tape.constant(static_cast<double>(nodes.size())));
}

ad::NodeRef data_mse(ad::Tape& tape, std::span<const std::vector<ad::NodeRef>> predictions,
                     std::span<const DataRow> rows, bool fit_v1) {
    if (predictions.size() != rows.size()) {
        throw ConfigError("data loss has " + std::to_string(predictions.size()) + " predictions for " +
                          std::to_string(rows.size()) + " rows");
    }
    std::vector<ad::NodeRef> errors;
    errors.reserve(rows.size() * 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& p = predictions[i];
        if (p.size() == 1) {
            errors.push_back(tape.sub(p[0], tape.constant(rows[i].v_out)));
        } else if (p.size() == 2) {
            if (fit_v1) {
                errors.push_back(tape.sub(p[0], tape.constant(rows[i].v_1)));
            }
            errors.push_back(tape.sub(p[1], tape.constant(rows[i].v_out)));
        } else {
            throw ConfigError("prediction rows must hold 1 or 2 outputs");
        }
    }
    return mse_over(tape, errors);
}

std::string to_string(SwishDirection d) {
    return d == SwishDirection::literal ? "literal" : "negated";
}

SwishDirection parse_swish(const std::string& name) {
    if (name == "literal") return SwishDirection::literal;
    if (name == "negated") return SwishDirection::negated;
    throw ConfigError("swish_direction must be 'literal' or 'negated', got '" + name + "'");
}

ad::NodeRef swish_penalty(ad::Tape& tape, const EqNodes& params, SwishDirection direction) {
    std::vector<ad::NodeRef> terms;
    auto add_terms = [&](const std::vector<ad::NodeRef>& values, const std::vector<bool>& frozen) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (frozen[i]) {
                continue;
            }
            const ad::NodeRef x = direction == SwishDirection::literal ? values[i] : tape.neg(values[i]);
            terms.push_back(tape.mul(x, tape.sigmoid(x)));
        }
    };
    add_terms(params.mu, params.mu_frozen);
    add_terms(params.rho, params.rho_frozen);
    if (terms.empty()) {
        return tape.constant(0.0);
    }
    return tape.sum(terms);
}

void LossConfig::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw ConfigError("lambda must lie in [0, 1], got " + std::to_string(lambda));
    }
}

ad::NodeRef total_loss(ad::Tape& tape, const LossConfig& config, ad::NodeRef mse_data, ad::NodeRef mse_phys,
                       ad::NodeRef penalty) {
    config.validate();
    const ad::NodeRef data_term = tape.mul(tape.constant(1.0 - config.lambda), mse_data);
    const ad::NodeRef phys_term = tape.mul(tape.constant(config.lambda), mse_phys);
    return tape.add(tape.add(data_term, phys_term), penalty);
}

}  // namespace pinnlab
