#pragma once

// Fully connected tanh MLP mapping time to one or two voltages.
//
// Parameter layout is layer-major. Each layer stores its weight matrix
// row-major (one row of fan_in weights per output neuron) followed by its
// fan_out biases. Hidden layers apply tanh; the output layer is affine.

#include <cstdint>
#include <span>
#include <vector>

#include "pinnlab/autodiff.hpp"

namespace pinnlab {

struct MlpConfig {
    int hidden_layers = 4;
    int neurons_per_layer = 32;
    int outputs = 1;
    double input_scale = 1.0;  // 1/seconds
    std::uint64_t seed = 0;

    void validate() const;
};

struct ParamVector {
    std::vector<double> values;

    friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

/// Offsets of one layer inside a ParamVector.
struct LayerLayout {
    std::size_t fan_in;
    std::size_t fan_out;
    std::size_t weights;  // offset of W[0][0]
    std::size_t biases;   // offset of b[0]
};

[[nodiscard]] std::vector<LayerLayout> layer_layout(const MlpConfig& config);
[[nodiscard]] std::size_t param_count(const MlpConfig& config);

/// Glorot-uniform weights, zero biases; deterministic in config.seed.
[[nodiscard]] ParamVector init_params(const MlpConfig& config);

/// Network parameters registered on a tape. Parameter k is the tape node
/// first_param + k, so a neuron's weight row is a contiguous node run.
class BoundNetwork {
public:
    /// Registers every parameter as a trainable leaf.
    BoundNetwork(ad::Tape& tape, const ParamVector& params, const MlpConfig& config);

    [[nodiscard]] ad::NodeRef first_param() const noexcept { return first_; }
    [[nodiscard]] const MlpConfig& config() const noexcept { return config_; }

    /// Value and time derivatives of every output at time t.
    [[nodiscard]] std::vector<ad::Taylor2> forward_t2(ad::Tape& tape, double t) const;

    /// Output values only (no derivative channels) at time t.
    [[nodiscard]] std::vector<ad::NodeRef> forward(ad::Tape& tape, double t) const;

private:
    MlpConfig config_;
    std::vector<LayerLayout> layout_;
    ad::NodeRef first_;
};

/// Single-point convenience: binds `params` on `tape` and evaluates at t.
[[nodiscard]] std::vector<ad::Taylor2> forward_t2(const ParamVector& params, const MlpConfig& config,
                                                  ad::Tape& tape, double t);

/// Value-only forward pass without a tape. Row i holds the outputs at times[i]
/// and matches forward_t2(...).v0 bitwise.
[[nodiscard]] std::vector<std::vector<double>> predict(const ParamVector& params, const MlpConfig& config,
                                                       std::span<const double> times);

}  // namespace pinnlab
