#include "pinnlab/network.hpp"

#include <cmath>
#include <random>
#include <string>

#include "pinnlab/errors.hpp"

namespace pinnlab {

void MlpConfig::validate() const {
    if (hidden_layers < 1) {
        throw ConfigError("hidden_layers must be >= 1, got " + std::to_string(hidden_layers));
    }
    if (neurons_per_layer < 1) {
        throw ConfigError("neurons_per_layer must be >= 1, got " + std::to_string(neurons_per_layer));
    }
    if (outputs != 1 && outputs != 2) {
        throw ConfigError("outputs must be 1 or 2, got " + std::to_string(outputs));
    }
    if (!std::isfinite(input_scale) || input_scale <= 0.0) {
        throw ConfigError("input_scale must be positive and finite");
    }
}

std::vector<LayerLayout> layer_layout(const MlpConfig& config) {
    config.validate();
    std::vector<LayerLayout> layers;
    std::size_t offset = 0;
    std::size_t fan_in = 1;
    const auto width = static_cast<std::size_t>(config.neurons_per_layer);
    for (int l = 0; l <= config.hidden_layers; ++l) {
        const std::size_t fan_out = l == config.hidden_layers ? static_cast<std::size_t>(config.outputs) : width;
        layers.push_back(LayerLayout{fan_in, fan_out, offset, offset + fan_in * fan_out});
        offset += fan_in * fan_out + fan_out;
        fan_in = fan_out;
    }
    return layers;
}

std::size_t param_count(const MlpConfig& config) {
    const auto layers = layer_layout(config);
    const auto& last = layers.back();
    return last.biases + last.fan_out;
}

ParamVector init_params(const MlpConfig& config) {
    const auto layers = layer_layout(config);
    ParamVector params;
    params.values.assign(param_count(config), 0.0);
    std::mt19937_64 rng(config.seed);
    for (const auto& layer : layers) {
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.fan_in + layer.fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (std::size_t k = 0; k < layer.fan_in * layer.fan_out; ++k) {
            params.values[layer.weights + k] = dist(rng);
        }
    }
    return params;
}

namespace {

void check_length(const ParamVector& params, const MlpConfig& config) {
    const std::size_t expected = param_count(config);
    if (params.values.size() != expected) {
        throw ConfigError("parameter vector has " + std::to_string(params.values.size()) +
                          " entries, network layout needs " + std::to_string(expected));
    }
}

}  // namespace

BoundNetwork::BoundNetwork(ad::Tape& tape, const ParamVector& params, const MlpConfig& config)
    : config_(config), layout_(layer_layout(config)) {
    check_length(params, config);
    first_ = ad::NodeRef{static_cast<std::uint32_t>(tape.size())};
    for (const double v : params.values) {
        tape.leaf(v);
    }
}

std::vector<ad::Taylor2> BoundNetwork::forward_t2(ad::Tape& tape, double t) const {
    const ad::Taylor2 input = ad::t2_input(tape, t);
    const ad::NodeRef scale = tape.constant(config_.input_scale);
    std::vector<ad::NodeRef> x0{tape.mul(input.v0, scale)};
    std::vector<ad::NodeRef> x1{tape.mul(input.v1, scale)};
    std::vector<ad::NodeRef> x2{tape.mul(input.v2, scale)};
    std::vector<ad::NodeRef> y0;
    std::vector<ad::NodeRef> y1;
    std::vector<ad::NodeRef> y2;

    std::vector<ad::Taylor2> out;
    for (std::size_t l = 0; l < layout_.size(); ++l) {
        const auto& layer = layout_[l];
        const bool hidden = l + 1 < layout_.size();
        const ad::Taylor2Span x{x0, x1, x2};
        y0.clear();
        y1.clear();
        y2.clear();
        for (std::size_t j = 0; j < layer.fan_out; ++j) {
            const ad::NodeRef w{static_cast<std::uint32_t>(first_.index + layer.weights + j * layer.fan_in)};
            const ad::NodeRef b{static_cast<std::uint32_t>(first_.index + layer.biases + j)};
            ad::Taylor2 z = ad::t2_dot(tape, w, x, b);
            if (hidden) {
                z = ad::t2_tanh(tape, z);
            } else {
                out.push_back(z);
            }
            y0.push_back(z.v0);
            y1.push_back(z.v1);
            y2.push_back(z.v2);
        }
        x0.swap(y0);
        x1.swap(y1);
        x2.swap(y2);
    }
    return out;
}

std::vector<ad::NodeRef> BoundNetwork::forward(ad::Tape& tape, double t) const {
    std::vector<ad::NodeRef> x{tape.mul(tape.constant(t), tape.constant(config_.input_scale))};
    std::vector<ad::NodeRef> y;
    for (std::size_t l = 0; l < layout_.size(); ++l) {
        const auto& layer = layout_[l];
        const bool hidden = l + 1 < layout_.size();
        y.clear();
        for (std::size_t j = 0; j < layer.fan_out; ++j) {
            const ad::NodeRef w{static_cast<std::uint32_t>(first_.index + layer.weights + j * layer.fan_in)};
            const ad::NodeRef b{static_cast<std::uint32_t>(first_.index + layer.biases + j)};
            const ad::NodeRef z = tape.add(tape.dot(w, x), b);
            y.push_back(hidden ? tape.tanh(z) : z);
        }
        x.swap(y);
    }
    return x;
}

std::vector<ad::Taylor2> forward_t2(const ParamVector& params, const MlpConfig& config, ad::Tape& tape,
                                    double t) {
    const BoundNetwork net(tape, params, config);
    return net.forward_t2(tape, t);
}

std::vector<std::vector<double>> predict(const ParamVector& params, const MlpConfig& config,
                                         std::span<const double> times) {
    check_length(params, config);
    const auto layers = layer_layout(config);
    const double* p = params.values.data();
    std::vector<std::vector<double>> rows;
    rows.reserve(times.size());
    std::vector<double> x;
    std::vector<double> y;
    for (const double t : times) {
        x.assign(1, t * config.input_scale);
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& layer = layers[l];
            const bool hidden = l + 1 < layers.size();
            y.resize(layer.fan_out);
            for (std::size_t j = 0; j < layer.fan_out; ++j) {
                const double* w = p + layer.weights + j * layer.fan_in;
                double acc = 0.0;
                for (std::size_t k = 0; k < layer.fan_in; ++k) {
                    acc += w[k] * x[k];
                }
                const double z = acc + p[layer.biases + j];
                y[j] = hidden ? std::tanh(z) : z;
            }
            x.swap(y);
        }
        rows.push_back(x);
    }
    return rows;
}

}  // namespace pinnlab
