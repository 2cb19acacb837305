#pragma once

// Adam training of a PINN on the composite loss.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pinnlab/circuit.hpp"
#include "pinnlab/dataset.hpp"
#include "pinnlab/loss.hpp"
#include "pinnlab/network.hpp"

namespace pinnlab {

enum class Mode {
    forward,                // mu, rho fixed at the true circuit values
    inverse,                // mu, rho trained
    forward_given_inverse,  // trained like inverse, selected by forward score
};

[[nodiscard]] std::string to_string(Mode m);
[[nodiscard]] Mode parse_mode(const std::string& name);

enum class CollocationStrategy { equispaced, uniform_random };

[[nodiscard]] std::string to_string(CollocationStrategy s);
[[nodiscard]] CollocationStrategy parse_collocation(const std::string& name);

/// Where physics residuals are enforced.
enum class CollocationSpan {
    dataset,  // first to last dataset row, training and validation
    train,    // training rows only
};

struct TrainConfig {
    MlpConfig mlp;  // outputs and seed are derived from variant and seed
    PhysicsVariant variant = PhysicsVariant::single_eq2;
    Mode mode = Mode::forward;
    InputWaveform waveform;

    int collocation_count = 150;
    CollocationStrategy collocation_strategy = CollocationStrategy::equispaced;
    CollocationSpan collocation_span = CollocationSpan::dataset;
    double discontinuity_offset = 1e-3;  // seconds

    double mu_init = 1e-4;
    double rho_init = 100.0;
    double lambda = 0.5;
    double lr_model = 1e-3;
    double lr_mu = 1e-6;
    double lr_rho = 1e-2;

    int steps = 1000;
    std::uint64_t seed = 0;
    int log_every = 100;

    SwishDirection swish_direction = SwishDirection::literal;
    bool log_space = false;
    bool fit_v1 = true;
    std::map<std::string, double> freeze;

    void validate() const;
    /// mlp with outputs and seed filled in.
    [[nodiscard]] MlpConfig network() const;
};

/// Collocation times on [t0, t1]. Every point keeps a distance of at least
/// `offset` from the waveform switching instants. `rng` is used by
/// uniform_random only.
[[nodiscard]] std::vector<double> collocation_points(double t0, double t1, int n, CollocationStrategy strategy,
                                                     double offset, const InputWaveform& waveform,
                                                     std::mt19937_64* rng = nullptr);

struct AdamGroup {
    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double epsilon = 1e-8;

    std::vector<double> m;
    std::vector<double> v;
    long step = 0;

    explicit AdamGroup(std::size_t size = 0) : m(size, 0.0), v(size, 0.0) {}
};

/// One bias-corrected Adam update of `params` in place. Throws NumericError
/// naming `iteration` on a non-finite gradient.
void adam_step(AdamGroup& state, std::span<double> params, std::span<const double> grads, double lr,
               long iteration = 0);

struct LossPoint {
    int step = 0;
    double total = 0.0;
    double mse_data = 0.0;
    double mse_phys = 0.0;
    double penalty = 0.0;

    friend bool operator==(const LossPoint&, const LossPoint&) = default;
};

enum class RunStatus { ok, nan_abort };

struct TrainReport {
    TrainConfig config;
    std::vector<LossPoint> curve;
    ParamVector params;
    EqParams eq;
    std::vector<double> learned_poles;  // empty when not real
    int steps_completed = 0;
    RunStatus status = RunStatus::ok;
    std::string error;
    double wall_clock_seconds = 0.0;

    /// Equality of everything except wall-clock time.
    [[nodiscard]] bool same_outcome(const TrainReport& other) const;
};

/// Called at every logged step with the state the logged losses were computed from.
using TrainObserver = std::function<void(const LossPoint&, const ParamVector&, const EqParams&)>;

/// Full-batch training. The true circuit supplies mu, rho in forward mode.
[[nodiscard]] TrainReport train(const TrainConfig& config, const Dataset& dataset, const CircuitSpec& truth,
                                const TrainObserver& observer = {});

}  // namespace pinnlab
