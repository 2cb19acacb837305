#include "pinnlab/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "pinnlab/errors.hpp"
#include "pinnlab/metrics.hpp"

namespace pinnlab {

std::string to_string(Mode m) {
    switch (m) {
        case Mode::forward: return "forward";
        case Mode::inverse: return "inverse";
        case Mode::forward_given_inverse: return "forward_given_inverse";
    }
    return "unknown";
}

Mode parse_mode(const std::string& name) {
    if (name == "forward" || name == "FP") return Mode::forward;
    if (name == "inverse" || name == "IP") return Mode::inverse;
    if (name == "forward_given_inverse" || name == "F/I") return Mode::forward_given_inverse;
    throw ConfigError("unknown mode '" + name + "'");
}

std::string to_string(CollocationStrategy s) {
    return s == CollocationStrategy::equispaced ? "equispaced" : "uniform_random";
}

CollocationStrategy parse_collocation(const std::string& name) {
    if (name == "equispaced") return CollocationStrategy::equispaced;
    if (name == "uniform_random") return CollocationStrategy::uniform_random;
    throw ConfigError("collocation strategy must be 'equispaced' or 'uniform_random', got '" + name + "'");
}

void TrainConfig::validate() const {
    network().validate();
    waveform.validate();
    LossConfig{lambda, swish_direction}.validate();
    if (collocation_count < 1) {
        throw ConfigError("collocation_count must be >= 1");
    }
    const double high = waveform.duty * waveform.period;
    const double low = waveform.period - high;
    if (!(discontinuity_offset >= 0.0) || discontinuity_offset >= 0.5 * std::min(high, low)) {
        throw ConfigError("discontinuity_offset must lie in [0, half the shorter waveform phase)");
    }
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError(std::string(name) + " must be positive and finite");
        }
    };
    auto non_negative = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ConfigError(std::string(name) + " must be non-negative and finite");
        }
    };
    positive(lr_model, "lr_model");
    non_negative(lr_mu, "lr_mu");
    non_negative(lr_rho, "lr_rho");
    if (!std::isfinite(mu_init) || !std::isfinite(rho_init)) {
        throw ConfigError("mu_init and rho_init must be finite");
    }
    if (log_space && !(mu_init > 0.0 && rho_init > 0.0)) {
        throw ConfigError("log_space needs positive mu_init and rho_init");
    }
    if (steps < 1) {
        throw ConfigError("steps must be >= 1");
    }
    if (log_every < 1) {
        throw ConfigError("log_every must be >= 1");
    }
    // Rejects malformed names early.
    (void)pinnlab::freeze(EqParams::initial(variant_stages(variant), 1.0, 1.0), freeze);
}

MlpConfig TrainConfig::network() const {
    MlpConfig c = mlp;
    c.outputs = variant_outputs(variant);
    c.seed = seed;
    return c;
}

namespace {

double nearest_switch(const InputWaveform& w, double t) {
    const double base = t - std::fmod(t, w.period);
    double best = base;
    for (const double s : {base + w.duty * w.period, base + w.period}) {
        if (std::abs(t - s) < std::abs(t - best)) {
            best = s;
        }
    }
    return best;
}

double keep_away(double t, double offset, const InputWaveform& w) {
    if (offset <= 0.0 || distance_to_switch(w, t) >= offset) {
        return t;
    }
    const double s = nearest_switch(w, t);
    const double dir = t >= s ? 1.0 : -1.0;
    t = s + dir * offset;
    while (distance_to_switch(w, t) < offset) {
        t = std::nextafter(t, dir * std::numeric_limits<double>::infinity());
    }
    return t;
}

}  // namespace

std::vector<double> collocation_points(double t0, double t1, int n, CollocationStrategy strategy, double offset,
                                       const InputWaveform& waveform, std::mt19937_64* rng) {
    if (n < 1) {
        throw ConfigError("collocation count must be >= 1");
    }
    if (!(offset >= 0.0) || !(t1 - t0 > 2.0 * offset)) {
        throw ConfigError("collocation window is shorter than twice the discontinuity offset");
    }
    const double lo = t0 + offset;
    const double hi = t1 - offset;
    std::vector<double> points(static_cast<std::size_t>(n));
    if (strategy == CollocationStrategy::equispaced) {
        if (n == 1) {
            points[0] = 0.5 * (lo + hi);
        } else {
            const double h = (hi - lo) / (n - 1);
            for (int i = 0; i < n; ++i) {
                points[static_cast<std::size_t>(i)] = i == n - 1 ? hi : lo + i * h;
            }
        }
    } else {
        if (rng == nullptr) {
            throw ConfigError("uniform_random collocation needs a random generator");
        }
        std::uniform_real_distribution<double> dist(lo, hi);
        for (double& p : points) {
            p = dist(*rng);
        }
    }
    for (double& p : points) {
        p = keep_away(p, offset, waveform);
    }
    return points;
}

void adam_step(AdamGroup& state, std::span<double> params, std::span<const double> grads, double lr,
               long iteration) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw ConfigError("adam_step size mismatch");
    }
    for (const double g : grads) {
        if (!std::isfinite(g)) {
            throw NumericError("non-finite gradient at iteration " + std::to_string(iteration));
        }
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(AdamGroup::beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(AdamGroup::beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = AdamGroup::beta1 * state.m[i] + (1.0 - AdamGroup::beta1) * g;
        state.v[i] = AdamGroup::beta2 * state.v[i] + (1.0 - AdamGroup::beta2) * g * g;
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + AdamGroup::epsilon);
    }
}

bool TrainReport::same_outcome(const TrainReport& other) const {
    return curve == other.curve && params == other.params && eq == other.eq &&
           learned_poles == other.learned_poles && steps_completed == other.steps_completed &&
           status == other.status && error == other.error;
}

namespace {

// Trainable coordinates of EqParams, in bind() leaf order: unfrozen mu, then
// unfrozen rho. Holds log values in log space.
struct EqCoordinates {
    std::vector<double> mu;
    std::vector<double> rho;

    static EqCoordinates from(const EqParams& p, bool log_space) {
        EqCoordinates c;
        for (std::size_t i = 0; i < p.stages(); ++i) {
            if (!p.mu_frozen[i]) c.mu.push_back(log_space ? std::log(p.mu[i]) : p.mu[i]);
        }
        for (std::size_t i = 0; i < p.stages(); ++i) {
            if (!p.rho_frozen[i]) c.rho.push_back(log_space ? std::log(p.rho[i]) : p.rho[i]);
        }
        return c;
    }

    void apply(EqParams& p, bool log_space) const {
        std::size_t k = 0;
        for (std::size_t i = 0; i < p.stages(); ++i) {
            if (!p.mu_frozen[i]) p.mu[i] = log_space ? std::exp(mu[k++]) : mu[k++];
        }
        k = 0;
        for (std::size_t i = 0; i < p.stages(); ++i) {
            if (!p.rho_frozen[i]) p.rho[i] = log_space ? std::exp(rho[k++]) : rho[k++];
        }
    }
};

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

TrainReport train(const TrainConfig& config, const Dataset& dataset, const CircuitSpec& truth,
                  const TrainObserver& observer) {
    config.validate();
    dataset.validate();
    const auto started = std::chrono::steady_clock::now();

    const std::size_t stages = variant_stages(config.variant);
    if (circuit_order(truth) != stages) {
        throw ConfigError(to_string(config.variant) + " describes a " + std::to_string(stages) +
                          "-stage circuit, got order " + std::to_string(circuit_order(truth)));
    }
    const MlpConfig net_config = config.network();
    if (net_config.outputs == 2 && config.fit_v1 && !dataset.has_v1) {
        throw ConfigError(to_string(config.variant) + " fits v_1 but the dataset has no v_1 column");
    }
    const std::vector<DataRow> train_rows = dataset.rows_in(Split::train);
    if (train_rows.empty()) {
        throw ConfigError("dataset has no training rows");
    }

    const bool log_space = config.log_space && config.mode != Mode::forward;
    EqParams eq = config.mode == Mode::forward
                      ? EqParams::truth(truth)
                      : pinnlab::freeze(EqParams::initial(stages, config.mu_init, config.rho_init), config.freeze);
    EqCoordinates coords = EqCoordinates::from(eq, log_space);

    const double t0 = config.collocation_span == CollocationSpan::dataset ? dataset.rows.front().t
                                                                           : train_rows.front().t;
    const double t1 = config.collocation_span == CollocationSpan::dataset ? dataset.rows.back().t
                                                                           : train_rows.back().t;
    std::mt19937_64 colloc_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<double> colloc = collocation_points(t0, t1, config.collocation_count, config.collocation_strategy,
                                                    config.discontinuity_offset, config.waveform, &colloc_rng);
    std::vector<double> colloc_vin(colloc.size());

    TrainReport report;
    report.config = config;
    report.params = init_params(net_config);
    ParamVector params = report.params;

    AdamGroup adam_model(params.values.size());
    AdamGroup adam_mu(coords.mu.size());
    AdamGroup adam_rho(coords.rho.size());

    const LossConfig loss_config{config.lambda, config.swish_direction};
    ad::Tape tape;
    std::vector<std::vector<ad::NodeRef>> predictions(train_rows.size());
    std::vector<ad::NodeRef> residuals;

    for (int step = 0; step < config.steps; ++step) {
        try {
            if (step > 0 && config.collocation_strategy == CollocationStrategy::uniform_random) {
                colloc = collocation_points(t0, t1, config.collocation_count, config.collocation_strategy,
                                            config.discontinuity_offset, config.waveform, &colloc_rng);
            }
            for (std::size_t i = 0; i < colloc.size(); ++i) {
                colloc_vin[i] = v_in_at(config.waveform, colloc[i]);
            }

            tape.clear();
            const BoundNetwork net(tape, params, net_config);
            const EqNodes eq_nodes = bind(tape, eq, log_space);

            for (std::size_t i = 0; i < train_rows.size(); ++i) {
                predictions[i] = net.forward(tape, train_rows[i].t);
            }
            const ad::NodeRef mse_data = data_mse(tape, predictions, train_rows, config.fit_v1);

            const ResidualModel model(tape, config.variant, eq_nodes);
            residuals.clear();
            for (std::size_t i = 0; i < colloc.size(); ++i) {
                const auto outputs = net.forward_t2(tape, colloc[i]);
                for (const ad::NodeRef r : model.residuals(outputs, colloc_vin[i])) {
                    residuals.push_back(r);
                }
            }
            const ad::NodeRef mse_phys = mse_over(tape, residuals);
            const ad::NodeRef penalty = swish_penalty(tape, eq_nodes, config.swish_direction);
            const ad::NodeRef total = total_loss(tape, loss_config, mse_data, mse_phys, penalty);

            if (step % config.log_every == 0 || step == config.steps - 1) {
                report.curve.push_back(LossPoint{step, tape.value(total), tape.value(mse_data), tape.value(mse_phys),
                                                 tape.value(penalty)});
                if (observer) {
                    observer(report.curve.back(), params, eq);
                }
            }

            const ad::Gradient grad = tape.backward(total);
            const auto g = grad.values();
            const std::size_t n_model = params.values.size();
            const std::size_t n_mu = coords.mu.size();

            ParamVector next_params = params;
            EqCoordinates next_coords = coords;
            adam_step(adam_model, next_params.values, g.subspan(0, n_model), config.lr_model, step);
            adam_step(adam_mu, next_coords.mu, g.subspan(n_model, n_mu), config.lr_mu, step);
            adam_step(adam_rho, next_coords.rho, g.subspan(n_model + n_mu, coords.rho.size()), config.lr_rho, step);
            if (!all_finite(next_params.values) || !all_finite(next_coords.mu) || !all_finite(next_coords.rho)) {
                throw NumericError("non-finite parameter after update at iteration " + std::to_string(step));
            }
            EqParams next_eq = eq;
            next_coords.apply(next_eq, log_space);
            if (!all_finite(next_eq.mu) || !all_finite(next_eq.rho)) {
                throw NumericError("non-finite equation parameter at iteration " + std::to_string(step));
            }
            params = std::move(next_params);
            coords = std::move(next_coords);
            eq = std::move(next_eq);
            report.steps_completed = step + 1;
        } catch (const NumericError& e) {
            report.status = RunStatus::nan_abort;
            report.error = std::string("iteration ") + std::to_string(step) + ": " + e.what();
            break;
        }
    }

    report.params = std::move(params);
    report.eq = eq;
    try {
        report.learned_poles = learned_poles(report.eq);
    } catch (const NumericError&) {
        report.learned_poles.clear();
    }
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

}  // namespace pinnlab
