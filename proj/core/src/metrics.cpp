#include "pinnlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "pinnlab/errors.hpp"
#include "pinnlab/network.hpp"
#include "pinnlab/trainer.hpp"

namespace pinnlab {

double r_squared(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw ConfigError("r_squared: length mismatch");
    }
    if (y_true.empty()) {
        throw ConfigError("r_squared: empty input");
    }
    double mean = 0.0;
    for (const double y : y_true) {
        mean += y;
    }
    mean /= static_cast<double>(y_true.size());
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
        ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    }
    if (ss_tot == 0.0) {
        throw ConfigError("r_squared: y_true is constant");
    }
    return 1.0 - ss_res / ss_tot;
}

std::vector<double> learned_poles(const EqParams& params) {
    if (params.stages() == 1) {
        const double tau = params.rho[0] * params.mu[0];
        if (tau == 0.0 || !std::isfinite(tau)) {
            throw NumericError("learned time constant is zero or non-finite");
        }
        return {-1.0 / tau};
    }
    if (params.stages() == 2) {
        const double a = (params.rho[0] * params.mu[0]) * (params.rho[1] * params.mu[1]);
        const double b = params.rho[1] * params.mu[1] + params.rho[0] * (params.mu[0] + params.mu[1]);
        const auto [p1, p2] = real_quadratic_roots(a, b, 1.0);
        return {p1, p2};
    }
    throw ConfigError("learned poles need one or two stages");
}

Poles true_poles(const CircuitSpec& circuit) {
    Poles p;
    if (const auto* s = std::get_if<SingleStageSpec>(&circuit)) {
        p.values = {pole_single(*s)};
    } else if (const auto* t = std::get_if<TwoStageSpec>(&circuit)) {
        const auto [p1, p2] = poles_two(*t);
        p.values = {p1, p2};
    } else {
        p = poles_eig(std::get<LadderSpec>(circuit));
    }
    std::sort(p.values.begin(), p.values.end(), std::greater<>());
    return p;
}

std::vector<double> mape_poles(const Poles& truth, const EqParams& learned) {
    std::vector<double> got = learned_poles(learned);
    if (got.size() != truth.values.size()) {
        throw ConfigError("learned and true pole counts differ");
    }
    std::vector<double> want = truth.values;
    std::sort(got.begin(), got.end(), std::greater<>());
    std::sort(want.begin(), want.end(), std::greater<>());
    std::vector<double> out;
    for (std::size_t i = 0; i < want.size(); ++i) {
        out.push_back(100.0 * std::abs(got[i] - want[i]) / std::abs(want[i]));
    }
    return out;
}

namespace {

struct Targets {
    std::vector<double> truth;
    std::vector<double> pred;
};

Targets collect(const std::vector<DataRow>& rows, const std::vector<std::vector<double>>& pred, bool two_outputs,
                bool pooled) {
    Targets out;
    if (two_outputs && pooled) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out.truth.push_back(rows[i].v_1);
            out.pred.push_back(pred[i][0]);
        }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.truth.push_back(rows[i].v_out);
        out.pred.push_back(pred[i].back());
    }
    return out;
}

double mse(const Targets& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.truth.size(); ++i) {
        s += (t.truth[i] - t.pred[i]) * (t.truth[i] - t.pred[i]);
    }
    return s / static_cast<double>(t.truth.size());
}

std::vector<double> times_of(const std::vector<DataRow>& rows) {
    std::vector<double> t;
    t.reserve(rows.size());
    for (const auto& r : rows) {
        t.push_back(r.t);
    }
    return t;
}

}  // namespace

Metrics score(const TrainReport& report, const Dataset& dataset, const CircuitSpec& truth,
              const ScoreOptions& options) {
    const TrainConfig& config = report.config;
    const MlpConfig net = config.network();
    const bool two = net.outputs == 2;
    if (two && options.pooled_two_output && !dataset.has_v1) {
        throw ConfigError("pooled two-output scoring needs a v_1 column");
    }
    const auto train_rows = dataset.rows_in(Split::train);
    const auto val_rows = dataset.rows_in(Split::val);
    if (train_rows.empty() || val_rows.empty()) {
        throw ConfigError("scoring needs both training and validation rows");
    }

    Metrics m;
    const Targets train_t = collect(train_rows, predict(report.params, net, times_of(train_rows)), two,
                                    options.pooled_two_output);
    const Targets val_t =
        collect(val_rows, predict(report.params, net, times_of(val_rows)), two, options.pooled_two_output);
    m.mse_data = mse(train_t);
    m.mse_val = mse(val_t);
    m.r2_data = r_squared(train_t.truth, train_t.pred);
    m.r2_val = r_squared(val_t.truth, val_t.pred);

    const std::vector<double> grid =
        collocation_points(train_rows.front().t, train_rows.back().t, options.phys_grid_points,
                           CollocationStrategy::equispaced, config.discontinuity_offset, config.waveform);
    ad::Tape tape;
    const BoundNetwork bound(tape, report.params, net);
    const ResidualModel model(tape, config.variant, bind(tape, report.eq));
    std::vector<ad::NodeRef> residuals;
    for (const double t : grid) {
        for (const ad::NodeRef r : model.residuals(bound.forward_t2(tape, t), v_in_at(config.waveform, t))) {
            residuals.push_back(r);
        }
    }
    m.mse_phys = tape.value(mse_over(tape, residuals));

    for (std::size_t i = 0; i < report.eq.stages(); ++i) {
        m.params_positive = m.params_positive && report.eq.mu[i] > 0.0 && report.eq.rho[i] > 0.0;
    }
    if (config.mode != Mode::forward) {
        try {
            m.mape_p = mape_poles(true_poles(truth), report.eq);
        } catch (const NumericError&) {
            m.poles_real = false;
        }
    }
    return m;
}

}  // namespace pinnlab
