#include "pinnlab/presets.hpp"

#include "pinnlab/errors.hpp"

namespace pinnlab {

SingleStageSpec reference_single_stage() {
    return SingleStageSpec{15e3, 5e-6};
}

TwoStageSpec reference_two_stage() {
    return TwoStageSpec{15e3, 5e-6, 20e3, 15e-6};
}

SimConfig reference_simulation(const CircuitSpec& circuit) {
    SimConfig s;
    s.circuit = circuit;
    s.t_end = 10.0;
    s.t_split = 5.0;
    s.rk4_step = 1e-4;
    s.samples_per_cycle = 60;
    return s;
}

namespace {

struct Row {
    const char* name;
    PhysicsVariant variant;
    Mode mode;
    int layers;
    int neurons;
    int collocation;
    double mu_init;
    double rho_init;
    double lambda;
    double lr_model;
    double lr_mu;
    double lr_rho;
    int steps;
};

Preset make(const Row& r, const std::string& description) {
    Preset p;
    p.name = r.name;
    p.description = description;
    TrainConfig& c = p.config;
    c.variant = r.variant;
    c.mode = r.mode;
    c.mlp.hidden_layers = r.layers;
    c.mlp.neurons_per_layer = r.neurons;
    c.collocation_count = r.collocation;
    if (r.mode != Mode::forward) {
        c.mu_init = r.mu_init;
        c.rho_init = r.rho_init;
        c.lr_mu = r.lr_mu;
        c.lr_rho = r.lr_rho;
    }
    c.lambda = r.lambda;
    c.lr_model = r.lr_model;
    c.steps = r.steps;
    c.log_every = 100;
    p.simulation = reference_simulation(r.variant == PhysicsVariant::single_eq2 ? CircuitSpec{reference_single_stage()}
                                                                                 : CircuitSpec{reference_two_stage()});
    return p;
}

std::vector<Preset> build() {
    using PV = PhysicsVariant;
    constexpr double na = 0.0;
    // Published hyperparameters, one row per variant and problem type.
    const Row table[] = {
        {"table1-eq2-fp", PV::single_eq2, Mode::forward, 4, 32, 150, na, na, 1e-5, 8.258e-3, na, na, 19000},
        {"table1-eq2-fi", PV::single_eq2, Mode::forward_given_inverse, 7, 124, 100, 1.7e-5, 1.29, 1.89e-6, 7.94e-4,
         4.9e-6, 2.55e-7, 18000},
        {"table1-eq2-ip", PV::single_eq2, Mode::inverse, 9, 150, 500, 6.8e-4, 459.57, 6.84e-8, 5.99e-4, 8.76e-6,
         4.7e-3, 30000},
        {"table1-eq4-fp", PV::two_system_eq4, Mode::forward, 6, 64, 150, na, na, 1.61e-4, 4.77e-3, na, na, 19000},
        {"table1-eq4-fi", PV::two_system_eq4, Mode::forward_given_inverse, 10, 100, 1000, 4.55e-4, 175, 3.70e-8,
         8.92e-4, 4.332e-6, 5.55e-7, 45000},
        {"table1-eq4-ip", PV::two_system_eq4, Mode::inverse, 6, 400, 150, 1.43e-5, 294, 6.75e-5, 9.92e-4, 3.75e-5,
         2.26e-7, 25000},
        {"table1-eq5-fp", PV::two_first_order_eq5, Mode::forward, 9, 32, 150, na, na, 6.02e-4, 1.99e-4, na, na, 25000},
        {"table1-eq5-fi", PV::two_first_order_eq5, Mode::forward_given_inverse, 10, 50, 60, 2.80e-5, 624, 1.06e-5,
         9.91e-4, 3.90e-4, 7.83e-3, 50000},
        {"table1-eq5-ip", PV::two_first_order_eq5, Mode::inverse, 16, 150, 100, 1.56e-4, 1518, 6.42e-4, 9.98e-4,
         9.19e-7, 1.13e-7, 40000},
        {"table1-eq6-fp", PV::two_second_order_eq6, Mode::forward, 8, 128, 250, na, na, 6.71e-7, 9.99e-4, na, na,
         22000},
        {"table1-eq6-fi", PV::two_second_order_eq6, Mode::forward_given_inverse, 7, 200, 1000, 2.21e-2, 183, 2.57e-6,
         8.88e-4, 8.078e-5, 2.41e-3, 40000},
        {"table1-eq6-ip", PV::two_second_order_eq6, Mode::inverse, 7, 32, 100, 7.77e-2, 6149, 4.08e-6, 6.75e-4,
         5.44e-4, 1.01e-7, 12000},
    };
    std::vector<Preset> out;
    for (const Row& r : table) {
        out.push_back(make(r, "published hyperparameters"));
    }
    return out;
}

}  // namespace

const std::vector<Preset>& presets() {
    static const std::vector<Preset> all = build();
    return all;
}

const Preset& find_preset(const std::string& name) {
    for (const Preset& p : presets()) {
        if (p.name == name) {
            return p;
        }
    }
    std::string known;
    for (const Preset& p : presets()) {
        known += (known.empty() ? "" : ", ") + p.name;
    }
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

}  // namespace pinnlab
