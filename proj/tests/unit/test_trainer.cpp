#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pinnlab/errors.hpp"
#include "pinnlab/presets.hpp"
#include "pinnlab/trainer.hpp"

using namespace pinnlab;

namespace {

constexpr TwoStageSpec kTwo{15e3, 5e-6, 20e3, 15e-6};
constexpr SingleStageSpec kOne{15e3, 5e-6};

SimConfig small_sim(const CircuitSpec& circuit) {
    SimConfig c;
    c.circuit = circuit;
    c.t_end = 2.0;
    c.t_split = 1.0;
    c.samples_per_cycle = 20;
    return c;
}

TrainConfig small_config(PhysicsVariant variant, Mode mode) {
    TrainConfig c;
    c.mlp.hidden_layers = 2;
    c.mlp.neurons_per_layer = 6;
    c.variant = variant;
    c.mode = mode;
    c.collocation_count = 12;
    c.steps = 25;
    c.log_every = 10;
    c.lr_model = 1e-2;
    c.mu_init = 1e-5;
    c.rho_init = 1e3;
    c.lr_mu = 1e-7;
    c.lr_rho = 10.0;
    c.seed = 3;
    return c;
}

}  // namespace

TEST(Names, ModeParsing) {
    EXPECT_EQ(parse_mode("forward"), Mode::forward);
    EXPECT_EQ(parse_mode("FP"), Mode::forward);
    EXPECT_EQ(parse_mode("IP"), Mode::inverse);
    EXPECT_EQ(parse_mode("F/I"), Mode::forward_given_inverse);
    EXPECT_EQ(parse_mode(to_string(Mode::forward_given_inverse)), Mode::forward_given_inverse);
    EXPECT_THROW((void)parse_mode("sideways"), ConfigError);
    EXPECT_EQ(parse_collocation("uniform_random"), CollocationStrategy::uniform_random);
    EXPECT_THROW((void)parse_collocation("sobol"), ConfigError);
}

TEST(Config, Validation) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate());
    c.steps = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = TrainConfig{};
    c.collocation_count = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = TrainConfig{};
    c.lr_model = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = TrainConfig{};
    c.discontinuity_offset = 0.3;
    EXPECT_THROW(c.validate(), ConfigError);
    c = TrainConfig{};
    c.freeze = {{"tau1", 1.0}};
    EXPECT_THROW(c.validate(), ConfigError);
    c = TrainConfig{};
    c.lambda = 2.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Collocation, Examples) {
    const InputWaveform slow{1.0, 100.0, 0.5};  // first switch at 50 s
    const auto plain = collocation_points(0.0, 3.0, 3, CollocationStrategy::equispaced, 0.0, slow);
    ASSERT_EQ(plain.size(), 3u);
    EXPECT_EQ(plain[0], 0.0);
    EXPECT_EQ(plain[1], 1.5);
    EXPECT_EQ(plain[2], 3.0);

    const InputWaveform w;
    const auto shifted = collocation_points(0.0, 3.0, 3, CollocationStrategy::equispaced, 0.01, w);
    for (double p : shifted) EXPECT_GE(distance_to_switch(w, p), 0.01) << p;

    const auto mid = collocation_points(2.0, 4.0, 1, CollocationStrategy::equispaced, 0.0, slow);
    ASSERT_EQ(mid.size(), 1u);
    EXPECT_EQ(mid[0], 3.0);

    EXPECT_THROW((void)collocation_points(0.0, 0.01, 3, CollocationStrategy::equispaced, 0.01, w), ConfigError);
    EXPECT_THROW((void)collocation_points(0.0, 1.0, 3, CollocationStrategy::uniform_random, 0.0, w), ConfigError);
}

TEST(Property, CollocationKeepsAwayFromSwitching) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> period(0.2, 3.0), duty(0.1, 0.9), start(0.0, 5.0), len(0.5, 10.0);
    std::uniform_int_distribution<int> count(1, 200);
    for (int i = 0; i < 1000; ++i) {
        const InputWaveform w{1.0, period(rng), duty(rng)};
        const double shorter = std::min(w.duty, 1.0 - w.duty) * w.period;
        const double eps = std::uniform_real_distribution<double>(0.0, 0.45 * shorter)(rng);
        const double t0 = start(rng);
        const double t1 = t0 + std::max(len(rng), 3.0 * eps);
        const auto strategy = i % 2 ? CollocationStrategy::uniform_random : CollocationStrategy::equispaced;
        const auto pts = collocation_points(t0, t1, count(rng), strategy, eps, w, &rng);
        for (double p : pts) {
            // Brute-force distance to every switching instant of the window.
            double nearest = std::numeric_limits<double>::infinity();
            for (double k = std::floor(t0 / w.period) - 1; k * w.period <= t1 + w.period; k += 1.0) {
                nearest = std::min({nearest, std::abs(p - k * w.period), std::abs(p - (k + w.duty) * w.period)});
            }
            // The oracle rounds switching instants its own way: allow ulps of t.
            ASSERT_GE(nearest, eps - 1e-13 * std::max(1.0, std::abs(p))) << "config " << i << " point " << p;
        }
    }
}

TEST(Adam, FirstStepClosedForm) {
    AdamGroup state(1);
    std::vector<double> p{0.0};
    const std::vector<double> g{0.5};
    adam_step(state, p, g, 1e-3);
    EXPECT_NEAR(p[0], -1e-3 * 0.5 / (0.5 + 1e-8), 1e-18);
    // lr (1 - eps/g) to first order.
    EXPECT_NEAR(std::abs(p[0]), 9.9999998e-4, 1e-15);
    EXPECT_EQ(state.step, 1);
}

TEST(Adam, ZeroGradientAndSign) {
    AdamGroup state(3);
    std::vector<double> p{1.0, 2.0, 3.0};
    adam_step(state, p, std::vector<double>{0.0, 0.0, 0.0}, 0.1);
    EXPECT_EQ(p, (std::vector<double>{1.0, 2.0, 3.0}));

    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    AdamGroup fresh(50);
    std::vector<double> q(50, 0.0), g(50);
    for (double& x : g) x = n(rng);
    adam_step(fresh, q, g, 1e-2);
    for (std::size_t k = 0; k < 50; ++k) EXPECT_LT(q[k] * g[k], 0.0);
}

TEST(Adam, MomentsTrackSteps) {
    AdamGroup state(2);
    std::vector<double> p{0.0, 0.0};
    for (int i = 0; i < 5; ++i) adam_step(state, p, std::vector<double>{1.0, -2.0}, 1e-3, i);
    EXPECT_EQ(state.step, 5);
    EXPECT_EQ(state.m.size(), 2u);
    EXPECT_NEAR(state.m[0], 1.0 - std::pow(0.9, 5), 1e-15);
    EXPECT_NEAR(state.v[1], 4.0 * (1.0 - std::pow(0.999, 5)), 1e-15);
}

TEST(Adam, NonFiniteGradientNamesIteration) {
    AdamGroup state(1);
    std::vector<double> p{0.0};
    try {
        adam_step(state, p, std::vector<double>{std::nan("")}, 1e-3, 42);
        FAIL();
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("42"), std::string::npos);
    }
    EXPECT_EQ(p[0], 0.0);
}

TEST(Train, SingleStepLogsOnePoint) {
    const Dataset ds = generate_dataset(small_sim(kOne));
    TrainConfig c = small_config(PhysicsVariant::single_eq2, Mode::forward);
    c.steps = 1;
    const TrainReport r = train(c, ds, kOne);
    EXPECT_EQ(r.curve.size(), 1u);
    EXPECT_EQ(r.steps_completed, 1);
    EXPECT_EQ(r.status, RunStatus::ok);
    c.steps = 0;
    EXPECT_THROW((void)train(c, ds, kOne), ConfigError);
}

TEST(Train, CurveFollowsLoggingInterval) {
    const Dataset ds = generate_dataset(small_sim(kOne));
    const TrainReport r = train(small_config(PhysicsVariant::single_eq2, Mode::inverse), ds, kOne);
    std::vector<int> steps;
    for (const auto& p : r.curve) steps.push_back(p.step);
    EXPECT_EQ(steps, (std::vector<int>{0, 10, 20, 24}));
    for (const auto& p : r.curve) {
        EXPECT_GE(p.mse_data, 0.0);
        EXPECT_GE(p.mse_phys, 0.0);
    }
}

TEST(Train, Deterministic) {
    const Dataset ds = generate_dataset(small_sim(kTwo));
    for (auto v : {PhysicsVariant::two_system_eq4, PhysicsVariant::two_second_order_eq6}) {
        TrainConfig c = small_config(v, Mode::inverse);
        c.collocation_strategy = CollocationStrategy::uniform_random;
        const TrainReport a = train(c, ds, kTwo);
        const TrainReport b = train(c, ds, kTwo);
        EXPECT_TRUE(a.same_outcome(b));
        EXPECT_EQ(a.params, b.params);
        c.seed = 4;
        EXPECT_FALSE(a.same_outcome(train(c, ds, kTwo)));
    }
}

TEST(Train, InverseAndForwardGivenInverseTrainIdentically) {
    const Dataset ds = generate_dataset(small_sim(kOne));
    TrainConfig c = small_config(PhysicsVariant::single_eq2, Mode::inverse);
    c.steps = 100;
    c.log_every = 25;
    const TrainReport ip = train(c, ds, kOne);
    c.mode = Mode::forward_given_inverse;
    const TrainReport fi = train(c, ds, kOne);
    EXPECT_EQ(ip.curve, fi.curve);
    EXPECT_EQ(ip.params, fi.params);
    EXPECT_EQ(ip.eq, fi.eq);
}

TEST(Train, ForwardKeepsTruthAndInverseMovesParameters) {
    const Dataset ds = generate_dataset(small_sim(kOne));
    const TrainReport fp = train(small_config(PhysicsVariant::single_eq2, Mode::forward), ds, kOne);
    EXPECT_EQ(fp.eq, EqParams::truth(kOne));
    const TrainReport ip = train(small_config(PhysicsVariant::single_eq2, Mode::inverse), ds, kOne);
    EXPECT_NE(ip.eq.rho[0], 1e3);
    EXPECT_NE(ip.eq.mu[0], 1e-5);
}

TEST(Train, FrozenParametersConserved) {
    const Dataset ds = generate_dataset(small_sim(kTwo));
    TrainConfig c = small_config(PhysicsVariant::two_first_order_eq5, Mode::inverse);
    c.freeze = {{"rho2", 20e3}, {"mu1", 4.5e-6}};
    const TrainReport r = train(c, ds, kTwo);
    EXPECT_EQ(r.eq.rho[1], 20e3);
    EXPECT_EQ(r.eq.mu[0], 4.5e-6);
    EXPECT_TRUE(r.eq.rho_frozen[1]);
    EXPECT_NE(r.eq.rho[0], c.rho_init);
}

TEST(Train, FreezingEverythingMatchesForward) {
    const Dataset ds = generate_dataset(small_sim(kOne));
    TrainConfig c = small_config(PhysicsVariant::single_eq2, Mode::inverse);
    c.freeze = {{"rho1", kOne.R}, {"mu1", kOne.C}};
    const TrainReport frozen = train(c, ds, kOne);
    c.freeze.clear();
    c.mode = Mode::forward;
    const TrainReport forward = train(c, ds, kOne);
    EXPECT_EQ(frozen.curve, forward.curve);
    EXPECT_EQ(frozen.params, forward.params);
}

TEST(Train, RejectsIncompatibleData) {
    const Dataset single = generate_dataset(small_sim(kOne));
    EXPECT_THROW((void)train(small_config(PhysicsVariant::two_system_eq4, Mode::inverse), single, kOne),
                 ConfigError);
    const Dataset two = generate_dataset(small_sim(kTwo));
    EXPECT_THROW((void)train(small_config(PhysicsVariant::single_eq2, Mode::forward), two, kTwo), ConfigError);
}

TEST(Train, NanAbortKeepsLastGoodState) {
    const Dataset ds = generate_dataset(small_sim(kOne));
    TrainConfig c = small_config(PhysicsVariant::single_eq2, Mode::inverse);
    // The first update throws rho to about -1e300; squaring the next
    // residual overflows.
    c.lr_rho = 1e300;
    c.steps = 5;
    const TrainReport r = train(c, ds, kOne);
    EXPECT_EQ(r.status, RunStatus::nan_abort);
    EXPECT_FALSE(r.error.empty());
    EXPECT_LT(r.steps_completed, 5);
    for (double v : r.params.values) EXPECT_TRUE(std::isfinite(v));
    EXPECT_TRUE(std::isfinite(r.eq.rho[0]));
}

TEST(Train, ObserverSeesLoggedState) {
    const Dataset ds = generate_dataset(small_sim(kOne));
    std::vector<LossPoint> seen;
    std::vector<double> first_rho;
    const TrainReport r = train(small_config(PhysicsVariant::single_eq2, Mode::inverse), ds, kOne,
                                [&](const LossPoint& p, const ParamVector& params, const EqParams& eq) {
                                    EXPECT_FALSE(params.values.empty());
                                    seen.push_back(p);
                                    first_rho.push_back(eq.rho[0]);
                                });
    EXPECT_EQ(seen, r.curve);
    ASSERT_FALSE(first_rho.empty());
    EXPECT_EQ(first_rho.front(), 1e3);  // logged before the first update
}

TEST(Train, ForwardPresetLossDecreases) {
    // The published forward configuration over 2000 steps, five seeds.
    const Preset& p = find_preset("table1-eq2-fp");
    const Dataset ds = generate_dataset(p.simulation);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        TrainConfig c = p.config;
        c.steps = 2000;
        c.log_every = 2000;
        c.seed = seed;
        const TrainReport r = train(c, ds, p.simulation.circuit);
        ASSERT_EQ(r.status, RunStatus::ok);
        ASSERT_GE(r.curve.size(), 2u);
        EXPECT_LT(r.curve.back().total, r.curve.front().total) << "seed " << seed;
    }
}
