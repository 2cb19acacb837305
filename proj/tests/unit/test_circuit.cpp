#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pinnlab/circuit.hpp"
#include "pinnlab/errors.hpp"

using namespace pinnlab;
using pinnlab::test::rel_err;

namespace {

constexpr TwoStageSpec kReference{15e3, 5e-6, 20e3, 15e-6};

TwoStageSpec random_two_stage(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> lr(std::log(1e2), std::log(1e6));
    std::uniform_real_distribution<double> lc(std::log(1e-9), std::log(1e-3));
    return {std::exp(lr(rng)), std::exp(lc(rng)), std::exp(lr(rng)), std::exp(lc(rng))};
}

LadderSpec ladder_of(const TwoStageSpec& s) { return LadderSpec{{{s.R1, s.C1}, {s.R2, s.C2}}}; }

}  // namespace

TEST(PoleSingle, Examples) {
    EXPECT_NEAR(pole_single({15e3, 5e-6}), -13.333333, 1e-6);
    EXPECT_EQ(pole_single({1.0, 1.0}), -1.0);
    EXPECT_LT(rel_err(pole_single({7.0 * 15e3, 5e-6 / 7.0}), pole_single({15e3, 5e-6})), 1e-14);
}

TEST(PoleSingle, RejectsNonPositive) {
    EXPECT_THROW(SingleStageSpec({0.0, 1.0}).validate(), ConfigError);
    EXPECT_THROW(SingleStageSpec({1.0, -1.0}).validate(), ConfigError);
    EXPECT_THROW((void)pole_single({-1.0, 1.0}), ConfigError);
    EXPECT_THROW(LadderSpec{}.validate(), ConfigError);
}

TEST(PolesTwo, ReferenceCircuit) {
    const auto [p1, p2] = poles_two(kReference);
    // Roots of 1.125e-2 p^2 + 0.375 p + 1 worked through the textbook formula
    // in long double as an independent route.
    const long double a = 15e3L * 5e-6L * 20e3L * 15e-6L;
    const long double b = 20e3L * 15e-6L + 15e3L * (5e-6L + 15e-6L);
    const long double d = std::sqrt(b * b - 4.0L * a);
    EXPECT_LT(rel_err(p1, static_cast<double>((-b + d) / (2.0L * a))), 1e-12);
    EXPECT_LT(rel_err(p2, static_cast<double>((-b - d) / (2.0L * a))), 1e-12);
    // Published six-decimal rounding of the same poles.
    EXPECT_NEAR(p1, -1.786329, 5e-6);
    EXPECT_NEAR(p2, -24.880337, 5e-6);
}

TEST(PolesTwo, UnitCircuit) {
    const auto [p1, p2] = poles_two({1.0, 1.0, 1.0, 1.0});
    EXPECT_NEAR(p1, -0.381966, 1e-6);
    EXPECT_NEAR(p2, -2.618034, 1e-6);
}

TEST(QuadraticRoots, ComplexAndDegenerate) {
    EXPECT_THROW((void)real_quadratic_roots(1.0, 0.0, 1.0), NumericError);
    EXPECT_THROW((void)real_quadratic_roots(0.0, 1.0, 1.0), NumericError);
}

TEST(QuadraticRoots, NoCancellationForSeparatedRoots) {
    // Roots -1e-8 and -1e8: the naive formula loses the small one entirely.
    const auto [small, large] = real_quadratic_roots(1.0, 1e8 + 1e-8, 1.0);
    EXPECT_LT(rel_err(small, -1e-8), 1e-14);
    EXPECT_LT(rel_err(large, -1e8), 1e-14);
}

TEST(StateMatrix, Examples) {
    const Matrix one = state_matrix(LadderSpec{{{1.0, 1.0}}});
    ASSERT_EQ(one.n, 1u);
    EXPECT_EQ(one(0, 0), -1.0);

    const Matrix a = state_matrix(ladder_of(kReference));
    const auto [p1, p2] = poles_two(kReference);
    EXPECT_LT(rel_err(a(0, 0) + a(1, 1), p1 + p2), 1e-12);
    EXPECT_LT(rel_err(a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0), p1 * p2), 1e-12);

    const auto b = input_vector(ladder_of(kReference));
    ASSERT_EQ(b.size(), 2u);
    EXPECT_DOUBLE_EQ(b[0], 1.0 / (15e3 * 5e-6));
    EXPECT_EQ(b[1], 0.0);
}

TEST(PolesEig, SingleStage) {
    const Poles p = poles_eig(LadderSpec{{{15e3, 5e-6}}});
    ASSERT_EQ(p.values.size(), 1u);
    EXPECT_LT(rel_err(p.values[0], pole_single({15e3, 5e-6})), 1e-14);
}

TEST(PolesEig, ReferenceMatchesClosedFormAndEigen) {
    const Poles p = poles_eig(ladder_of(kReference));
    const auto [p1, p2] = poles_two(kReference);
    EXPECT_LT(rel_err(p.values[0], p1), 1e-9);
    EXPECT_LT(rel_err(p.values[1], p2), 1e-9);
    const auto oracle = test::ladder_eigenvalues(ladder_of(kReference));
    EXPECT_LT(rel_err(p.values[0], oracle[0].real()), 1e-9);
    EXPECT_LT(rel_err(p.values[1], oracle[1].real()), 1e-9);
}

TEST(PolesEig, ThreeStageDistinctNegative) {
    const LadderSpec spec{{{1e3, 1e-6}, {1e3, 1e-6}, {1e3, 1e-6}}};
    const Poles p = poles_eig(spec);
    ASSERT_EQ(p.values.size(), 3u);
    const auto oracle = test::ladder_eigenvalues(spec);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_LT(p.values[k], 0.0);
        EXPECT_EQ(oracle[k].imag(), 0.0);
        EXPECT_LT(rel_err(p.values[k], oracle[k].real()), 1e-9);
        if (k > 0) EXPECT_LT(p.values[k], p.values[k - 1]);
    }
    // For equal stages the poles are -(2 - 2cos(k pi / 7)) / (RC), k = 1, 3, 5.
    const double rc = 1e-3;
    const double pi = std::acos(-1.0);
    for (std::size_t k = 0; k < 3; ++k) {
        const double expected = -(2.0 - 2.0 * std::cos(static_cast<double>(2 * k + 1) * pi / 7.0)) / rc;
        EXPECT_LT(rel_err(p.values[k], expected), 1e-9);
    }
}

TEST(PolesEig, RejectsLargeLadders) {
    LadderSpec spec;
    spec.stages.assign(9, {1.0, 1.0});
    EXPECT_THROW((void)poles_eig(spec), ConfigError);
}

TEST(AnalyticStep, Examples) {
    const SingleStageSpec s{15e3, 5e-6};
    EXPECT_EQ(analytic_step_single(s, 1.0, 0.0), 0.0);
    EXPECT_NEAR(analytic_step_single(s, 1.0, 0.075), 1.0 - std::exp(-1.0), 1e-15);
    EXPECT_NEAR(analytic_step_single(s, 2.5, 20 * 0.075), 2.5, 1e-8);
    EXPECT_THROW((void)analytic_step_single(s, 1.0, -1.0), ConfigError);
}

TEST(Property, ClosedFormMatchesEigenvaluesOnRandomSpecs) {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const TwoStageSpec s = random_two_stage(rng);
        const auto [p1, p2] = poles_two(s);
        const Poles eig = poles_eig(ladder_of(s));
        ASSERT_LT(rel_err(eig.values[0], p1), 1e-9) << i;
        ASSERT_LT(rel_err(eig.values[1], p2), 1e-9) << i;
        const auto oracle = test::ladder_eigenvalues(ladder_of(s));
        ASSERT_LT(rel_err(oracle[0].real(), p1), 1e-9) << i;
        ASSERT_LT(rel_err(oracle[1].real(), p2), 1e-9) << i;
    }
}

TEST(Property, DiscriminantPositiveAndPolesStable) {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 1000; ++i) {
        const TwoStageSpec s = random_two_stage(rng);
        const double a = s.R1 * s.C1 * s.R2 * s.C2;
        const double b = s.R2 * s.C2 + s.R1 * (s.C1 + s.C2);
        EXPECT_GT(b * b - 4.0 * a, 0.0);
        const auto [p1, p2] = poles_two(s);
        EXPECT_LT(p2, p1);
        EXPECT_LT(p1, 0.0);
    }
}

TEST(Property, SinglePoleDependsOnProductOnly) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> lk(-6.0, 6.0);
    for (int i = 0; i < 100; ++i) {
        const double k = std::pow(10.0, lk(rng));
        EXPECT_LT(rel_err(pole_single({k * 15e3, 5e-6 / k}), pole_single({15e3, 5e-6})), 1e-14);
    }
}

TEST(Property, AnalyticStepSatisfiesFirstOrderResidual) {
    // v_in - v - RC v' with v' in closed form: (V/RC) exp(-t/RC).
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> t(0.0, 1.0);
    const SingleStageSpec s{15e3, 5e-6};
    const double rc = s.R * s.C;
    for (int i = 0; i < 100; ++i) {
        const double ti = t(rng);
        const double v = analytic_step_single(s, 1.0, ti);
        const double dv = std::exp(-ti / rc) / rc;
        EXPECT_LT(std::abs(1.0 - v - rc * dv), 1e-12);
    }
}
