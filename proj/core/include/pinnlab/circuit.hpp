#pragma once

// RC low-pass filter definitions and their poles.

#include <utility>
#include <variant>
#include <vector>

namespace pinnlab {

struct SingleStageSpec {
    double R;  // ohms
    double C;  // farads

    void validate() const;
};

struct TwoStageSpec {
    double R1;
    double C1;
    double R2;
    double C2;

    void validate() const;
};

/// One resistor in series followed by one capacitor to ground, per stage.
struct LadderStage {
    double R;
    double C;
};

struct LadderSpec {
    std::vector<LadderStage> stages;

    void validate() const;
    [[nodiscard]] std::size_t order() const noexcept { return stages.size(); }
};

/// Any of the circuits the lab can simulate.
using CircuitSpec = std::variant<SingleStageSpec, TwoStageSpec, LadderSpec>;

[[nodiscard]] LadderSpec to_ladder(const CircuitSpec& spec);
[[nodiscard]] std::size_t circuit_order(const CircuitSpec& spec);

/// Real rates in 1/s, sorted descending (closest to zero first).
struct Poles {
    std::vector<double> values;
};

/// -1/(R*C).
[[nodiscard]] double pole_single(const SingleStageSpec& spec);

/// Roots of R1C1R2C2 p^2 + (R2C2 + R1(C1+C2)) p + 1 = 0, descending.
[[nodiscard]] std::pair<double, double> poles_two(const TwoStageSpec& spec);

/// Roots of a p^2 + b p + c = 0 via the cancellation-free form, descending.
/// Throws NumericError when the roots are complex or a == 0.
[[nodiscard]] std::pair<double, double> real_quadratic_roots(double a, double b, double c);

/// Dense row-major n x n matrix.
struct Matrix {
    std::size_t n = 0;
    std::vector<double> data;

    [[nodiscard]] double& operator()(std::size_t r, std::size_t c) { return data[r * n + c]; }
    [[nodiscard]] double operator()(std::size_t r, std::size_t c) const { return data[r * n + c]; }
};

/// A in dv/dt = A v + b v_in for node voltages v_1..v_n of the ladder.
[[nodiscard]] Matrix state_matrix(const LadderSpec& spec);

/// Input vector b of the same state equation.
[[nodiscard]] std::vector<double> input_vector(const LadderSpec& spec);

/// Eigenvalues of state_matrix() by unshifted QR iteration, slow poles taken
/// from the inverse for relative accuracy. n <= 8.
[[nodiscard]] Poles poles_eig(const LadderSpec& spec);

/// V (1 - exp(-t/(RC))) for a step applied at t = 0 with zero initial charge.
[[nodiscard]] double analytic_step_single(const SingleStageSpec& spec, double V, double t);

}  // namespace pinnlab
