#pragma once

// Ground-truth trajectories for square-wave driven RC ladders.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pinnlab/circuit.hpp"

namespace pinnlab {

/// Periodic square pulse that starts high at t = 0.
struct InputWaveform {
    double amplitude = 1.0;  // volts
    double period = 1.0;     // seconds
    double duty = 0.5;       // fraction of the period spent high

    void validate() const;
};

/// amplitude while (t mod period) < duty * period, else 0.
[[nodiscard]] double v_in_at(const InputWaveform& waveform, double t);

/// Switching instants of the waveform inside [t0, t1], ascending.
[[nodiscard]] std::vector<double> switching_instants(const InputWaveform& waveform, double t0, double t1);

/// Distance from t to the nearest switching instant.
[[nodiscard]] double distance_to_switch(const InputWaveform& waveform, double t);

struct SimConfig {
    CircuitSpec circuit = SingleStageSpec{15e3, 5e-6};
    InputWaveform waveform;
    double t_end = 10.0;
    double t_split = 5.0;
    double rk4_step = 1e-4;
    int samples_per_cycle = 60;
    std::uint64_t seed = 0;  // recorded only; generation is noise-free

    void validate() const;
};

/// Dense RK4 output. state[i * order + k] is node voltage k+1 at time[i].
struct Trajectory {
    std::size_t order = 0;
    std::vector<double> time;
    std::vector<double> state;
    double amplitude = 1.0;
    double max_step = 0.0;        // largest step actually taken
    bool step_adjusted = false;   // rk4_step did not divide the segments evenly

    [[nodiscard]] std::size_t size() const noexcept { return time.size(); }
    [[nodiscard]] double at(std::size_t i, std::size_t node) const { return state[i * order + node]; }
    [[nodiscard]] double output(std::size_t i) const { return at(i, order - 1); }
};

/// Classical RK4 from all-zero capacitor voltages. Every waveform switching
/// instant is a step boundary, so the input is constant inside each step.
[[nodiscard]] Trajectory simulate_rk4(const SimConfig& config);

enum class Split : std::uint8_t { train, val };

struct DataRow {
    double t = 0.0;
    double v_in = 0.0;
    double v_1 = 0.0;  // meaningful only when Dataset::has_v1
    double v_out = 0.0;
    Split split = Split::train;

    friend bool operator==(const DataRow&, const DataRow&) = default;
};

struct Dataset {
    bool has_v1 = false;
    std::vector<DataRow> rows;

    [[nodiscard]] std::vector<DataRow> rows_in(Split split) const;
    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Uniform grid of samples_per_cycle points per period on [0, t_end),
/// linearly interpolated from the dense trajectory. Rows with t < t_split
/// are tagged train, the rest val.
[[nodiscard]] Dataset sample(const Trajectory& trajectory, const SimConfig& config);

/// simulate_rk4 followed by sample.
[[nodiscard]] Dataset generate_dataset(const SimConfig& config);

/// Header `t,v_in[,v_1],v_out,split`, 17 significant digits.
void write_csv(const Dataset& dataset, const std::filesystem::path& path);
[[nodiscard]] Dataset read_csv(const std::filesystem::path& path);

}  // namespace pinnlab
