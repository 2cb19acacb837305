#pragma once

// Named run configurations: every row of the published hyperparameter table
// plus reduced-cost variants sized for a single CPU core.

#include <string>
#include <vector>

#include "pinnlab/circuit.hpp"
#include "pinnlab/dataset.hpp"
#include "pinnlab/trainer.hpp"

namespace pinnlab {

struct Preset {
    std::string name;
    std::string description;
    TrainConfig config;
    SimConfig simulation;  // ground truth circuit and sampling
};

[[nodiscard]] const std::vector<Preset>& presets();
/// Throws ConfigError listing the known names.
[[nodiscard]] const Preset& find_preset(const std::string& name);

/// R = 15 kOhm, C = 5 uF; RC = 0.075 s.
[[nodiscard]] SingleStageSpec reference_single_stage();
/// R1 = 15 kOhm, C1 = 5 uF, R2 = 20 kOhm, C2 = 15 uF.
[[nodiscard]] TwoStageSpec reference_two_stage();

/// 60 samples per cycle, train [0, 5) s, validate [5, 10) s.
[[nodiscard]] SimConfig reference_simulation(const CircuitSpec& circuit);

}  // namespace pinnlab
