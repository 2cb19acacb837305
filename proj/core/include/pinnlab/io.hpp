#pragma once

// JSON forms of configs, reports and parameter snapshots, plus file helpers.
// Every top-level document carries "schema_version". Readers reject unknown
// keys and fill absent ones with defaults.

#include <filesystem>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "pinnlab/circuit.hpp"
#include "pinnlab/dataset.hpp"
#include "pinnlab/metrics.hpp"
#include "pinnlab/network.hpp"
#include "pinnlab/trainer.hpp"

namespace pinnlab {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// {"kind": "single" | "two" | "ladder", "R": [...], "C": [...]} in SI units.
[[nodiscard]] Json to_json(const CircuitSpec& spec);
[[nodiscard]] CircuitSpec circuit_from_json(const Json& j);

[[nodiscard]] Json to_json(const InputWaveform& w);
[[nodiscard]] InputWaveform waveform_from_json(const Json& j);

[[nodiscard]] Json to_json(const SimConfig& c);
[[nodiscard]] SimConfig sim_config_from_json(const Json& j);

/// Flat object; key names double as sweep hyperparameter names.
[[nodiscard]] Json to_json(const TrainConfig& c);
[[nodiscard]] TrainConfig train_config_from_json(const Json& j);

[[nodiscard]] Json to_json(const EqParams& p);
[[nodiscard]] EqParams eq_params_from_json(const Json& j);

[[nodiscard]] Json to_json(const LossPoint& p);
[[nodiscard]] LossPoint loss_point_from_json(const Json& j);

[[nodiscard]] std::string to_string(RunStatus s);
[[nodiscard]] RunStatus parse_status(const std::string& name);

[[nodiscard]] Json to_json(const TrainReport& r);
[[nodiscard]] TrainReport train_report_from_json(const Json& j);

[[nodiscard]] Json to_json(const Metrics& m);
[[nodiscard]] Metrics metrics_from_json(const Json& j);

/// Network architecture header plus flat values.
[[nodiscard]] Json params_snapshot(const ParamVector& params, const MlpConfig& config);
[[nodiscard]] std::pair<ParamVector, MlpConfig> params_from_snapshot(const Json& j);

/// Throws IoError when unreadable, ConfigError with line and column when
/// the text is not JSON.
[[nodiscard]] Json read_json_file(const std::filesystem::path& path);
[[nodiscard]] Json parse_json_text(const std::string& text, const std::string& origin);

/// Writes text, creating parent directories. Existing files need `force`.
void write_text_file(const std::filesystem::path& path, const std::string& text, bool force);

/// Pretty-printed with a trailing newline.
[[nodiscard]] std::string dump(const Json& j);

}  // namespace pinnlab
