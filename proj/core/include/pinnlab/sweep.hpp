#pragma once

// Random-search hyperparameter sweeps, JSONL trial logs and box summaries.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pinnlab/circuit.hpp"
#include "pinnlab/dataset.hpp"
#include "pinnlab/metrics.hpp"
#include "pinnlab/trainer.hpp"

namespace pinnlab {

struct Distribution {
    enum class Kind { uniform, log_uniform, int_choice, choice };

    Kind kind = Kind::uniform;
    double low = 0.0;
    double high = 1.0;
    std::vector<nlohmann::json> options;  // int_choice and choice

    [[nodiscard]] static Distribution uniform(double a, double b);
    [[nodiscard]] static Distribution log_uniform(double a, double b);
    [[nodiscard]] static Distribution int_choice(std::vector<long long> values);
    [[nodiscard]] static Distribution choice(std::vector<nlohmann::json> values);

    /// Throws ConfigError unless low < high (and low > 0 for log_uniform) or
    /// the option list is non-empty.
    void validate() const;
    [[nodiscard]] nlohmann::json draw(std::mt19937_64& rng) const;
};

/// Hyperparameter name (a TrainConfig JSON key) to distribution. Names are
/// drawn in lexicographic order.
struct SearchSpace {
    std::map<std::string, Distribution> params;

    void validate() const;
};

enum class Objective {
    r2_val,     // maximise
    mape_mean,  // minimise
};

[[nodiscard]] std::string to_string(Objective o);
[[nodiscard]] Objective parse_objective(const std::string& name);

struct SweepConfig {
    SearchSpace space;
    TrainConfig base;
    int n_trials = 1;
    std::uint64_t master_seed = 0;
    int parallelism = 1;
    Objective objective = Objective::r2_val;
    std::string group_by = "collocation_count";

    void validate() const;
};

/// Overwrites the base config with one draw per hyperparameter. The training
/// seed is drawn last, unless the space names it.
[[nodiscard]] TrainConfig sample_config(const SearchSpace& space, const TrainConfig& base, std::mt19937_64& rng);

/// Generator for trial `trial_id`; depends only on the master seed and id.
[[nodiscard]] std::mt19937_64 trial_rng(std::uint64_t master_seed, int trial_id);

enum class TrialStatus { ok, nan_abort, error };

[[nodiscard]] std::string to_string(TrialStatus s);
[[nodiscard]] TrialStatus parse_trial_status(const std::string& name);

struct Trial {
    int trial_id = 0;
    TrainConfig config;
    std::optional<Metrics> metrics;
    double wall_clock_seconds = 0.0;
    TrialStatus status = TrialStatus::ok;
    std::string error;

    /// Equality of everything except wall-clock time.
    [[nodiscard]] bool same_outcome(const Trial& other) const;
};

[[nodiscard]] nlohmann::json to_json(const Trial& t);
[[nodiscard]] Trial trial_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json to_json(const SearchSpace& s);
[[nodiscard]] SearchSpace search_space_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const SweepConfig& c);
[[nodiscard]] SweepConfig sweep_config_from_json(const nlohmann::json& j);

/// Trains and scores one sampled configuration. Failures become data.
[[nodiscard]] Trial run_trial(const SweepConfig& config, int trial_id, const Dataset& dataset,
                              const CircuitSpec& truth);

/// Runs every trial not already in the log and appends each record as it
/// finishes. Without `resume` an existing log is an IoError. Returns all
/// trials of the log sorted by id.
std::vector<Trial> run_sweep(const SweepConfig& config, const Dataset& dataset, const CircuitSpec& truth,
                             const std::filesystem::path& log_path, bool resume = false);

/// Reads a JSONL log. A torn final line (no trailing newline) is dropped.
[[nodiscard]] std::vector<Trial> read_trial_log(const std::filesystem::path& path);

/// Trial with the best objective value among those with metrics.
[[nodiscard]] std::optional<Trial> best_trial(const std::vector<Trial>& trials, Objective objective);

/// Linear-interpolation (type 7) quantile of an ascending sample, p in [0, 1].
[[nodiscard]] double quantile(const std::vector<double>& sorted, double p);

struct BoxStats {
    std::string group;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    std::size_t n = 0;

    [[nodiscard]] double iqr() const noexcept { return q3 - q1; }
};

struct Summary {
    std::vector<BoxStats> groups;  // ordered by hyperparameter value
    std::vector<std::string> warnings;
};

/// Box statistics of r2_val per value of `group_by` ("" pools all trials).
/// Trials without metrics are skipped.
[[nodiscard]] Summary summarize(const std::vector<Trial>& trials, const std::string& group_by);

/// Header `group,min,q1,median,q3,max,n`.
[[nodiscard]] std::string summary_csv(const Summary& summary);

}  // namespace pinnlab
