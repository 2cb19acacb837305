#include "pinnlab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "pinnlab/errors.hpp"
#include "pinnlab/io.hpp"

namespace pinnlab {

Distribution Distribution::uniform(double a, double b) {
    Distribution d;
    d.kind = Kind::uniform;
    d.low = a;
    d.high = b;
    d.validate();
    return d;
}

Distribution Distribution::log_uniform(double a, double b) {
    Distribution d;
    d.kind = Kind::log_uniform;
    d.low = a;
    d.high = b;
    d.validate();
    return d;
}

Distribution Distribution::int_choice(std::vector<long long> values) {
    Distribution d;
    d.kind = Kind::int_choice;
    for (const long long v : values) {
        d.options.emplace_back(v);
    }
    d.validate();
    return d;
}

Distribution Distribution::choice(std::vector<nlohmann::json> values) {
    Distribution d;
    d.kind = Kind::choice;
    d.options = std::move(values);
    d.validate();
    return d;
}

void Distribution::validate() const {
    switch (kind) {
        case Kind::uniform:
            if (!(std::isfinite(low) && std::isfinite(high) && low < high)) {
                throw ConfigError("uniform(a, b) needs finite a < b");
            }
            break;
        case Kind::log_uniform:
            if (!(std::isfinite(low) && std::isfinite(high) && low > 0.0 && low < high)) {
                throw ConfigError("log_uniform(a, b) needs 0 < a < b");
            }
            break;
        case Kind::int_choice:
            if (options.empty()) {
                throw ConfigError("int_choice needs at least one value");
            }
            for (const auto& o : options) {
                if (!o.is_number_integer()) {
                    throw ConfigError("int_choice values must be integers");
                }
            }
            break;
        case Kind::choice:
            if (options.empty()) {
                throw ConfigError("choice needs at least one value");
            }
            break;
    }
}

nlohmann::json Distribution::draw(std::mt19937_64& rng) const {
    switch (kind) {
        case Kind::uniform: return std::uniform_real_distribution<double>(low, high)(rng);
        case Kind::log_uniform:
            return std::exp(std::uniform_real_distribution<double>(std::log(low), std::log(high))(rng));
        case Kind::int_choice:
        case Kind::choice: {
            std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
            return options[pick(rng)];
        }
    }
    return nullptr;
}

void SearchSpace::validate() const {
    const Json keys = to_json(TrainConfig{});
    for (const auto& [name, dist] : params) {
        if (name == "schema_version" || !keys.contains(name)) {
            throw ConfigError("search space names unknown hyperparameter '" + name + "'");
        }
        dist.validate();
    }
}

std::string to_string(Objective o) {
    return o == Objective::r2_val ? "r2_val" : "mape_mean";
}

Objective parse_objective(const std::string& name) {
    if (name == "r2_val") return Objective::r2_val;
    if (name == "mape_mean" || name == "mape") return Objective::mape_mean;
    throw ConfigError("objective must be 'r2_val' or 'mape_mean', got '" + name + "'");
}

void SweepConfig::validate() const {
    space.validate();
    base.validate();
    if (n_trials < 1) {
        throw ConfigError("n_trials must be >= 1");
    }
    if (parallelism < 1) {
        throw ConfigError("parallelism must be >= 1");
    }
    if (objective == Objective::mape_mean) {
        bool forward = base.mode == Mode::forward;
        if (const auto it = space.params.find("mode"); it != space.params.end()) {
            for (const auto& o : it->second.options) {
                forward = forward || (o.is_string() && parse_mode(o.get<std::string>()) == Mode::forward);
            }
        }
        if (forward) {
            throw ConfigError("the mape objective is undefined in forward mode");
        }
    }
}

TrainConfig sample_config(const SearchSpace& space, const TrainConfig& base, std::mt19937_64& rng) {
    Json j = to_json(base);
    for (const auto& [name, dist] : space.params) {
        j[name] = dist.draw(rng);
    }
    if (!space.params.contains("seed")) {
        j["seed"] = static_cast<std::uint64_t>(rng());
    }
    return train_config_from_json(j);
}

std::mt19937_64 trial_rng(std::uint64_t master_seed, int trial_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(trial_id)};
    return std::mt19937_64(seq);
}

std::string to_string(TrialStatus s) {
    switch (s) {
        case TrialStatus::ok: return "ok";
        case TrialStatus::nan_abort: return "nan_abort";
        case TrialStatus::error: return "error";
    }
    return "error";
}

TrialStatus parse_trial_status(const std::string& name) {
    if (name == "ok") return TrialStatus::ok;
    if (name == "nan_abort") return TrialStatus::nan_abort;
    if (name == "error") return TrialStatus::error;
    throw ConfigError("unknown trial status '" + name + "'");
}

bool Trial::same_outcome(const Trial& other) const {
    return trial_id == other.trial_id && to_json(config) == to_json(other.config) && metrics == other.metrics &&
           status == other.status && error == other.error;
}

nlohmann::json to_json(const Trial& t) {
    return Json{{"schema_version", kSchemaVersion},
                {"trial_id", t.trial_id},
                {"config", to_json(t.config)},
                {"metrics", t.metrics ? to_json(*t.metrics) : Json(nullptr)},
                {"wall_clock_seconds", t.wall_clock_seconds},
                {"seed", t.config.seed},
                {"status", to_string(t.status)},
                {"error", t.error}};
}

Trial trial_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("trial record must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        static const std::set<std::string> known{"schema_version", "trial_id", "config", "metrics",
                                                 "wall_clock_seconds", "seed", "status", "error"};
        if (!known.contains(key)) {
            throw ConfigError("trial record: unknown key '" + key + "'");
        }
    }
    if (j.value("schema_version", kSchemaVersion) != kSchemaVersion) {
        throw ConfigError("trial record: unsupported schema_version");
    }
    Trial t;
    try {
        t.trial_id = j.at("trial_id").get<int>();
        t.config = train_config_from_json(j.at("config"));
        if (j.contains("metrics") && !j.at("metrics").is_null()) {
            t.metrics = metrics_from_json(j.at("metrics"));
        }
        t.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
        t.status = parse_trial_status(j.value("status", std::string("ok")));
        t.error = j.value("error", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("trial record: ") + e.what());
    }
    return t;
}

namespace {

Json distribution_json(const Distribution& d) {
    switch (d.kind) {
        case Distribution::Kind::uniform: return Json{{"dist", "uniform"}, {"low", d.low}, {"high", d.high}};
        case Distribution::Kind::log_uniform:
            return Json{{"dist", "log_uniform"}, {"low", d.low}, {"high", d.high}};
        case Distribution::Kind::int_choice: return Json{{"dist", "int_choice"}, {"values", d.options}};
        case Distribution::Kind::choice: return Json{{"dist", "choice"}, {"values", d.options}};
    }
    return nullptr;
}

Distribution distribution_from_json(const Json& j, const std::string& name) {
    const std::string what = "search space entry '" + name + "'";
    if (!j.is_object() || !j.contains("dist") || !j.at("dist").is_string()) {
        throw ConfigError(what + " needs a \"dist\" name");
    }
    const std::string dist = j.at("dist").get<std::string>();
    auto number = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number()) {
            throw ConfigError(what + " needs numeric '" + key + "'");
        }
        return j.at(key).get<double>();
    };
    auto values = [&]() {
        if (!j.contains("values") || !j.at("values").is_array()) {
            throw ConfigError(what + " needs a 'values' array");
        }
        return j.at("values").get<std::vector<Json>>();
    };
    for (const auto& [key, value] : j.items()) {
        if (key != "dist" && key != "low" && key != "high" && key != "values") {
            throw ConfigError(what + ": unknown key '" + key + "'");
        }
    }
    Distribution d;
    if (dist == "uniform" || dist == "log_uniform") {
        d.kind = dist == "uniform" ? Distribution::Kind::uniform : Distribution::Kind::log_uniform;
        d.low = number("low");
        d.high = number("high");
    } else if (dist == "int_choice" || dist == "choice") {
        d.kind = dist == "choice" ? Distribution::Kind::choice : Distribution::Kind::int_choice;
        d.options = values();
    } else {
        throw ConfigError(what + ": unknown distribution '" + dist + "'");
    }
    try {
        d.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(what + ": " + e.what());
    }
    return d;
}

}  // namespace

nlohmann::json to_json(const SearchSpace& s) {
    Json j = Json::object();
    for (const auto& [name, dist] : s.params) {
        j[name] = distribution_json(dist);
    }
    return j;
}

SearchSpace search_space_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("search space must be a JSON object");
    }
    SearchSpace s;
    for (const auto& [name, value] : j.items()) {
        s.params[name] = distribution_from_json(value, name);
    }
    s.validate();
    return s;
}

nlohmann::json to_json(const SweepConfig& c) {
    return Json{{"schema_version", kSchemaVersion}, {"space", to_json(c.space)},     {"base", to_json(c.base)},
                {"n_trials", c.n_trials},           {"master_seed", c.master_seed}, {"parallelism", c.parallelism},
                {"objective", to_string(c.objective)}, {"group_by", c.group_by}};
}

SweepConfig sweep_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("sweep config must be a JSON object");
    }
    static const std::set<std::string> known{"schema_version", "space",       "base",      "n_trials",
                                             "master_seed",    "parallelism", "objective", "group_by"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw ConfigError("sweep config: unknown key '" + key + "'");
        }
    }
    if (j.value("schema_version", kSchemaVersion) != kSchemaVersion) {
        throw ConfigError("sweep config: unsupported schema_version");
    }
    SweepConfig c;
    try {
        if (j.contains("space")) c.space = search_space_from_json(j.at("space"));
        if (j.contains("base")) c.base = train_config_from_json(j.at("base"));
        c.n_trials = j.value("n_trials", c.n_trials);
        c.master_seed = j.value("master_seed", c.master_seed);
        c.parallelism = j.value("parallelism", c.parallelism);
        if (j.contains("objective")) c.objective = parse_objective(j.at("objective").get<std::string>());
        c.group_by = j.value("group_by", c.group_by);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("sweep config: ") + e.what());
    }
    c.validate();
    return c;
}

Trial run_trial(const SweepConfig& config, int trial_id, const Dataset& dataset, const CircuitSpec& truth) {
    Trial t;
    t.trial_id = trial_id;
    const auto started = std::chrono::steady_clock::now();
    std::mt19937_64 rng = trial_rng(config.master_seed, trial_id);
    t.config = config.base;
    try {
        t.config = sample_config(config.space, config.base, rng);
        const TrainReport report = train(t.config, dataset, truth);
        t.status = report.status == RunStatus::ok ? TrialStatus::ok : TrialStatus::nan_abort;
        t.error = report.error;
        t.metrics = score(report, dataset, truth);
    } catch (const std::exception& e) {
        t.status = TrialStatus::error;
        t.error = e.what();
    }
    t.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return t;
}

std::vector<Trial> read_trial_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    std::vector<Trial> trials;
    std::size_t start = 0;
    int line = 0;
    while (start < text.size()) {
        ++line;
        const std::size_t end = text.find('\n', start);
        if (end == std::string::npos) {
            break;  // torn final record
        }
        const std::string record = text.substr(start, end - start);
        start = end + 1;
        if (record.empty()) {
            continue;
        }
        try {
            trials.push_back(trial_from_json(parse_json_text(record, path.string() + ":" + std::to_string(line))));
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ":" + std::to_string(line) + ": " + e.what());
        }
    }
    return trials;
}

std::vector<Trial> run_sweep(const SweepConfig& config, const Dataset& dataset, const CircuitSpec& truth,
                             const std::filesystem::path& log_path, bool resume) {
    config.validate();
    std::vector<Trial> done;
    const bool exists = std::filesystem::exists(log_path);
    if (exists && !resume) {
        throw IoError(log_path.string() + " exists (resume or remove it)");
    }
    if (exists) {
        done = read_trial_log(log_path);
        // Rewrite without a torn tail so appends start on a fresh line.
        std::string clean;
        for (const auto& t : done) {
            clean += to_json(t).dump() + "\n";
        }
        write_text_file(log_path, clean, true);
    } else {
        write_text_file(log_path, "", false);
    }

    std::set<int> completed;
    for (const auto& t : done) {
        completed.insert(t.trial_id);
    }
    std::vector<int> pending;
    for (int id = 0; id < config.n_trials; ++id) {
        if (!completed.contains(id)) {
            pending.push_back(id);
        }
    }

    std::ofstream log(log_path, std::ios::binary | std::ios::app);
    if (!log) {
        throw IoError("cannot append to " + log_path.string());
    }
    std::mutex writer;  // guards `log` and `done`
    bool write_failed = false;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t k = next++; k < pending.size(); k = next++) {
            Trial t = run_trial(config, pending[k], dataset, truth);
            const std::string line = to_json(t).dump() + "\n";
            const std::lock_guard lock(writer);
            log << line;
            log.flush();
            write_failed = write_failed || !log;
            done.push_back(std::move(t));
        }
    };
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), pending.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < workers; ++i) {
            pool.emplace_back(worker);
        }
    }
    if (write_failed) {
        throw IoError("write failed for " + log_path.string());
    }
    std::sort(done.begin(), done.end(), [](const Trial& a, const Trial& b) { return a.trial_id < b.trial_id; });
    return done;
}

std::optional<Trial> best_trial(const std::vector<Trial>& trials, Objective objective) {
    std::optional<Trial> best;
    double best_value = 0.0;
    for (const auto& t : trials) {
        if (!t.metrics) {
            continue;
        }
        double value = 0.0;
        if (objective == Objective::r2_val) {
            value = -t.metrics->r2_val;
        } else {
            if (!t.metrics->mape_p || t.metrics->mape_p->empty()) {
                continue;
            }
            for (const double m : *t.metrics->mape_p) {
                value += m;
            }
            value /= static_cast<double>(t.metrics->mape_p->size());
        }
        if (!std::isfinite(value)) {
            continue;
        }
        if (!best || value < best_value) {
            best = t;
            best_value = value;
        }
    }
    return best;
}

double quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) {
        throw ConfigError("quantile of an empty sample");
    }
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Summary summarize(const std::vector<Trial>& trials, const std::string& group_by) {
    if (trials.empty()) {
        throw ConfigError("cannot summarize an empty trial log");
    }
    // Groups keyed by the JSON value so numbers sort numerically.
    std::map<Json, std::vector<double>> groups;
    Summary summary;
    for (const auto& t : trials) {
        const Json cfg = to_json(t.config);
        if (!group_by.empty() && !cfg.contains(group_by)) {
            throw ConfigError("cannot group by unknown hyperparameter '" + group_by + "'");
        }
        const Json key = group_by.empty() ? Json("all") : cfg.at(group_by);
        auto& values = groups[key];
        if (t.metrics && std::isfinite(t.metrics->r2_val)) {
            values.push_back(t.metrics->r2_val);
        }
    }
    for (auto& [key, values] : groups) {
        const std::string label = key.is_string() ? key.get<std::string>() : key.dump();
        if (values.empty()) {
            summary.warnings.push_back("group " + label + " has no scored trials; omitted");
            continue;
        }
        std::sort(values.begin(), values.end());
        summary.groups.push_back(BoxStats{label, values.front(), quantile(values, 0.25), quantile(values, 0.5),
                                          quantile(values, 0.75), values.back(), values.size()});
    }
    return summary;
}

std::string summary_csv(const Summary& summary) {
    std::string out = "group,min,q1,median,q3,max,n\n";
    char buf[512];
    for (const auto& g : summary.groups) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%zu\n", g.group.c_str(), g.min, g.q1,
                      g.median, g.q3, g.max, g.n);
        out += buf;
    }
    return out;
}

}  // namespace pinnlab
