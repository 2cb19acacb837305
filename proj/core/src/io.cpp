#include "pinnlab/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "pinnlab/errors.hpp"

namespace pinnlab {

namespace {

// Strict object reader: typed lookups with defaults, unknown keys rejected
// by finish().
class Reader {
public:
    Reader(const Json& j, std::string what) : j_(j), what_(std::move(what)) {
        if (!j_.is_object()) {
            throw ConfigError(what_ + " must be a JSON object");
        }
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) {
            return;
        }
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!it->is_number()) throw ConfigError("");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!it->is_boolean()) throw ConfigError("");
            } else if constexpr (std::is_integral_v<T>) {
                if (!it->is_number_integer()) throw ConfigError("");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!it->is_string()) throw ConfigError("");
            }
            out = it->get<T>();
        } catch (const std::exception&) {
            throw ConfigError(what_ + ": key '" + key + "' has the wrong type");
        }
    }

    template <typename T>
    void require(const char* key, T& out) {
        if (!j_.contains(key)) {
            throw ConfigError(what_ + ": missing key '" + key + "'");
        }
        get(key, out);
    }

    const Json* child(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.contains(key)) {
                throw ConfigError(what_ + ": unknown key '" + key + "'");
            }
        }
    }

private:
    const Json& j_;
    std::string what_;
    std::set<std::string, std::less<>> seen_;
};

void check_schema(Reader& r) {
    int version = kSchemaVersion;
    r.get("schema_version", version);
    if (version != kSchemaVersion) {
        throw ConfigError("unsupported schema_version " + std::to_string(version));
    }
}

std::vector<double> number_array(const Json& j, const std::string& what) {
    if (!j.is_array()) {
        throw ConfigError(what + " must be an array of numbers");
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) {
            throw ConfigError(what + " must be an array of numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<bool> bool_array(const Json& j, const std::string& what) {
    if (!j.is_array()) {
        throw ConfigError(what + " must be an array of booleans");
    }
    std::vector<bool> out;
    for (const auto& v : j) {
        if (!v.is_boolean()) {
            throw ConfigError(what + " must be an array of booleans");
        }
        out.push_back(v.get<bool>());
    }
    return out;
}

std::string to_string(CollocationSpan s) {
    return s == CollocationSpan::dataset ? "dataset" : "train";
}

CollocationSpan parse_span(const std::string& name) {
    if (name == "dataset") return CollocationSpan::dataset;
    if (name == "train") return CollocationSpan::train;
    throw ConfigError("collocation_span must be 'dataset' or 'train', got '" + name + "'");
}

}  // namespace

Json to_json(const CircuitSpec& spec) {
    const LadderSpec ladder = to_ladder(spec);
    Json r = Json::array();
    Json c = Json::array();
    for (const auto& s : ladder.stages) {
        r.push_back(s.R);
        c.push_back(s.C);
    }
    const char* kind = std::holds_alternative<SingleStageSpec>(spec)  ? "single"
                       : std::holds_alternative<TwoStageSpec>(spec) ? "two"
                                                                     : "ladder";
    return Json{{"kind", kind}, {"R", r}, {"C", c}};
}

CircuitSpec circuit_from_json(const Json& j) {
    Reader rd(j, "circuit");
    std::string kind;
    rd.require("kind", kind);
    const Json* rj = rd.child("R");
    const Json* cj = rd.child("C");
    rd.finish();
    if (rj == nullptr || cj == nullptr) {
        throw ConfigError("circuit: R and C arrays are required");
    }
    const auto r = number_array(*rj, "circuit R");
    const auto c = number_array(*cj, "circuit C");
    if (r.size() != c.size()) {
        throw ConfigError("circuit: R and C arrays differ in length");
    }
    CircuitSpec spec;
    if (kind == "single") {
        if (r.size() != 1) throw ConfigError("single-stage circuit needs exactly one R and one C");
        spec = SingleStageSpec{r[0], c[0]};
    } else if (kind == "two") {
        if (r.size() != 2) throw ConfigError("two-stage circuit needs exactly two R and two C");
        spec = TwoStageSpec{r[0], c[0], r[1], c[1]};
    } else if (kind == "ladder") {
        LadderSpec ladder;
        for (std::size_t i = 0; i < r.size(); ++i) {
            ladder.stages.push_back({r[i], c[i]});
        }
        spec = ladder;
    } else {
        throw ConfigError("circuit kind must be 'single', 'two' or 'ladder', got '" + kind + "'");
    }
    std::visit([](const auto& s) { s.validate(); }, spec);
    return spec;
}

Json to_json(const InputWaveform& w) {
    return Json{{"amplitude", w.amplitude}, {"period", w.period}, {"duty", w.duty}};
}

InputWaveform waveform_from_json(const Json& j) {
    InputWaveform w;
    Reader r(j, "waveform");
    r.get("amplitude", w.amplitude);
    r.get("period", w.period);
    r.get("duty", w.duty);
    r.finish();
    w.validate();
    return w;
}

Json to_json(const SimConfig& c) {
    return Json{{"schema_version", kSchemaVersion},
                {"circuit", to_json(c.circuit)},
                {"waveform", to_json(c.waveform)},
                {"t_end", c.t_end},
                {"t_split", c.t_split},
                {"rk4_step", c.rk4_step},
                {"samples_per_cycle", c.samples_per_cycle},
                {"seed", c.seed}};
}

SimConfig sim_config_from_json(const Json& j) {
    SimConfig c;
    Reader r(j, "simulation config");
    check_schema(r);
    if (const Json* circuit = r.child("circuit")) c.circuit = circuit_from_json(*circuit);
    if (const Json* waveform = r.child("waveform")) c.waveform = waveform_from_json(*waveform);
    r.get("t_end", c.t_end);
    r.get("t_split", c.t_split);
    r.get("rk4_step", c.rk4_step);
    r.get("samples_per_cycle", c.samples_per_cycle);
    r.get("seed", c.seed);
    r.finish();
    c.validate();
    return c;
}

Json to_json(const TrainConfig& c) {
    return Json{{"schema_version", kSchemaVersion},
                {"hidden_layers", c.mlp.hidden_layers},
                {"neurons_per_layer", c.mlp.neurons_per_layer},
                {"input_scale", c.mlp.input_scale},
                {"variant", to_string(c.variant)},
                {"mode", to_string(c.mode)},
                {"waveform", to_json(c.waveform)},
                {"collocation_count", c.collocation_count},
                {"collocation_strategy", to_string(c.collocation_strategy)},
                {"collocation_span", to_string(c.collocation_span)},
                {"discontinuity_offset", c.discontinuity_offset},
                {"mu_init", c.mu_init},
                {"rho_init", c.rho_init},
                {"lambda", c.lambda},
                {"lr_model", c.lr_model},
                {"lr_mu", c.lr_mu},
                {"lr_rho", c.lr_rho},
                {"steps", c.steps},
                {"seed", c.seed},
                {"log_every", c.log_every},
                {"swish_direction", to_string(c.swish_direction)},
                {"log_space", c.log_space},
                {"fit_v1", c.fit_v1},
                {"freeze", c.freeze}};
}

TrainConfig train_config_from_json(const Json& j) {
    TrainConfig c;
    Reader r(j, "train config");
    check_schema(r);
    r.get("hidden_layers", c.mlp.hidden_layers);
    r.get("neurons_per_layer", c.mlp.neurons_per_layer);
    r.get("input_scale", c.mlp.input_scale);
    std::string text;
    if (j.contains("variant")) {
        r.get("variant", text);
        c.variant = parse_variant(text);
    }
    if (j.contains("mode")) {
        r.get("mode", text);
        c.mode = parse_mode(text);
    }
    if (const Json* w = r.child("waveform")) c.waveform = waveform_from_json(*w);
    r.get("collocation_count", c.collocation_count);
    if (j.contains("collocation_strategy")) {
        r.get("collocation_strategy", text);
        c.collocation_strategy = parse_collocation(text);
    }
    if (j.contains("collocation_span")) {
        r.get("collocation_span", text);
        c.collocation_span = parse_span(text);
    }
    r.get("discontinuity_offset", c.discontinuity_offset);
    r.get("mu_init", c.mu_init);
    r.get("rho_init", c.rho_init);
    r.get("lambda", c.lambda);
    r.get("lr_model", c.lr_model);
    r.get("lr_mu", c.lr_mu);
    r.get("lr_rho", c.lr_rho);
    r.get("steps", c.steps);
    r.get("seed", c.seed);
    r.get("log_every", c.log_every);
    if (j.contains("swish_direction")) {
        r.get("swish_direction", text);
        c.swish_direction = parse_swish(text);
    }
    r.get("log_space", c.log_space);
    r.get("fit_v1", c.fit_v1);
    if (const Json* f = r.child("freeze")) {
        if (!f->is_object()) {
            throw ConfigError("train config: 'freeze' must map names to numbers");
        }
        for (const auto& [name, value] : f->items()) {
            if (!value.is_number()) {
                throw ConfigError("train config: frozen value for '" + name + "' must be a number");
            }
            c.freeze[name] = value.get<double>();
        }
    }
    r.finish();
    c.validate();
    return c;
}

Json to_json(const EqParams& p) {
    return Json{{"mu", p.mu}, {"rho", p.rho}, {"mu_frozen", p.mu_frozen}, {"rho_frozen", p.rho_frozen}};
}

EqParams eq_params_from_json(const Json& j) {
    EqParams p;
    Reader r(j, "equation parameters");
    const Json* mu = r.child("mu");
    const Json* rho = r.child("rho");
    const Json* muf = r.child("mu_frozen");
    const Json* rhof = r.child("rho_frozen");
    r.finish();
    if (!mu || !rho || !muf || !rhof) {
        throw ConfigError("equation parameters need mu, rho, mu_frozen and rho_frozen");
    }
    p.mu = number_array(*mu, "mu");
    p.rho = number_array(*rho, "rho");
    p.mu_frozen = bool_array(*muf, "mu_frozen");
    p.rho_frozen = bool_array(*rhof, "rho_frozen");
    const std::size_t n = p.mu.size();
    if (p.rho.size() != n || p.mu_frozen.size() != n || p.rho_frozen.size() != n) {
        throw ConfigError("equation parameter arrays differ in length");
    }
    return p;
}

Json to_json(const LossPoint& p) {
    return Json{{"step", p.step},
                {"total", p.total},
                {"mse_data", p.mse_data},
                {"mse_phys", p.mse_phys},
                {"penalty", p.penalty}};
}

LossPoint loss_point_from_json(const Json& j) {
    LossPoint p;
    Reader r(j, "loss point");
    r.require("step", p.step);
    r.require("total", p.total);
    r.require("mse_data", p.mse_data);
    r.require("mse_phys", p.mse_phys);
    r.require("penalty", p.penalty);
    r.finish();
    return p;
}

std::string to_string(RunStatus s) {
    return s == RunStatus::ok ? "ok" : "nan_abort";
}

RunStatus parse_status(const std::string& name) {
    if (name == "ok") return RunStatus::ok;
    if (name == "nan_abort") return RunStatus::nan_abort;
    throw ConfigError("unknown run status '" + name + "'");
}

Json to_json(const TrainReport& r) {
    Json curve = Json::array();
    for (const auto& p : r.curve) {
        curve.push_back(to_json(p));
    }
    Json j{{"schema_version", kSchemaVersion},
           {"config", to_json(r.config)},
           {"seed", r.config.seed},
           {"status", to_string(r.status)},
           {"error", r.error},
           {"steps_completed", r.steps_completed},
           {"wall_clock_seconds", r.wall_clock_seconds},
           {"curve", curve},
           {"eq", to_json(r.eq)},
           {"learned_poles", r.learned_poles},
           {"params", r.params.values}};
    return j;
}

TrainReport train_report_from_json(const Json& j) {
    TrainReport r;
    Reader rd(j, "train report");
    check_schema(rd);
    const Json* config = rd.child("config");
    if (config == nullptr) {
        throw ConfigError("train report: missing config");
    }
    r.config = train_config_from_json(*config);
    (void)rd.child("seed");  // echo of config.seed
    std::string status = "ok";
    rd.get("status", status);
    r.status = parse_status(status);
    rd.get("error", r.error);
    rd.get("steps_completed", r.steps_completed);
    rd.get("wall_clock_seconds", r.wall_clock_seconds);
    if (const Json* curve = rd.child("curve")) {
        if (!curve->is_array()) throw ConfigError("train report: curve must be an array");
        for (const auto& p : *curve) {
            r.curve.push_back(loss_point_from_json(p));
        }
    }
    if (const Json* eq = rd.child("eq")) r.eq = eq_params_from_json(*eq);
    if (const Json* poles = rd.child("learned_poles")) r.learned_poles = number_array(*poles, "learned_poles");
    if (const Json* params = rd.child("params")) r.params.values = number_array(*params, "params");
    // Fields added by the command-line tool.
    (void)rd.child("metrics");
    (void)rd.child("parameter_errors");
    (void)rd.child("true_poles");
    rd.finish();
    return r;
}

Json to_json(const Metrics& m) {
    Json j{{"mse_data", m.mse_data},
           {"mse_phys", m.mse_phys},
           {"mse_val", m.mse_val},
           {"r2_data", m.r2_data},
           {"r2_val", m.r2_val},
           {"params_positive", m.params_positive},
           {"poles_real", m.poles_real}};
    j["mape_p"] = m.mape_p ? Json(*m.mape_p) : Json(nullptr);
    return j;
}

Metrics metrics_from_json(const Json& j) {
    Metrics m;
    Reader r(j, "metrics");
    r.require("mse_data", m.mse_data);
    r.require("mse_phys", m.mse_phys);
    r.require("mse_val", m.mse_val);
    r.require("r2_data", m.r2_data);
    r.require("r2_val", m.r2_val);
    r.get("params_positive", m.params_positive);
    r.get("poles_real", m.poles_real);
    if (const Json* mape = r.child("mape_p"); mape != nullptr && !mape->is_null()) {
        m.mape_p = number_array(*mape, "mape_p");
    }
    r.finish();
    return m;
}

Json params_snapshot(const ParamVector& params, const MlpConfig& config) {
    return Json{{"schema_version", kSchemaVersion},
                {"hidden_layers", config.hidden_layers},
                {"neurons_per_layer", config.neurons_per_layer},
                {"outputs", config.outputs},
                {"input_scale", config.input_scale},
                {"seed", config.seed},
                {"values", params.values}};
}

std::pair<ParamVector, MlpConfig> params_from_snapshot(const Json& j) {
    MlpConfig c;
    ParamVector p;
    Reader r(j, "parameter snapshot");
    check_schema(r);
    r.require("hidden_layers", c.hidden_layers);
    r.require("neurons_per_layer", c.neurons_per_layer);
    r.require("outputs", c.outputs);
    r.get("input_scale", c.input_scale);
    r.get("seed", c.seed);
    const Json* values = r.child("values");
    r.finish();
    c.validate();
    if (values == nullptr) {
        throw ConfigError("parameter snapshot: missing values");
    }
    p.values = number_array(*values, "values");
    if (p.values.size() != param_count(c)) {
        throw ConfigError("parameter snapshot holds " + std::to_string(p.values.size()) + " values, layout needs " +
                          std::to_string(param_count(c)));
    }
    return {p, c};
}

Json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1;
        std::size_t column = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": invalid JSON");
    }
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_json_text(buffer.str(), path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text, bool force) {
    std::error_code ec;
    if (std::filesystem::exists(path, ec) && !force) {
        throw IoError(path.string() + " exists (use --force to overwrite)");
    }
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
    out.flush();
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

std::string dump(const Json& j) {
    return j.dump(2) + "\n";
}

}  // namespace pinnlab
