#include "cli.hpp"

#include <openssl/sha.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "pinnlab/errors.hpp"
#include "pinnlab/io.hpp"
#include "pinnlab/metrics.hpp"
#include "pinnlab/plot.hpp"
#include "pinnlab/presets.hpp"
#include "pinnlab/sweep.hpp"
#include "pinnlab/trainer.hpp"

namespace pinnlab::cli {

namespace fs = std::filesystem;

std::string git_blob_hash(const std::string& content) {
    const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (const unsigned char b : digest) {
        out += hex[b >> 4];
        out += hex[b & 15];
    }
    return out;
}

namespace {

std::shared_ptr<spdlog::logger> logger() {
    static std::shared_ptr<spdlog::logger> log = [] {
        auto l = spdlog::stderr_color_mt("pinnlab");
        l->set_pattern("[%l] %v");
        const char* env = std::getenv("PINNLAB_LOG");
        l->set_level(env != nullptr ? spdlog::level::from_str(env) : spdlog::level::info);
        return l;
    }();
    return log;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Records inputs and every artifact written for one command.
class Manifest {
public:
    Manifest(std::string command, const std::vector<std::string>& args, fs::path out_dir)
        : command_(std::move(command)), args_(args), out_dir_(std::move(out_dir)), started_(utc_now()) {}

    void input(const fs::path& path) {
        inputs_.push_back(Json{{"path", path.string()}, {"hash", git_blob_hash(read_file(path))}});
        config_paths_.push_back(path.string());
    }

    void input_text(const std::string& label, const std::string& text) {
        inputs_.push_back(Json{{"path", label}, {"hash", git_blob_hash(text)}});
    }

    void write(const fs::path& path, const std::string& text, bool force) {
        write_text_file(path, text, force);
        record(path, text);
    }

    void record(const fs::path& path, const std::string& text) {
        const fs::path rel = path.lexically_relative(out_dir_);
        artifacts_.push_back(Json{{"path", rel.empty() ? path.string() : rel.string()}, {"hash", git_blob_hash(text)}});
    }

    void finish(const fs::path& path, bool force) {
        Json j{{"schema_version", kSchemaVersion},
               {"command", command_},
               {"arguments", args_},
               {"config_paths", config_paths_},
               {"inputs", inputs_},
               {"output_directory", out_dir_.string()},
               {"artifacts", artifacts_},
               {"started_utc", started_},
               {"finished_utc", utc_now()}};
        write_text_file(path, dump(j), force);
    }

private:
    std::string command_;
    std::vector<std::string> args_;
    fs::path out_dir_;
    std::string started_;
    Json inputs_ = Json::array();
    Json artifacts_ = Json::array();
    std::vector<std::string> config_paths_;
};

// Accepts a bare circuit object or any document holding one under "circuit".
CircuitSpec load_circuit(const fs::path& path) {
    Json j = read_json_file(path);
    if (j.is_object() && j.contains("circuit")) {
        j = j.at("circuit");
    }
    if (j.is_object()) {
        j.erase("schema_version");
    }
    return circuit_from_json(j);
}

CircuitSpec reference_circuit(PhysicsVariant v) {
    return variant_stages(v) == 1 ? CircuitSpec{reference_single_stage()} : CircuitSpec{reference_two_stage()};
}

std::pair<std::string, double> parse_freeze(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("--freeze expects name=value, got '" + text + "'");
    }
    const std::string name = text.substr(0, eq);
    const std::string value = text.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size()) {
        throw ConfigError("--freeze value for '" + name + "' is not a number");
    }
    return {name, v};
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Options {
    std::string config;
    std::string out;
    std::string preset;
    std::string data;
    std::string circuit;
    std::string mode;
    std::vector<std::string> freeze;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> parallelism;
    bool force = false;
    bool resume = false;
    std::vector<std::string> reports;
};

void ensure_fresh(const fs::path& path, bool force) {
    if (fs::exists(path) && !force) {
        throw IoError(path.string() + " exists (use --force to overwrite)");
    }
}

int cmd_simulate(const Options& o, const std::vector<std::string>& args) {
    if (o.out.empty()) {
        throw ConfigError("simulate needs --out FILE.csv");
    }
    const fs::path out(o.out);
    Manifest manifest("simulate", args, out.has_parent_path() ? out.parent_path() : fs::path("."));
    SimConfig sim;
    if (!o.config.empty() && !o.preset.empty()) {
        throw ConfigError("give either --config or --preset, not both");
    }
    if (!o.config.empty()) {
        sim = sim_config_from_json(read_json_file(o.config));
        manifest.input(o.config);
    } else if (!o.preset.empty()) {
        sim = find_preset(o.preset).simulation;
        manifest.input_text("preset:" + o.preset, dump(to_json(sim)));
    } else {
        throw ConfigError("simulate needs --config FILE or --preset NAME");
    }
    const fs::path manifest_path = fs::path(out).replace_extension(".manifest.json");
    ensure_fresh(out, o.force);
    ensure_fresh(manifest_path, o.force);
    const Trajectory traj = simulate_rk4(sim);
    if (traj.step_adjusted) {
        logger()->warn("rk4 step reduced to {} s to land on switching instants", traj.max_step);
    }
    const Dataset ds = sample(traj, sim);
    if (out.has_parent_path()) {
        fs::create_directories(out.parent_path());
    }
    write_csv(ds, out);
    manifest.record(out, read_file(out));
    manifest.finish(manifest_path, o.force);
    logger()->info("wrote {} rows to {}", ds.rows.size(), out.string());
    return exit_ok;
}

TrainConfig resolve_train_config(const Options& o, Manifest& manifest, const Preset** preset_out) {
    TrainConfig config;
    *preset_out = nullptr;
    if (!o.config.empty() && !o.preset.empty()) {
        throw ConfigError("give either --config or --preset, not both");
    }
    if (!o.config.empty()) {
        config = train_config_from_json(read_json_file(o.config));
        manifest.input(o.config);
    } else if (!o.preset.empty()) {
        *preset_out = &find_preset(o.preset);
        config = (*preset_out)->config;
        manifest.input_text("preset:" + o.preset, dump(to_json(config)));
    } else {
        throw ConfigError("train needs --config FILE or --preset NAME");
    }
    if (!o.mode.empty()) {
        config.mode = parse_mode(o.mode);
    }
    for (const auto& f : o.freeze) {
        const auto [name, value] = parse_freeze(f);
        config.freeze[name] = value;
    }
    if (o.seed_override) {
        config.seed = *o.seed_override;
    }
    config.validate();
    return config;
}

Json parameter_errors(const EqParams& eq, const CircuitSpec& truth) {
    const LadderSpec ladder = to_ladder(truth);
    Json j = Json::object();
    if (ladder.order() != eq.stages()) {
        return j;
    }
    auto pct = [](double got, double want) { return 100.0 * std::abs(got - want) / std::abs(want); };
    for (std::size_t i = 0; i < eq.stages(); ++i) {
        const std::string k = std::to_string(i + 1);
        j["mu" + k] = pct(eq.mu[i], ladder.stages[i].C);
        j["rho" + k] = pct(eq.rho[i], ladder.stages[i].R);
        j["rho" + k + "_mu" + k] = pct(eq.rho[i] * eq.mu[i], ladder.stages[i].R * ladder.stages[i].C);
    }
    return j;
}

std::string curves_csv(const TrainReport& r) {
    std::string out = "step,total,mse_data,mse_phys,penalty\n";
    for (const auto& p : r.curve) {
        out += std::to_string(p.step) + "," + g17(p.total) + "," + g17(p.mse_data) + "," + g17(p.mse_phys) + "," +
               g17(p.penalty) + "\n";
    }
    return out;
}

std::string curves_svg(const TrainReport& r) {
    Series total{"total", {}, {}};
    Series data{"mse_data", {}, {}};
    Series phys{"mse_phys", {}, {}};
    for (const auto& p : r.curve) {
        for (Series* s : {&total, &data, &phys}) {
            s->x.push_back(p.step);
        }
        total.y.push_back(p.total);
        data.y.push_back(p.mse_data);
        phys.y.push_back(p.mse_phys);
    }
    return line_plot_svg({"training loss", "step", "loss (log10)"}, {total, data, phys}, true);
}

int cmd_train(const Options& o, const std::vector<std::string>& args) {
    if (o.out.empty()) {
        throw ConfigError("train needs --out DIR");
    }
    const fs::path out(o.out);
    Manifest manifest("train", args, out);
    const Preset* preset = nullptr;
    const TrainConfig config = resolve_train_config(o, manifest, &preset);

    CircuitSpec truth = reference_circuit(config.variant);
    if (!o.circuit.empty()) {
        truth = load_circuit(o.circuit);
        manifest.input(o.circuit);
    } else if (preset != nullptr) {
        truth = preset->simulation.circuit;
    } else {
        logger()->info("no --circuit given; using the reference circuit for {}", to_string(config.variant));
    }

    const fs::path report_path = out / "report.json";
    ensure_fresh(report_path, o.force);

    Dataset dataset;
    if (!o.data.empty()) {
        dataset = read_csv(o.data);
        manifest.input(o.data);
    } else {
        const SimConfig sim = preset != nullptr ? preset->simulation : reference_simulation(truth);
        SimConfig with_truth = sim;
        with_truth.circuit = truth;
        dataset = generate_dataset(with_truth);
        const fs::path data_path = out / "data.csv";
        ensure_fresh(data_path, o.force);
        fs::create_directories(out);
        write_csv(dataset, data_path);
        manifest.record(data_path, read_file(data_path));
        logger()->info("no --data given; simulated {} rows", dataset.rows.size());
    }

    logger()->info("training {} / {} for {} steps (seed {})", to_string(config.variant), to_string(config.mode),
                   config.steps, config.seed);
    const TrainReport report =
        train(config, dataset, truth, [](const LossPoint& p, const ParamVector&, const EqParams&) {
            logger()->debug("step {} total {:.6e} data {:.6e} phys {:.6e} penalty {:.6e}", p.step, p.total,
                            p.mse_data, p.mse_phys, p.penalty);
        });
    const Metrics metrics = score(report, dataset, truth);

    Json j = to_json(report);
    j["metrics"] = to_json(metrics);
    j["true_poles"] = true_poles(truth).values;
    j["parameter_errors"] = config.mode == Mode::forward ? Json::object() : parameter_errors(report.eq, truth);
    manifest.write(report_path, dump(j), o.force);
    manifest.write(out / "curves.csv", curves_csv(report), o.force);
    manifest.write(out / "curves.svg", curves_svg(report), o.force);
    manifest.write(out / "params.json", dump(params_snapshot(report.params, config.network())), o.force);
    manifest.finish(out / "manifest.json", o.force);

    logger()->info("r2_data {:.6f} r2_val {:.6f} mse_phys {:.3e} ({:.1f} s)", metrics.r2_data, metrics.r2_val,
                   metrics.mse_phys, report.wall_clock_seconds);
    if (report.status == RunStatus::nan_abort) {
        logger()->error("numerical abort: {}", report.error);
        return exit_numeric;
    }
    return exit_ok;
}

int cmd_poles(const Options& o, const std::vector<std::string>& args) {
    if (o.config.empty()) {
        throw ConfigError("poles needs --config CIRCUIT.json");
    }
    const CircuitSpec circuit = load_circuit(o.config);
    Json j{{"schema_version", kSchemaVersion}, {"circuit", to_json(circuit)}};
    const Poles eig = poles_eig(to_ladder(circuit));
    if (std::holds_alternative<LadderSpec>(circuit)) {
        j["method"] = "eigenvalues";
        j["poles"] = eig.values;
    } else {
        const Poles closed = true_poles(circuit);
        j["method"] = "closed_form";
        j["poles"] = closed.values;
        Json rel = Json::array();
        for (std::size_t i = 0; i < closed.values.size(); ++i) {
            rel.push_back(std::abs(closed.values[i] - eig.values[i]) / std::abs(eig.values[i]));
        }
        j["eigenvalue_check"] = Json{{"poles", eig.values}, {"relative_difference", rel}};
    }
    const std::string text = dump(j);
    if (!o.out.empty()) {
        const fs::path out(o.out);
        Manifest manifest("poles", args, out.has_parent_path() ? out.parent_path() : fs::path("."));
        manifest.input(o.config);
        ensure_fresh(out, o.force);
        manifest.write(out, text, o.force);
        manifest.finish(fs::path(out).replace_extension(".manifest.json"), o.force);
    }
    std::cout << text;
    return exit_ok;
}

int cmd_sweep(const Options& o, const std::vector<std::string>& args) {
    if (o.config.empty() || o.out.empty()) {
        throw ConfigError("sweep needs --config SWEEP.json and --out DIR");
    }
    const fs::path out(o.out);
    Manifest manifest("sweep", args, out);
    SweepConfig config = sweep_config_from_json(read_json_file(o.config));
    manifest.input(o.config);
    if (o.parallelism) {
        config.parallelism = *o.parallelism;
    }
    if (o.seed_override) {
        config.master_seed = *o.seed_override;
    }
    config.validate();

    CircuitSpec truth = reference_circuit(config.base.variant);
    if (!o.circuit.empty()) {
        truth = load_circuit(o.circuit);
        manifest.input(o.circuit);
    }
    Dataset dataset;
    if (!o.data.empty()) {
        dataset = read_csv(o.data);
        manifest.input(o.data);
    } else {
        dataset = generate_dataset(reference_simulation(truth));
        logger()->info("no --data given; simulated {} rows", dataset.rows.size());
    }

    const fs::path log_path = out / "trials.jsonl";
    if (fs::exists(log_path) && !o.resume) {
        if (!o.force) {
            throw IoError(log_path.string() + " exists (use --resume or --force)");
        }
        fs::remove(log_path);
    }
    for (const char* name : {"summary.csv", "boxplot.svg", "best.json", "manifest.json"}) {
        ensure_fresh(out / name, o.force || o.resume);
    }
    logger()->info("sweep of {} trials, parallelism {}", config.n_trials, config.parallelism);
    const std::vector<Trial> trials = run_sweep(config, dataset, truth, log_path, o.resume);
    manifest.record(log_path, read_file(log_path));

    const bool overwrite = true;  // freshness checked above
    const Summary summary = summarize(trials, config.group_by);
    for (const auto& w : summary.warnings) {
        logger()->warn("{}", w);
    }
    manifest.write(out / "summary.csv", summary_csv(summary), overwrite);
    manifest.write(out / "boxplot.svg",
                   box_plot_svg({"validation R^2 by " + (config.group_by.empty() ? std::string("all") : config.group_by),
                                 config.group_by, "r2_val"},
                                summary.groups),
                   overwrite);
    if (const auto best = best_trial(trials, config.objective)) {
        manifest.write(out / "best.json", dump(to_json(*best)), overwrite);
    }
    manifest.finish(out / "manifest.json", overwrite);

    std::size_t failed = 0;
    for (const auto& t : trials) {
        failed += t.status == TrialStatus::ok ? 0 : 1;
    }
    logger()->info("{} trials logged, {} not ok", trials.size(), failed);
    return exit_ok;
}

std::string problem_label(Mode m) {
    switch (m) {
        case Mode::forward: return "FP";
        case Mode::inverse: return "IP";
        case Mode::forward_given_inverse: return "F/I";
    }
    return "?";
}

int cmd_report(const Options& o, const std::vector<std::string>& args) {
    if (o.reports.empty()) {
        throw ConfigError("report needs at least one report.json");
    }
    std::string table =
        "| Run | Phys. loss | Problem | ill-posed | MSE_data | MSE_phys | MSE_val | R2_data | R2_val | MAPE_p |\n"
        "|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& path : o.reports) {
        const Json j = read_json_file(path);
        const TrainReport r = train_report_from_json(j);
        if (!j.contains("metrics")) {
            throw ConfigError(path + " has no metrics block");
        }
        const Metrics m = metrics_from_json(j.at("metrics"));
        std::string mape = "--";
        if (m.mape_p) {
            mape.clear();
            for (const double v : *m.mape_p) {
                mape += (mape.empty() ? "" : "/") + short_num(v);
            }
        } else if (r.config.mode != Mode::forward) {
            mape = "complex";
        }
        const fs::path p(path);
        const std::string run = p.parent_path().filename().empty() ? p.stem().string()
                                                                    : p.parent_path().filename().string();
        table += "| " + run + " | " + to_string(r.config.variant) + " | " + problem_label(r.config.mode) + " | " +
                 (r.config.mode == Mode::forward ? "no" : "yes") + " | " + short_num(m.mse_data) + " | " +
                 short_num(m.mse_phys) + " | " + short_num(m.mse_val) + " | " + short_num(m.r2_data) + " | " +
                 short_num(m.r2_val) + " | " + mape + " |\n";
    }
    if (!o.out.empty()) {
        const fs::path out(o.out);
        Manifest manifest("report", args, out.has_parent_path() ? out.parent_path() : fs::path("."));
        for (const auto& path : o.reports) {
            manifest.input(path);
        }
        ensure_fresh(out, o.force);
        manifest.write(out, table, o.force);
        manifest.finish(fs::path(out).replace_extension(".manifest.json"), o.force);
    }
    std::cout << table;
    return exit_ok;
}

int cmd_presets() {
    for (const Preset& p : presets()) {
        std::cout << p.name << "  " << to_string(p.config.variant) << " " << to_string(p.config.mode) << " "
                  << p.config.mlp.hidden_layers << "x" << p.config.mlp.neurons_per_layer << " steps "
                  << p.config.steps << "  " << p.description << "\n";
    }
    return exit_ok;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"pinnlab: RC-circuit PINN laboratory"};
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;
    int parallelism = 0;

    auto* simulate = app.add_subcommand("simulate", "Simulate a circuit and write a sampled CSV dataset");
    simulate->add_option("--config", o.config, "Simulation config JSON");
    simulate->add_option("--preset", o.preset, "Use a preset's simulation settings");
    simulate->add_option("--out", o.out, "Output CSV path");
    simulate->add_flag("--force", o.force, "Overwrite existing files");

    auto* train_cmd = app.add_subcommand("train", "Train a PINN and write report, curves and parameters");
    train_cmd->add_option("--config", o.config, "Train config JSON");
    train_cmd->add_option("--preset", o.preset, "Named preset (see `presets`)");
    train_cmd->add_option("--data", o.data, "Dataset CSV (simulated when omitted)");
    train_cmd->add_option("--circuit", o.circuit, "True circuit JSON");
    train_cmd->add_option("--out", o.out, "Output directory");
    train_cmd->add_option("--mode", o.mode, "forward | inverse | forward_given_inverse");
    train_cmd->add_option("--freeze", o.freeze, "Freeze a parameter, e.g. rho2=20000")->take_all();
    auto* train_seed = train_cmd->add_option("--seed-override", seed, "Replace the config seed");
    train_cmd->add_flag("--force", o.force, "Overwrite existing files");

    auto* poles = app.add_subcommand("poles", "Print circuit poles as JSON");
    poles->add_option("--config", o.config, "Circuit JSON (or a document with a \"circuit\" key)");
    poles->add_option("--out", o.out, "Also write the JSON here");
    poles->add_flag("--force", o.force, "Overwrite existing files");

    auto* sweep = app.add_subcommand("sweep", "Run a random hyperparameter sweep");
    sweep->add_option("--config", o.config, "Sweep config JSON");
    sweep->add_option("--data", o.data, "Dataset CSV (simulated when omitted)");
    sweep->add_option("--circuit", o.circuit, "True circuit JSON");
    sweep->add_option("--out", o.out, "Output directory");
    auto* sweep_par = sweep->add_option("--parallelism", parallelism, "Concurrent trials")->check(CLI::PositiveNumber);
    auto* sweep_seed = sweep->add_option("--seed-override", seed, "Replace the master seed");
    sweep->add_flag("--resume", o.resume, "Skip trials already in trials.jsonl");
    sweep->add_flag("--force", o.force, "Overwrite existing files");

    auto* report = app.add_subcommand("report", "Tabulate train reports as markdown");
    report->add_option("reports", o.reports, "report.json files")->required();
    report->add_option("--out", o.out, "Also write the table here");
    report->add_flag("--force", o.force, "Overwrite existing files");

    auto* list = app.add_subcommand("presets", "List named presets");

    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }
    if (train_seed->count() > 0 || sweep_seed->count() > 0) {
        o.seed_override = seed;
    }
    if (sweep_par->count() > 0) {
        o.parallelism = parallelism;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(o, args);
        if (train_cmd->parsed()) return cmd_train(o, args);
        if (poles->parsed()) return cmd_poles(o, args);
        if (sweep->parsed()) return cmd_sweep(o, args);
        if (report->parsed()) return cmd_report(o, args);
        if (list->parsed()) return cmd_presets();
    } catch (const ConfigError& e) {
        logger()->error("{}", e.what());
        return exit_config;
    } catch (const IoError& e) {
        logger()->error("{}", e.what());
        return exit_io;
    } catch (const NumericError& e) {
        logger()->error("{}", e.what());
        return exit_numeric;
    } catch (const fs::filesystem_error& e) {
        logger()->error("{}", e.what());
        return exit_io;
    }
    return exit_config;
}

}  // namespace pinnlab::cli
