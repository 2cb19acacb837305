#include "pinnlab/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "pinnlab/errors.hpp"

namespace pinnlab {

namespace {

constexpr double kPassiveSlack = 1e-9;

struct Segment {
    double t0;
    double t1;
    double input;
};

/// Constant-input pieces of the waveform covering [0, t_end].
std::vector<Segment> input_segments(const InputWaveform& w, double t_end) {
    std::vector<Segment> segments;
    const double high = w.duty * w.period;
    for (long cycle = 0;; ++cycle) {
        const double start = static_cast<double>(cycle) * w.period;
        if (start >= t_end) {
            break;
        }
        const double mid = start + high;
        const double stop = static_cast<double>(cycle + 1) * w.period;
        segments.push_back({start, std::min(mid, t_end), w.amplitude});
        if (mid < t_end) {
            segments.push_back({mid, std::min(stop, t_end), 0.0});
        }
    }
    return segments;
}

void rk4_step(const Matrix& a, const std::vector<double>& b, double u, double h, std::vector<double>& x,
              std::vector<double>& k1, std::vector<double>& k2, std::vector<double>& k3,
              std::vector<double>& k4, std::vector<double>& tmp) {
    const std::size_t n = x.size();
    auto deriv = [&](const std::vector<double>& s, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = b[i] * u;
            for (std::size_t j = 0; j < n; ++j) acc += a(i, j) * s[j];
            out[i] = acc;
        }
    };
    deriv(x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    deriv(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    deriv(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    deriv(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

const char* split_name(Split s) {
    return s == Split::train ? "train" : "val";
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_number(const std::string& text, std::size_t line) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v)) {
        throw ConfigError("line " + std::to_string(line) + ": '" + text + "' is not a finite number");
    }
    return v;
}

}  // namespace

void InputWaveform::validate() const {
    if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
        throw ConfigError("waveform amplitude must be positive");
    }
    if (!(period > 0.0) || !std::isfinite(period)) {
        throw ConfigError("waveform period must be positive");
    }
    if (!(duty > 0.0 && duty < 1.0)) {
        throw ConfigError("waveform duty must lie in (0, 1)");
    }
}

double v_in_at(const InputWaveform& waveform, double t) {
    if (t < 0.0) {
        throw ConfigError("v_in is defined for t >= 0");
    }
    const double phase = std::fmod(t, waveform.period);
    return phase < waveform.duty * waveform.period ? waveform.amplitude : 0.0;
}

std::vector<double> switching_instants(const InputWaveform& waveform, double t0, double t1) {
    std::vector<double> out;
    const double high = waveform.duty * waveform.period;
    const auto first = static_cast<long>(std::floor(t0 / waveform.period)) - 1;
    for (long cycle = std::max(0L, first);; ++cycle) {
        const double start = static_cast<double>(cycle) * waveform.period;
        if (start > t1) {
            break;
        }
        for (const double s : {start, start + high}) {
            if (s >= t0 && s <= t1) {
                out.push_back(s);
            }
        }
    }
    return out;
}

double distance_to_switch(const InputWaveform& waveform, double t) {
    const double high = waveform.duty * waveform.period;
    const double phase = std::fmod(t, waveform.period);
    const double to_start = std::min(phase, waveform.period - phase);
    return std::min(to_start, std::abs(phase - high));
}

void SimConfig::validate() const {
    std::visit([](const auto& c) { c.validate(); }, circuit);
    waveform.validate();
    if (!(t_end > 0.0)) {
        throw ConfigError("t_end must be positive");
    }
    if (!(t_split > 0.0 && t_split < t_end)) {
        throw ConfigError("t_split must lie in (0, t_end)");
    }
    if (!(rk4_step > 0.0) || rk4_step > waveform.period / 100.0) {
        throw ConfigError("rk4_step must be positive and at most period/100");
    }
    if (samples_per_cycle < 2) {
        throw ConfigError("samples_per_cycle must be >= 2");
    }
}

Trajectory simulate_rk4(const SimConfig& config) {
    config.validate();
    const LadderSpec ladder = to_ladder(config.circuit);
    const Matrix a = state_matrix(ladder);
    const std::vector<double> b = input_vector(ladder);
    const std::size_t n = ladder.order();

    Trajectory traj;
    traj.order = n;
    traj.amplitude = config.waveform.amplitude;
    std::vector<double> x(n, 0.0);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

    traj.time.push_back(0.0);
    traj.state.insert(traj.state.end(), x.begin(), x.end());
    for (const Segment& seg : input_segments(config.waveform, config.t_end)) {
        const double length = seg.t1 - seg.t0;
        const auto steps = static_cast<long>(std::ceil(length / config.rk4_step - 1e-9));
        const double h = length / static_cast<double>(steps);
        if (std::abs(h - config.rk4_step) > 1e-12 * config.rk4_step) {
            traj.step_adjusted = true;
        }
        traj.max_step = std::max(traj.max_step, h);
        for (long s = 1; s <= steps; ++s) {
            rk4_step(a, b, seg.input, h, x, k1, k2, k3, k4, tmp);
            traj.time.push_back(s == steps ? seg.t1 : seg.t0 + static_cast<double>(s) * h);
            traj.state.insert(traj.state.end(), x.begin(), x.end());
        }
    }
    return traj;
}

std::vector<DataRow> Dataset::rows_in(Split split) const {
    std::vector<DataRow> out;
    for (const auto& r : rows) {
        if (r.split == split) {
            out.push_back(r);
        }
    }
    return out;
}

void Dataset::validate() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const DataRow& r = rows[i];
        if (!std::isfinite(r.t) || !std::isfinite(r.v_in) || !std::isfinite(r.v_1) || !std::isfinite(r.v_out)) {
            throw ConfigError("row " + std::to_string(i) + " holds a non-finite value");
        }
        if (i > 0 && !(r.t > rows[i - 1].t)) {
            throw ConfigError("row " + std::to_string(i) + ": times must be strictly increasing");
        }
    }
}

Dataset sample(const Trajectory& trajectory, const SimConfig& config) {
    config.validate();
    if (trajectory.size() < 2) {
        throw ConfigError("trajectory is empty");
    }
    const double period = config.waveform.period;
    const auto per_cycle = static_cast<double>(config.samples_per_cycle);
    // k * period / n keeps grid points on whole periods exact.
    auto grid = [&](std::size_t k) { return static_cast<double>(k) * period / per_cycle; };
    const auto count = static_cast<std::size_t>(std::ceil(config.t_end * per_cycle / period - 1e-9));
    const double last_needed = grid(count - 1);
    if (trajectory.time.back() < last_needed) {
        throw ConfigError("trajectory ends at " + std::to_string(trajectory.time.back()) +
                          " s, sampling needs " + std::to_string(last_needed) + " s");
    }

    Dataset ds;
    ds.has_v1 = trajectory.order == 2;
    ds.rows.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double t = grid(k);
        const auto hi_it = std::lower_bound(trajectory.time.begin(), trajectory.time.end(), t);
        const std::size_t hi = static_cast<std::size_t>(hi_it - trajectory.time.begin());
        auto interp = [&](std::size_t node) {
            if (trajectory.time[hi] == t) {
                return trajectory.at(hi, node);
            }
            const std::size_t lo = hi - 1;
            const double w = (t - trajectory.time[lo]) / (trajectory.time[hi] - trajectory.time[lo]);
            const double a = trajectory.at(lo, node);
            return a + w * (trajectory.at(hi, node) - a);
        };
        DataRow row;
        row.t = t;
        row.v_in = v_in_at(config.waveform, t);
        row.v_out = interp(trajectory.order - 1);
        row.v_1 = ds.has_v1 ? interp(0) : 0.0;
        row.split = t < config.t_split ? Split::train : Split::val;
        if (row.v_out < -kPassiveSlack || row.v_out > config.waveform.amplitude + kPassiveSlack) {
            throw NumericError("sampled v_out leaves the passive range at t = " + std::to_string(t));
        }
        ds.rows.push_back(row);
    }
    return ds;
}

Dataset generate_dataset(const SimConfig& config) {
    return sample(simulate_rk4(config), config);
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    std::fputs(dataset.has_v1 ? "t,v_in,v_1,v_out,split\n" : "t,v_in,v_out,split\n", f);
    for (const DataRow& r : dataset.rows) {
        if (dataset.has_v1) {
            std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%s\n", r.t, r.v_in, r.v_1, r.v_out, split_name(r.split));
        } else {
            std::fprintf(f, "%.17g,%.17g,%.17g,%s\n", r.t, r.v_in, r.v_out, split_name(r.split));
        }
    }
    const bool failed = std::ferror(f) != 0;
    if (std::fclose(f) != 0 || failed) {
        throw IoError("failed writing " + path.string());
    }
}

Dataset read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError(path.string() + ": missing header");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();

    Dataset ds;
    if (line == "t,v_in,v_1,v_out,split") {
        ds.has_v1 = true;
    } else if (line != "t,v_in,v_out,split") {
        throw ConfigError(path.string() + ": line 1: expected header 't,v_in[,v_1],v_out,split'");
    }
    const std::size_t columns = ds.has_v1 ? 5 : 4;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != columns) {
            throw ConfigError(path.string() + ": line " + std::to_string(line_no) + ": expected " +
                              std::to_string(columns) + " fields, found " + std::to_string(fields.size()));
        }
        DataRow r;
        std::size_t c = 0;
        r.t = parse_number(fields[c++], line_no);
        r.v_in = parse_number(fields[c++], line_no);
        if (ds.has_v1) {
            r.v_1 = parse_number(fields[c++], line_no);
        }
        r.v_out = parse_number(fields[c++], line_no);
        const std::string& tag = fields[c];
        if (tag == "train") {
            r.split = Split::train;
        } else if (tag == "val") {
            r.split = Split::val;
        } else {
            throw ConfigError(path.string() + ": line " + std::to_string(line_no) + ": split must be train or val");
        }
        if (!ds.rows.empty() && !(r.t > ds.rows.back().t)) {
            throw ConfigError(path.string() + ": line " + std::to_string(line_no) + ": t is not increasing");
        }
        ds.rows.push_back(r);
    }
    return ds;
}

}  // namespace pinnlab
