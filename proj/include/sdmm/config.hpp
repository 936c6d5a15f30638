#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sdmm/detail/format.hpp"
#include "sdmm/errors.hpp"
#include "sdmm/sim.hpp"

namespace sdmm {

inline std::string to_string(Norm n) { return n == Norm::L1 ? "l1" : "l2"; }

inline Norm parse_norm(const std::string& s) {
    if (s == "l1" || s == "L1") return Norm::L1;
    if (s == "l2" || s == "L2") return Norm::L2;
    throw ConfigError("unknown norm: '" + s + "' (expected l1 or l2)");
}

inline std::string to_string(SynopsisMode m) {
    return m == SynopsisMode::DominantMean ? "dominant_mean" : "dominant_mean_std";
}

inline SynopsisMode parse_synopsis_mode(const std::string& s) {
    if (s == "dominant_mean") return SynopsisMode::DominantMean;
    if (s == "dominant_mean_std") return SynopsisMode::DominantMeanStd;
    throw ConfigError("unknown synopsis_mode: '" + s + "'");
}

// A simulation config plus the sweep axes. window_list/eta_list default to
// the base values; setting either to an empty value empties the grid.
struct ExperimentConfig {
    SimConfig base;
    std::vector<std::size_t> window_list;
    std::vector<double> eta_list;
    std::size_t runs = 50;
    bool window_list_set = false;
    bool eta_list_set = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
    std::istringstream is(value);
    T v{};
    is >> v;
    if (is.fail() || !is.eof()) {
        throw ConfigError("bad value for " + key + ": '" + value + "'");
    }
    return v;
}

inline bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("bad value for " + key + ": '" + value + "' (expected true/false)");
}

}  // namespace detail

// Flat key = value text, '#' comments. Unknown keys are rejected so typos
// cannot silently fall back to defaults.
inline ExperimentConfig parse_config(std::istream& in, const std::string& name = "config") {
    ExperimentConfig exp;
    SimConfig& cfg = exp.base;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(name + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        try {
            if (key == "nodes") cfg.nodes = detail::parse_number<std::size_t>(value, key);
            else if (key == "dim") cfg.dim = detail::parse_number<std::size_t>(value, key);
            else if (key == "window") cfg.window = detail::parse_number<std::size_t>(value, key);
            else if (key == "eta") cfg.eta = detail::parse_number<double>(value, key);
            else if (key == "xi") cfg.xi = detail::parse_number<double>(value, key);
            else if (key == "zeta") cfg.zeta = detail::parse_number<double>(value, key);
            else if (key == "zeta_hat") cfg.zeta_hat = detail::parse_number<double>(value, key);
            else if (key == "clusters") cfg.cluster_count = detail::parse_number<std::size_t>(value, key);
            else if (key == "norm") cfg.norm = parse_norm(value);
            else if (key == "epoch_points") cfg.epoch_points = detail::parse_number<std::size_t>(value, key);
            else if (key == "epochs") cfg.epochs = detail::parse_number<std::size_t>(value, key);
            else if (key == "top_k") cfg.top_k = detail::parse_number<std::size_t>(value, key);
            else if (key == "seed") cfg.seed = detail::parse_number<std::uint64_t>(value, key);
            else if (key == "mkm_literal") cfg.mkm_literal = detail::parse_bool(value, key);
            else if (key == "synopsis_mode") cfg.synopsis_mode = parse_synopsis_mode(value);
            else if (key == "absorb_threshold") cfg.absorb_threshold = detail::parse_number<double>(value, key);
            else if (key == "warmup_points") cfg.warmup_points = detail::parse_number<std::size_t>(value, key);
            else if (key == "branching_factor") cfg.branching_factor = detail::parse_number<std::size_t>(value, key);
            else if (key == "drop_probability") cfg.drop_probability = detail::parse_number<double>(value, key);
            else if (key == "ma_window") cfg.ma_window = detail::parse_number<std::size_t>(value, key);
            else if (key == "runs") exp.runs = detail::parse_number<std::size_t>(value, key);
            else if (key == "synth_kind") cfg.synth.kind = parse_trace_kind(value);
            else if (key == "synth_mean_step") cfg.synth.mean_step = detail::parse_number<double>(value, key);
            else if (key == "synth_sigma") cfg.synth.sigma = detail::parse_number<double>(value, key);
            else if (key == "synth_drift_slope") cfg.synth.drift_slope = detail::parse_number<double>(value, key);
            else if (key == "synth_shift_point") cfg.synth.shift_point = detail::parse_number<std::size_t>(value, key);
            else if (key == "synth_shift_magnitude") cfg.synth.shift_magnitude = detail::parse_number<double>(value, key);
            else if (key == "window_list") {
                exp.window_list_set = true;
                exp.window_list.clear();
                for (const auto& item : detail::split_list(value))
                    exp.window_list.push_back(detail::parse_number<std::size_t>(item, key));
            } else if (key == "eta_list") {
                exp.eta_list_set = true;
                exp.eta_list.clear();
                for (const auto& item : detail::split_list(value))
                    exp.eta_list.push_back(detail::parse_number<double>(item, key));
            } else {
                throw ConfigError("unknown key '" + key + "'");
            }
        } catch (const ConfigError& e) {
            throw ConfigError(name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!exp.window_list_set) exp.window_list = {cfg.window};
    if (!exp.eta_list_set) exp.eta_list = {cfg.eta};
    return exp;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in, path);
}

// Cross product of the sweep axes. Each grid point runs epochs = W so the
// decision epoch t = W is the last one.
inline std::vector<SimConfig> expand_grid(const ExperimentConfig& exp) {
    std::vector<SimConfig> grid;
    for (std::size_t w : exp.window_list) {
        for (double eta : exp.eta_list) {
            SimConfig cfg = exp.base;
            cfg.window = w;
            cfg.eta = eta;
            cfg.epochs = std::max(cfg.epochs, w);
            grid.push_back(cfg);
        }
    }
    return grid;
}

// Fully-resolved parameter set; rereading it as a config reproduces the run.
inline void write_config_echo(const SimConfig& cfg, std::ostream& out) {
    out << "nodes = " << cfg.nodes << '\n'
        << "dim = " << cfg.dim << '\n'
        << "window = " << cfg.window << '\n'
        << "eta = " << detail::fmt_double(cfg.eta) << '\n'
        << "xi = " << detail::fmt_double(cfg.xi) << '\n'
        << "zeta = " << detail::fmt_double(cfg.zeta) << '\n'
        << "zeta_hat = " << detail::fmt_double(cfg.zeta_hat) << '\n'
        << "clusters = " << cfg.cluster_count << '\n'
        << "norm = " << to_string(cfg.norm) << '\n'
        << "epoch_points = " << cfg.epoch_points << '\n'
        << "epochs = " << cfg.epochs << '\n'
        << "top_k = " << cfg.top_k << '\n'
        << "seed = " << cfg.seed << '\n'
        << "mkm_literal = " << (cfg.mkm_literal ? "true" : "false") << '\n'
        << "synopsis_mode = " << to_string(cfg.synopsis_mode) << '\n'
        << "absorb_threshold = " << detail::fmt_double(cfg.absorb_threshold) << '\n'
        << "warmup_points = " << cfg.warmup_points << '\n'
        << "branching_factor = " << cfg.branching_factor << '\n'
        << "drop_probability = " << detail::fmt_double(cfg.drop_probability) << '\n'
        << "ma_window = " << cfg.ma_window << '\n'
        << "synth_kind = " << to_string(cfg.synth.kind) << '\n'
        << "synth_mean_step = " << detail::fmt_double(cfg.synth.mean_step) << '\n'
        << "synth_sigma = " << detail::fmt_double(cfg.synth.sigma) << '\n'
        << "synth_drift_slope = " << detail::fmt_double(cfg.synth.drift_slope) << '\n'
        << "synth_shift_point = " << cfg.synth.shift_point << '\n'
        << "synth_shift_magnitude = " << detail::fmt_double(cfg.synth.shift_magnitude) << '\n';
}

}  // namespace sdmm
