// Command-line driver: run simulations and experiment sweeps, synthesize
// traces, inspect recorded similarity maps.
//
// Exit codes: 0 success, 1 bad usage or config, 2 bad input data.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdmm/sdmm.hpp"

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
    if (!out) throw sdmm::DataError("cannot write " + path.string());
    return out;
}

sdmm::Trace load_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw sdmm::DataError("cannot open trace file: " + path);
    return sdmm::read_trace_csv(in, path);
}

// Adapts a config to a replay trace: node count and dimensionality come
// from the data.
void fit_to_trace(sdmm::SimConfig& cfg, const sdmm::Trace& trace) {
    cfg.nodes = trace.node_count();
    cfg.dim = trace.dim();
    if (cfg.top_k > cfg.nodes - 1) cfg.top_k = cfg.nodes - 1;
}

void write_quanta_csv(const sdmm::EpochLog& log, std::ostream& out) {
    out << "epoch,node,peer,quantum\n";
    const auto n = static_cast<int>(log.cfg.nodes);
    for (std::size_t t = 1; t <= log.epochs_run; ++t) {
        for (int i = 1; i <= n; ++i) {
            for (int j = 1; j <= n; ++j) {
                if (i == j) continue;
                out << t << ',' << i << ',' << j << ','
                    << sdmm::detail::fmt_double(log.quantum_at(i, j, t)) << '\n';
            }
        }
    }
}

void write_maps_csv(const sdmm::EpochLog& log, std::ostream& out) {
    out << "epoch,owner,rank,peer,aggregated,similarity,trend_z,trend_factor,score\n";
    for (std::size_t t = 1; t <= log.epochs_run; ++t) {
        for (std::size_t i = 1; i <= log.cfg.nodes; ++i) {
            const auto& map = log.map_at(static_cast<int>(i), t);
            std::size_t rank = 1;
            for (const auto& ps : map.ranked) {
                out << t << ',' << map.owner << ',' << rank++ << ',' << ps.peer << ','
                    << sdmm::detail::fmt_double(ps.aggregated) << ','
                    << sdmm::detail::fmt_double(ps.similarity) << ','
                    << sdmm::detail::fmt_double(ps.trend_z) << ','
                    << sdmm::detail::fmt_double(ps.trend_factor) << ','
                    << sdmm::detail::fmt_double(ps.score) << '\n';
            }
        }
    }
}

void write_final_maps(const sdmm::EpochLog& log, std::ostream& out) {
    const std::size_t t = log.epochs_run;
    out << "similarity maps at epoch " << t << "\n";
    for (std::size_t i = 1; i <= log.cfg.nodes; ++i) {
        const auto& map = log.map_at(static_cast<int>(i), t);
        out << "node " << map.owner << ":";
        if (map.ranked.empty()) {
            out << " (no warm peers)\n";
            continue;
        }
        out << '\n';
        std::size_t rank = 1;
        for (const auto& ps : map.ranked) {
            out << "  " << rank++ << ". peer " << ps.peer
                << "  score=" << sdmm::detail::fmt_double(ps.score)
                << "  similarity=" << sdmm::detail::fmt_double(ps.similarity)
                << "  trend_z=" << sdmm::detail::fmt_double(ps.trend_z) << '\n';
        }
    }
}

int cmd_simulate(const std::string& config_path, const std::optional<std::string>& trace_path,
                 const std::string& out_dir, const std::optional<std::uint64_t>& seed) {
    sdmm::ExperimentConfig exp = sdmm::load_config(config_path);
    sdmm::SimConfig cfg = exp.base;
    if (seed) cfg.seed = *seed;

    sdmm::Trace trace = trace_path ? load_trace(*trace_path)
                                   : sdmm::synth_trace(cfg.synth_params(), cfg.seed);
    if (trace_path) fit_to_trace(cfg, trace);
    cfg.validate();

    const sdmm::EpochLog log = sdmm::run_simulation(cfg, trace);

    fs::create_directories(out_dir);
    {
        auto out = open_out(fs::path(out_dir) / "config_echo.txt");
        sdmm::write_config_echo(cfg, out);
    }
    {
        auto out = open_out(fs::path(out_dir) / "quanta.csv");
        write_quanta_csv(log, out);
    }
    {
        auto out = open_out(fs::path(out_dir) / "maps.csv");
        write_maps_csv(log, out);
    }
    {
        auto out = open_out(fs::path(out_dir) / "final_maps.txt");
        write_final_maps(log, out);
    }
    std::cout << "simulated " << log.epochs_run << " epochs, " << cfg.nodes
              << " nodes; results in " << out_dir << '\n';
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::optional<std::string>& trace_path,
              const std::string& out_dir, std::optional<std::size_t> runs_override) {
    sdmm::ExperimentConfig exp = sdmm::load_config(config_path);
    if (runs_override) exp.runs = *runs_override;

    std::optional<sdmm::Trace> trace;
    if (trace_path) trace = load_trace(*trace_path);

    std::vector<sdmm::SimConfig> grid = sdmm::expand_grid(exp);
    if (grid.empty()) throw sdmm::ConfigError("empty grid");
    for (auto& cfg : grid) {
        if (trace) fit_to_trace(cfg, *trace);
        cfg.validate();
    }

    const auto reports =
        sdmm::run_experiment(grid, exp.runs, trace ? &*trace : nullptr);

    fs::create_directories(out_dir);
    {
        auto out = open_out(fs::path(out_dir) / "config_echo.txt");
        sdmm::write_config_echo(exp.base, out);
        out << "runs = " << exp.runs << '\n' << "window_list =";
        for (std::size_t i = 0; i < exp.window_list.size(); ++i)
            out << (i ? "," : " ") << exp.window_list[i];
        out << '\n' << "eta_list =";
        for (std::size_t i = 0; i < exp.eta_list.size(); ++i)
            out << (i ? "," : " ") << sdmm::detail::fmt_double(exp.eta_list[i]);
        out << '\n';
    }
    {
        auto out = open_out(fs::path(out_dir) / "metrics.csv");
        sdmm::write_metrics_csv(reports, out);
    }
    std::cout << "swept " << grid.size() << " grid points x " << exp.runs
              << " runs; metrics in " << (fs::path(out_dir) / "metrics.csv").string() << '\n';
    return 0;
}

int cmd_synth(const std::string& kind, const std::optional<std::string>& config_path,
              const std::string& out_file, std::optional<std::uint64_t> seed) {
    sdmm::SimConfig cfg;
    if (config_path) cfg = sdmm::load_config(*config_path).base;
    cfg.synth.kind = sdmm::parse_trace_kind(kind);
    if (seed) cfg.seed = *seed;
    const sdmm::Trace trace = sdmm::synth_trace(cfg.synth_params(), cfg.seed);
    auto out = open_out(out_file);
    sdmm::write_trace_csv(trace, out);
    std::cout << "wrote " << trace.node_count() << "-node trace to " << out_file << '\n';
    return 0;
}

int cmd_inspect(const std::string& log_dir, int node, std::size_t epoch) {
    const fs::path path = fs::path(log_dir) / "maps.csv";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw sdmm::DataError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line) ||
        line.rfind("epoch,owner,rank,peer", 0) != 0) {
        throw sdmm::DataError(path.string() + ":1: not a maps.csv file");
    }
    bool any = false;
    std::size_t line_no = 1;
    std::cout << "node " << node << " at epoch " << epoch << ":\n";
    while (std::getline(in, line)) {
        ++line_no;
        const auto f = sdmm::detail::split_csv_line(line);
        if (f.size() != 9) {
            throw sdmm::DataError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected 9 fields");
        }
        if (f[0] != std::to_string(epoch) || f[1] != std::to_string(node)) continue;
        any = true;
        std::cout << "  " << f[2] << ". peer " << f[3] << "  score=" << f[8]
                  << "  similarity=" << f[5] << "  trend_z=" << f[6] << '\n';
    }
    if (!any) std::cout << "  (no map recorded: peers still cold or epoch out of range)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synopsis discrepancy monitoring: simulate edge nodes exchanging "
                 "data synopses and rank peers by trend-aware similarity"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "sdmm_out", out_file = "trace.csv";
    std::string kind = "stationary", log_dir;
    std::optional<std::string> trace_path, synth_config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    int node = 1;
    std::size_t epoch = 1;

    auto* simulate = app.add_subcommand("simulate", "run one simulation and dump its logs");
    simulate->add_option("--config", config_path, "config file")->required();
    simulate->add_option("--trace", trace_path, "trace CSV to replay (default: synthetic)");
    simulate->add_option("--out", out_dir, "output directory");
    simulate->add_option("--seed", seed, "override the config seed");

    auto* sweep = app.add_subcommand("sweep", "run the experiment grid and emit metrics CSV");
    sweep->add_option("--config", config_path, "config file")->required();
    sweep->add_option("--runs", runs, "seeded runs per grid point");
    sweep->add_option("--trace", trace_path, "trace CSV to replay (default: synthetic)");
    sweep->add_option("--out", out_dir, "output directory");

    auto* synth = app.add_subcommand("synth", "write a synthetic trace CSV");
    synth->add_option("--kind", kind, "stationary | drift | regime-shift")->required();
    synth->add_option("--config", synth_config, "config file for trace shape");
    synth->add_option("--out", out_file, "output CSV path");
    synth->add_option("--seed", seed, "trace seed");

    auto* inspect = app.add_subcommand("inspect", "print one node's ranked map from a log");
    inspect->add_option("--log", log_dir, "directory written by simulate")->required();
    inspect->add_option("--node", node, "node id")->required();
    inspect->add_option("--epoch", epoch, "epoch")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (app.got_subcommand(simulate))
            return cmd_simulate(config_path, trace_path, out_dir, seed);
        if (app.got_subcommand(sweep))
            return cmd_sweep(config_path, trace_path, out_dir, runs);
        if (app.got_subcommand(synth))
            return cmd_synth(kind, synth_config, out_file, seed);
        return cmd_inspect(log_dir, node, epoch);
    } catch (const sdmm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const sdmm::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
