#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sdmm/discrepancy.hpp"
#include "sdmm/errors.hpp"
#include "sdmm/similarity.hpp"
#include "sdmm/synopsis.hpp"
#include "sdmm/trace.hpp"

namespace sdmm {

struct SimConfig {
    std::size_t nodes = 10;         // N
    std::size_t dim = 3;            // M
    std::size_t window = 100;       // W
    double eta = 1.0;
    double xi = 2.0;
    double zeta = 35.0;
    double zeta_hat = 35.0;
    std::size_t cluster_count = 3;  // C
    Norm norm = Norm::L1;
    std::size_t epoch_points = 10;
    std::size_t epochs = 100;
    std::size_t top_k = 3;
    std::uint64_t seed = 1;
    bool mkm_literal = false;
    SynopsisMode synopsis_mode = SynopsisMode::DominantMean;
    double absorb_threshold = 0.0;  // <= 0: calibrated per node from warm-up
    std::size_t warmup_points = 50;
    std::size_t branching_factor = 50;
    double drop_probability = 0.0;  // synopsis-message loss hook
    std::size_t ma_window = 4;

    SynthParams synth;  // used when no trace file is supplied

    void validate() const {
        if (nodes < 2) throw ConfigError("nodes must be >= 2");
        if (dim == 0) throw ConfigError("dim must be positive");
        if (window < 4) throw ConfigError("window must be >= 4");
        if (!(eta > 0.0) || eta > 1.0) throw ConfigError("eta must be in (0, 1]");
        if (std::ceil(eta * static_cast<double>(window)) < 3.0)
            throw ConfigError("eta * window must reach 3 for trend analysis");
        if (!(xi > 0.0) || !(zeta > 0.0) || !(zeta_hat > 0.0))
            throw ConfigError("xi, zeta and zeta_hat must be positive");
        if (cluster_count == 0) throw ConfigError("clusters must be >= 1");
        if (epoch_points == 0) throw ConfigError("epoch_points must be positive");
        if (top_k == 0 || top_k > nodes - 1)
            throw ConfigError("top_k must be in [1, nodes-1]");
        if (drop_probability < 0.0 || drop_probability >= 1.0)
            throw ConfigError("drop_probability must be in [0, 1)");
        if (ma_window == 0) throw ConfigError("ma_window must be positive");
    }

    SimilarityParams similarity_params() const {
        SimilarityParams p;
        p.xi = xi;
        p.zeta = zeta;
        p.zeta_hat = zeta_hat;
        p.eta = eta;
        p.cluster_count = cluster_count;
        p.mkm_literal = mkm_literal;
        return p;
    }

    // Fills synth geometry from the simulation shape.
    SynthParams synth_params() const {
        SynthParams p = synth;
        p.nodes = nodes;
        p.dim = dim;
        p.points_per_node = epochs * epoch_points;
        return p;
    }
};

struct NodeState {
    int id = 0;  // 1-based
    CfTree tree;
    std::map<int, DiscrepancyWindow> windows;  // peer id -> window
    SimilarityMap map;
    std::size_t cursor = 0;  // next unread trace row
    Synopsis synopsis;

    NodeState(int node_id, const SimConfig& cfg)
        : id(node_id),
          tree(cfg.dim, cfg.absorb_threshold, cfg.warmup_points, cfg.branching_factor) {}
};

// Full record of one simulation: every pushed quantum per ordered pair and
// every per-node similarity map, indexed by epoch (1-based externally).
struct EpochLog {
    SimConfig cfg;
    std::size_t epochs_run = 0;
    std::vector<std::vector<SimilarityMap>> maps;    // [epoch-1][node-1]
    std::vector<std::vector<double>> quanta_series;  // [pair_index][epoch-1]

    std::size_t pair_index(int local, int peer) const {
        const auto n = static_cast<std::size_t>(cfg.nodes);
        const auto i = static_cast<std::size_t>(local - 1);
        const auto j = static_cast<std::size_t>(peer - 1);
        return i * (n - 1) + (j < i ? j : j - 1);
    }

    double quantum_at(int local, int peer, std::size_t epoch) const {
        return quanta_series[pair_index(local, peer)][epoch - 1];
    }

    // Window contents as the local node saw them at the end of `epoch`.
    std::vector<double> window_at(int local, int peer, std::size_t epoch) const {
        const auto& series = quanta_series[pair_index(local, peer)];
        const std::size_t len = std::min<std::size_t>(epoch, cfg.window);
        return {series.begin() + static_cast<std::ptrdiff_t>(epoch - len),
                series.begin() + static_cast<std::ptrdiff_t>(epoch)};
    }

    const SimilarityMap& map_at(int node, std::size_t epoch) const {
        return maps[epoch - 1][static_cast<std::size_t>(node - 1)];
    }
};

inline std::vector<NodeState> make_nodes(const SimConfig& cfg) {
    std::vector<NodeState> nodes;
    nodes.reserve(cfg.nodes);
    for (std::size_t i = 0; i < cfg.nodes; ++i) {
        NodeState st(static_cast<int>(i) + 1, cfg);
        for (std::size_t j = 0; j < cfg.nodes; ++j) {
            if (i == j) continue;
            st.windows.emplace(static_cast<int>(j) + 1,
                               DiscrepancyWindow(cfg.window, st.id, static_cast<int>(j) + 1));
        }
        nodes.push_back(std::move(st));
    }
    return nodes;
}

// One synchronous round: ingest this epoch's slice, publish synopses,
// update every receiver's window, rebuild similarity maps. A node whose
// trace is exhausted republishes from its current tree.
inline void run_epoch(std::vector<NodeState>& nodes, const Trace& trace, std::size_t epoch,
                      const SimConfig& cfg, EpochLog* log = nullptr) {
    for (auto& node : nodes) {
        const auto slot = static_cast<std::size_t>(node.id - 1);
        const std::size_t available = trace.points(slot);
        for (std::size_t i = 0; i < cfg.epoch_points && node.cursor < available; ++i) {
            node.tree.insert(trace.row(slot, node.cursor));
            ++node.cursor;
        }
        node.synopsis = node.tree.extract(epoch, cfg.synopsis_mode);
    }

    for (auto& receiver : nodes) {
        for (const auto& sender : nodes) {
            if (sender.id == receiver.id) continue;
            if (cfg.drop_probability > 0.0) {
                std::mt19937_64 rng(detail::stream_seed(
                    cfg.seed ^ 0x6d657373ull,
                    epoch * cfg.nodes * cfg.nodes +
                        static_cast<std::size_t>(receiver.id - 1) * cfg.nodes +
                        static_cast<std::size_t>(sender.id - 1)));
                std::uniform_real_distribution<double> u(0.0, 1.0);
                if (u(rng) < cfg.drop_probability) continue;
            }
            const double d = discrepancy(receiver.synopsis.values, sender.synopsis.values,
                                         cfg.norm);
            receiver.windows.at(sender.id).push(d);
            if (log) log->quanta_series[log->pair_index(receiver.id, sender.id)].push_back(d);
        }
    }

    const SimilarityParams params = cfg.similarity_params();
    for (auto& node : nodes) {
        node.map = build_similarity_map(node.id, epoch, node.windows, params);
        if (log) log->maps[epoch - 1][static_cast<std::size_t>(node.id - 1)] = node.map;
    }
}

inline EpochLog run_simulation(const SimConfig& cfg, const Trace& trace) {
    cfg.validate();
    if (trace.node_count() != cfg.nodes) {
        throw ConfigError("trace has " + std::to_string(trace.node_count()) +
                          " nodes, config expects " + std::to_string(cfg.nodes));
    }
    if (trace.dim() != cfg.dim) {
        throw ConfigError("trace dimension " + std::to_string(trace.dim()) +
                          " does not match config dim " + std::to_string(cfg.dim));
    }
    if (trace.min_points() == 0) throw DataError("trace has a node with no data");

    EpochLog log;
    log.cfg = cfg;
    log.maps.resize(cfg.epochs, std::vector<SimilarityMap>(cfg.nodes));
    log.quanta_series.resize(cfg.nodes * (cfg.nodes - 1));
    for (auto& s : log.quanta_series) s.reserve(cfg.epochs);

    auto nodes = make_nodes(cfg);
    for (std::size_t t = 1; t <= cfg.epochs; ++t) {
        run_epoch(nodes, trace, t, cfg, &log);
    }
    log.epochs_run = cfg.epochs;
    return log;
}

}  // namespace sdmm
