#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdmm/detail/format.hpp"
#include "sdmm/detail/parallel.hpp"
#include "sdmm/errors.hpp"
#include "sdmm/sim.hpp"

namespace sdmm {

enum class Model { Sdmm, MovingAverage };

inline std::string to_string(Model m) {
    return m == Model::Sdmm ? "sdmm" : "ma";
}

struct MaScore {
    int peer = 0;
    double score = 0.0;  // mean of the last ma_window quanta
};

// Baseline ranker: peers ordered by the mean of their most recent quanta,
// best (lowest predicted discrepancy) first. Peers with too little history
// are omitted.
inline std::vector<MaScore> moving_average_rank(
    const std::map<int, std::vector<double>>& windows, std::size_t ma_window = 4) {
    std::vector<MaScore> out;
    for (const auto& [peer, values] : windows) {
        if (values.size() < ma_window) continue;
        double sum = 0.0;
        for (std::size_t i = values.size() - ma_window; i < values.size(); ++i)
            sum += values[i];
        out.push_back({peer, sum / static_cast<double>(ma_window)});
    }
    std::sort(out.begin(), out.end(), [](const MaScore& a, const MaScore& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.peer < b.peer;
    });
    return out;
}

namespace detail {

// Peer ids in ranked order for one owner at one epoch under either model.
inline std::vector<int> ranked_peers(const EpochLog& log, int owner, std::size_t epoch,
                                     Model model) {
    std::vector<int> out;
    if (model == Model::Sdmm) {
        for (const auto& ps : log.map_at(owner, epoch).ranked) out.push_back(ps.peer);
        return out;
    }
    std::map<int, std::vector<double>> windows;
    for (std::size_t j = 1; j <= log.cfg.nodes; ++j) {
        const int peer = static_cast<int>(j);
        if (peer == owner) continue;
        windows.emplace(peer, log.window_at(owner, peer, epoch));
    }
    for (const auto& ms : moving_average_rank(windows, log.cfg.ma_window))
        out.push_back(ms.peer);
    return out;
}

inline std::vector<int> min_quantum_peers(const EpochLog& log, int owner,
                                          std::size_t epoch) {
    std::vector<std::pair<double, int>> by_quantum;
    for (std::size_t j = 1; j <= log.cfg.nodes; ++j) {
        const int peer = static_cast<int>(j);
        if (peer == owner) continue;
        by_quantum.emplace_back(log.quantum_at(owner, peer, epoch), peer);
    }
    std::sort(by_quantum.begin(), by_quantum.end());
    std::vector<int> out;
    for (const auto& [d, peer] : by_quantum) out.push_back(peer);
    return out;
}

}  // namespace detail

struct GammaStat {
    double mean = 0.0;            // mean ratio over owners with a finite ratio
    std::size_t inf_count = 0;    // owners where the minimum was 0 but the pick was not
    std::size_t finite_owners = 0;
};

// Ratio of the top-ranked peer's discrepancy quantum at the decision epoch
// to the minimum quantum over all peers. 1 is ideal; 0/0 counts as 1.
inline GammaStat gamma_metric(const EpochLog& log, std::size_t epoch,
                              Model model = Model::Sdmm) {
    GammaStat stat;
    double acc = 0.0;
    for (std::size_t i = 1; i <= log.cfg.nodes; ++i) {
        const int owner = static_cast<int>(i);
        const auto ranking = detail::ranked_peers(log, owner, epoch, model);
        if (ranking.empty()) throw std::domain_error("gamma: no warm peers for node " +
                                                     std::to_string(owner));
        const double picked = log.quantum_at(owner, ranking.front(), epoch);
        double best = picked;
        for (std::size_t j = 1; j <= log.cfg.nodes; ++j) {
            if (static_cast<int>(j) == owner) continue;
            best = std::min(best, log.quantum_at(owner, static_cast<int>(j), epoch));
        }
        if (best == 0.0) {
            if (picked == 0.0) {
                acc += 1.0;
                ++stat.finite_owners;
            } else {
                ++stat.inf_count;
            }
        } else {
            acc += picked / best;
            ++stat.finite_owners;
        }
    }
    if (stat.finite_owners > 0) stat.mean = acc / static_cast<double>(stat.finite_owners);
    return stat;
}

// Overlap between the model's top-k and the k peers with the smallest
// quantum at the decision epoch, averaged over owners.
inline double delta_metric(const EpochLog& log, std::size_t epoch, std::size_t k,
                           Model model = Model::Sdmm) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= log.cfg.nodes; ++i) {
        const int owner = static_cast<int>(i);
        const auto ranking = detail::ranked_peers(log, owner, epoch, model);
        if (ranking.size() < k) {
            throw std::domain_error("delta: fewer than k ranked peers for node " +
                                    std::to_string(owner));
        }
        const auto baseline = detail::min_quantum_peers(log, owner, epoch);
        std::set<int> top(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(k));
        std::size_t overlap = 0;
        for (std::size_t j = 0; j < k; ++j) overlap += top.count(baseline[j]);
        acc += static_cast<double>(overlap) / static_cast<double>(k);
    }
    return acc / static_cast<double>(log.cfg.nodes);
}

struct TrendCounts {
    std::size_t negative = 0;  // top-k members whose window suffix trends down
    std::size_t positive = 0;  // ... trends up; flat members count in neither
};

inline TrendCounts trend_selection_metrics(const EpochLog& log, std::size_t epoch,
                                           std::size_t k, Model model = Model::Sdmm) {
    TrendCounts counts;
    for (std::size_t i = 1; i <= log.cfg.nodes; ++i) {
        const int owner = static_cast<int>(i);
        const auto ranking = detail::ranked_peers(log, owner, epoch, model);
        if (ranking.size() < k) {
            throw std::domain_error("trend metrics: fewer than k ranked peers for node " +
                                    std::to_string(owner));
        }
        for (std::size_t j = 0; j < k; ++j) {
            const auto window = log.window_at(owner, ranking[j], epoch);
            const double z =
                mann_kendall(std::span<const double>(window), log.cfg.eta, log.cfg.mkm_literal).z;
            if (z < 0.0)
                ++counts.negative;
            else if (z > 0.0)
                ++counts.positive;
        }
    }
    return counts;
}

struct RunMetrics {
    double gamma = 0.0;
    std::size_t gamma_owners = 0;  // owners contributing to the gamma mean
    std::size_t inf_gamma = 0;
    double delta = 0.0;
    std::size_t omega = 0;
    std::size_t epsilon_count = 0;
};

inline RunMetrics run_metrics(const EpochLog& log, std::size_t epoch, std::size_t k,
                              Model model) {
    RunMetrics m;
    const GammaStat g = gamma_metric(log, epoch, model);
    m.gamma = g.mean;
    m.gamma_owners = g.finite_owners;
    m.inf_gamma = g.inf_count;
    m.delta = delta_metric(log, epoch, k, model);
    const TrendCounts t = trend_selection_metrics(log, epoch, k, model);
    m.omega = t.negative;
    m.epsilon_count = t.positive;
    return m;
}

// Aggregated results for one grid point and one model.
struct MetricReport {
    std::string config_id;
    std::size_t window = 0;
    double eta = 0.0;
    Model model = Model::Sdmm;
    std::size_t runs = 0;
    double gamma_mean = 0.0;
    double gamma_se = 0.0;
    double delta_mean = 0.0;
    double delta_se = 0.0;
    std::size_t omega = 0;
    std::size_t epsilon_count = 0;
    std::size_t inf_gamma_count = 0;
};

namespace detail {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSe mean_and_se(std::span<const double> xs) {
    MeanSe out;
    if (xs.empty()) return out;
    double sum = 0.0;
    for (double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.se = std::sqrt(ss / static_cast<double>(xs.size() - 1)) /
                 std::sqrt(static_cast<double>(xs.size()));
    }
    return out;
}

inline MetricReport aggregate_runs(std::span<const RunMetrics> runs, std::string config_id,
                                   std::size_t window, double eta, Model model) {
    MetricReport r;
    r.config_id = std::move(config_id);
    r.window = window;
    r.eta = eta;
    r.model = model;
    r.runs = runs.size();
    std::vector<double> gammas, deltas;
    for (const auto& m : runs) {
        if (m.gamma_owners > 0) gammas.push_back(m.gamma);
        deltas.push_back(m.delta);
        r.omega += m.omega;
        r.epsilon_count += m.epsilon_count;
        r.inf_gamma_count += m.inf_gamma;
    }
    const MeanSe g = mean_and_se(gammas);
    r.gamma_mean = g.mean;
    r.gamma_se = g.se;
    const MeanSe d = mean_and_se(deltas);
    r.delta_mean = d.mean;
    r.delta_se = d.se;
    return r;
}

}  // namespace detail

// One seeded simulation plus its metrics at the decision epoch t = W.
// A supplied replay trace overrides the synthetic generator; with several
// runs each gets a seeded rotation of it.
inline std::pair<RunMetrics, RunMetrics> run_once(SimConfig cfg, std::uint64_t seed,
                                                  const Trace* replay = nullptr) {
    cfg.seed = seed;
    if (cfg.epochs < cfg.window) cfg.epochs = cfg.window;
    Trace trace = replay ? *replay : synth_trace(cfg.synth_params(), seed);
    if (replay) {
        cfg.nodes = trace.node_count();
        cfg.dim = trace.dim();
        cfg.top_k = std::min(cfg.top_k, cfg.nodes - 1);
    }
    const EpochLog log = run_simulation(cfg, trace);
    const std::size_t t = cfg.window;
    return {run_metrics(log, t, cfg.top_k, Model::Sdmm),
            run_metrics(log, t, cfg.top_k, Model::MovingAverage)};
}

// Runs the whole grid, `runs` seeded simulations per point (seeds
// cfg.seed + r), in parallel across runs. Emits one report per grid point
// and model.
inline std::vector<MetricReport> run_experiment(std::span<const SimConfig> grid,
                                                std::size_t runs,
                                                const Trace* replay = nullptr) {
    if (grid.empty()) throw ConfigError("empty grid");
    if (runs == 0) throw ConfigError("runs must be positive");

    std::vector<MetricReport> reports;
    for (const SimConfig& cfg : grid) {
        cfg.validate();
        std::vector<std::pair<RunMetrics, RunMetrics>> results(runs);
        std::vector<std::string> errors(runs);
        detail::parallel_for(runs, [&](std::size_t r) {
            const std::uint64_t seed = cfg.seed + r;
            try {
                if (replay && runs > 1) {
                    const Trace rotated = replay->rotated(seed);
                    results[r] = run_once(cfg, seed, &rotated);
                } else {
                    results[r] = run_once(cfg, seed, replay);
                }
            } catch (const std::exception& e) {
                errors[r] = e.what();
            }
        });
        for (std::size_t r = 0; r < runs; ++r) {
            if (!errors[r].empty()) {
                throw DataError("run " + std::to_string(r) + " of " +
                                std::to_string(runs) + " failed: " + errors[r]);
            }
        }

        const std::string config_id =
            "W" + std::to_string(cfg.window) + "_eta" + detail::fmt_double(cfg.eta);
        std::vector<RunMetrics> sdmm_runs(runs), ma_runs(runs);
        for (std::size_t r = 0; r < runs; ++r) {
            sdmm_runs[r] = results[r].first;
            ma_runs[r] = results[r].second;
        }
        reports.push_back(detail::aggregate_runs(sdmm_runs, config_id, cfg.window, cfg.eta,
                                                 Model::Sdmm));
        reports.push_back(detail::aggregate_runs(ma_runs, config_id, cfg.window, cfg.eta,
                                                 Model::MovingAverage));
    }
    return reports;
}

inline void write_metrics_csv(std::span<const MetricReport> reports, std::ostream& out) {
    out << "config_id,W,eta,model,gamma_mean,gamma_se,delta_mean,delta_se,"
           "omega,epsilon_count,inf_gamma_count\n";
    for (const auto& r : reports) {
        out << r.config_id << ',' << r.window << ',' << detail::fmt_double(r.eta) << ','
            << to_string(r.model) << ',' << detail::fmt_double(r.gamma_mean) << ','
            << detail::fmt_double(r.gamma_se) << ',' << detail::fmt_double(r.delta_mean)
            << ',' << detail::fmt_double(r.delta_se) << ',' << r.omega << ','
            << r.epsilon_count << ',' << r.inf_gamma_count << '\n';
    }
}

}  // namespace sdmm
