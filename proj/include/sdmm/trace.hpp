#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sdmm/detail/format.hpp"
#include "sdmm/errors.hpp"

namespace sdmm {

// Per-node ordered data streams. Node slots are 0-based internally; the
// original ids from a CSV (or 1..N for synthetic traces) are kept for echo.
class Trace {
public:
    Trace(std::size_t nodes, std::size_t dim) : dim_(dim), series_(nodes), times_(nodes) {
        node_ids_.resize(nodes);
        for (std::size_t i = 0; i < nodes; ++i) node_ids_[i] = static_cast<long long>(i) + 1;
    }

    std::size_t node_count() const { return series_.size(); }
    std::size_t dim() const { return dim_; }
    std::size_t points(std::size_t node) const { return series_[node].size() / dim_; }

    std::size_t min_points() const {
        std::size_t m = points(0);
        for (std::size_t i = 1; i < node_count(); ++i) m = std::min(m, points(i));
        return m;
    }

    std::span<const double> row(std::size_t node, std::size_t index) const {
        return {series_[node].data() + index * dim_, dim_};
    }
    double timestamp(std::size_t node, std::size_t index) const { return times_[node][index]; }
    long long node_id(std::size_t node) const { return node_ids_[node]; }

    void append(std::size_t node, double timestamp, std::span<const double> values) {
        times_[node].push_back(timestamp);
        series_[node].insert(series_[node].end(), values.begin(), values.end());
    }

    void set_node_id(std::size_t node, long long id) { node_ids_[node] = id; }

    // Per-node cyclic rotation; gives seeded replays of a fixed dataset
    // distinct but deterministic run-to-run views.
    Trace rotated(std::uint64_t seed) const {
        Trace out(node_count(), dim_);
        out.node_ids_ = node_ids_;
        for (std::size_t node = 0; node < node_count(); ++node) {
            const std::size_t n = points(node);
            if (n == 0) continue;
            std::mt19937_64 rng(detail::stream_seed(seed, node));
            const std::size_t shift = rng() % n;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t src = (i + shift) % n;
                out.append(node, times_[node][i], row(node, src));
            }
        }
        return out;
    }

private:
    std::size_t dim_;
    std::vector<std::vector<double>> series_;  // row-major per node
    std::vector<std::vector<double>> times_;
    std::vector<long long> node_ids_;
};

enum class TraceKind { Stationary, Drift, RegimeShift };

inline std::string to_string(TraceKind k) {
    switch (k) {
        case TraceKind::Stationary: return "stationary";
        case TraceKind::Drift: return "drift";
        case TraceKind::RegimeShift: return "regime-shift";
    }
    return "?";
}

inline TraceKind parse_trace_kind(const std::string& s) {
    if (s == "stationary") return TraceKind::Stationary;
    if (s == "drift") return TraceKind::Drift;
    if (s == "regime-shift" || s == "regime_shift") return TraceKind::RegimeShift;
    throw ConfigError("unknown trace kind: '" + s + "'");
}

struct SynthParams {
    TraceKind kind = TraceKind::Stationary;
    std::size_t nodes = 10;
    std::size_t dim = 3;
    std::size_t points_per_node = 1000;
    double mean_step = 5.0;      // spacing of node base means
    double sigma = 1.0;          // per-dimension noise
    double drift_slope = 0.02;   // per-point mean drift magnitude
    std::size_t shift_point = 0; // 0 = midway
    double shift_magnitude = 10.0;
};

// Deterministic synthetic traces.
//   stationary:   node i samples around mean i*mean_step per dimension.
//   drift:        node means move linearly, direction alternating by node
//                 parity, so some pairs converge while others diverge.
//   regime-shift: even-slot nodes jump by shift_magnitude at shift_point.
inline Trace synth_trace(const SynthParams& p, std::uint64_t seed) {
    if (p.nodes < 2) throw ConfigError("synthetic trace needs at least 2 nodes");
    if (p.dim == 0 || p.points_per_node == 0)
        throw ConfigError("synthetic trace needs positive dim and length");
    Trace trace(p.nodes, p.dim);
    const std::size_t shift_at =
        p.shift_point > 0 ? p.shift_point : p.points_per_node / 2;
    std::vector<double> x(p.dim);
    for (std::size_t node = 0; node < p.nodes; ++node) {
        std::mt19937_64 rng(detail::stream_seed(seed, node));
        std::normal_distribution<double> noise(0.0, p.sigma);
        const double base = static_cast<double>(node) * p.mean_step;
        const double direction = node % 2 == 0 ? 1.0 : -1.0;
        for (std::size_t t = 0; t < p.points_per_node; ++t) {
            double mean = base;
            if (p.kind == TraceKind::Drift) {
                mean += direction * p.drift_slope * static_cast<double>(t);
            } else if (p.kind == TraceKind::RegimeShift && node % 2 == 0 && t >= shift_at) {
                mean += p.shift_magnitude;
            }
            for (std::size_t d = 0; d < p.dim; ++d) x[d] = mean + noise(rng);
            trace.append(node, static_cast<double>(t), x);
        }
    }
    return trace;
}

// CSV format: header "timestamp,node_id,v1,...,vM", rows sorted by
// timestamp within each node, no missing fields.
inline void write_trace_csv(const Trace& trace, std::ostream& out) {
    out << "timestamp,node_id";
    for (std::size_t d = 1; d <= trace.dim(); ++d) out << ",v" << d;
    out << '\n';
    for (std::size_t node = 0; node < trace.node_count(); ++node) {
        for (std::size_t i = 0; i < trace.points(node); ++i) {
            out << detail::fmt_double(trace.timestamp(node, i)) << ',' << trace.node_id(node);
            for (double v : trace.row(node, i)) out << ',' << detail::fmt_double(v);
            out << '\n';
        }
    }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

inline double parse_csv_number(const std::string& s, const std::string& where,
                               std::size_t line_no) {
    if (s.empty()) {
        throw DataError(where + ":" + std::to_string(line_no) + ": missing value");
    }
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw DataError(where + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    if (pos != s.size()) {
        throw DataError(where + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    if (!std::isfinite(v)) {
        throw DataError(where + ":" + std::to_string(line_no) + ": non-finite value '" + s + "'");
    }
    return v;
}

}  // namespace detail

// Reads a trace CSV. Distinct node ids are mapped to slots in ascending id
// order; timestamps must be non-decreasing within each node. Every problem
// is reported with its line number.
inline Trace read_trace_csv(std::istream& in, const std::string& name = "trace") {
    std::string line;
    if (!std::getline(in, line)) throw DataError(name + ": empty file");
    {
        const auto header = detail::split_csv_line(line);
        if (header.size() < 3 || header[0] != "timestamp" || header[1] != "node_id") {
            throw DataError(name + ":1: expected header 'timestamp,node_id,v1,...'");
        }
        for (std::size_t i = 2; i < header.size(); ++i) {
            if (header[i] != "v" + std::to_string(i - 1)) {
                throw DataError(name + ":1: bad value column '" + header[i] + "'");
            }
        }
    }

    struct Row {
        double timestamp;
        std::vector<double> values;
    };
    std::map<long long, std::vector<Row>> per_node;
    std::size_t dim = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() < 3) {
            throw DataError(name + ":" + std::to_string(line_no) + ": expected at least 3 fields");
        }
        if (dim == 0) dim = fields.size() - 2;
        if (fields.size() - 2 != dim) {
            throw DataError(name + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(dim + 2) + " fields, got " +
                            std::to_string(fields.size()));
        }
        Row row;
        row.timestamp = detail::parse_csv_number(fields[0], name, line_no);
        const double id_raw = detail::parse_csv_number(fields[1], name, line_no);
        const auto id = static_cast<long long>(id_raw);
        if (static_cast<double>(id) != id_raw) {
            throw DataError(name + ":" + std::to_string(line_no) + ": node_id must be an integer");
        }
        row.values.reserve(dim);
        for (std::size_t i = 2; i < fields.size(); ++i) {
            row.values.push_back(detail::parse_csv_number(fields[i], name, line_no));
        }
        auto& rows = per_node[id];
        if (!rows.empty() && row.timestamp < rows.back().timestamp) {
            throw DataError(name + ":" + std::to_string(line_no) +
                            ": timestamps not sorted within node " + std::to_string(id));
        }
        rows.push_back(std::move(row));
    }
    if (per_node.empty()) throw DataError(name + ": no data rows");
    if (per_node.size() < 2) throw DataError(name + ": need at least 2 nodes");

    Trace trace(per_node.size(), dim);
    std::size_t slot = 0;
    for (const auto& [id, rows] : per_node) {
        trace.set_node_id(slot, id);
        for (const auto& row : rows) trace.append(slot, row.timestamp, row.values);
        ++slot;
    }
    return trace;
}

}  // namespace sdmm
