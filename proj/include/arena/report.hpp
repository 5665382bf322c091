#pragma once

// CSV schemas for replica outputs and the cross-replica aggregate. Fixed
// column order, one header row, LF endings, empty field = value undefined.
// Numbers are emitted with to_chars so a rerun is byte-identical and a
// parse round-trips exactly.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "arena/csv.hpp"
#include "arena/engine.hpp"
#include "arena/metrics.hpp"
#include "arena/mobility.hpp"
#include "arena/radio_energy.hpp"
#include "arena/routing.hpp"
#include "arena/scenario.hpp"
#include "arena/traffic.hpp"

namespace arena {

// ---- per-replica report row ------------------------------------------------

inline constexpr const char* kReportHeader =
    "scenario_hash,seed,policy,power_control,v_max,n_nodes,n_sessions,"
    "route_transitions,hop_count,delay_s,energy_per_node_j,energy_stddev_j,"
    "first_failure_s,rel2_s,rel3_s,rel4_s,rel5_s,packets_sent,packets_delivered";
inline constexpr int kReportColumns = 19;

struct ReportRow {
    std::string scenario_hash;
    std::uint64_t seed = 0;
    Policy policy = Policy::forp;
    bool power_control = false;
    double v_max = 0.0;
    int n_nodes = 0;
    int n_sessions = 0;
    double route_transitions = 0.0;
    std::optional<double> hop_count;
    std::optional<double> delay_s;
    double energy_per_node_j = 0.0;
    double energy_stddev_j = 0.0;
    std::optional<double> first_failure_s;
    std::array<std::optional<double>, 4> rel_s;  // rel2..rel5
    std::int64_t packets_sent = 0;
    std::int64_t packets_delivered = 0;
};

inline ReportRow report_row_from(const Scenario& scn, const MetricsReport& m) {
    ReportRow r;
    r.scenario_hash = scn.hash_hex();
    r.seed = scn.seed;
    r.policy = scn.policy;
    r.power_control = scn.power_control;
    r.v_max = scn.v_max;
    r.n_nodes = scn.n_nodes;
    r.n_sessions = scn.n_sessions;
    r.route_transitions = m.route_transitions;
    r.hop_count = m.hop_count;
    r.delay_s = m.delay_s;
    r.energy_per_node_j = m.energy_per_node_j;
    r.energy_stddev_j = m.energy_stddev_j;
    r.first_failure_s = m.first_failure_s;
    r.rel_s = m.failure_rel_s;
    r.packets_sent = m.packets_sent;
    r.packets_delivered = m.packets_delivered;
    return r;
}

inline std::string format_report_row(const ReportRow& r) {
    std::string out;
    out += r.scenario_hash;
    out += ',';
    out += fmt_int(static_cast<std::int64_t>(r.seed));
    out += ',';
    out += policy_name(r.policy);
    out += ',';
    out += r.power_control ? "true" : "false";
    out += ',';
    out += fmt_double(r.v_max);
    out += ',';
    out += fmt_int(r.n_nodes);
    out += ',';
    out += fmt_int(r.n_sessions);
    out += ',';
    out += fmt_double(r.route_transitions);
    out += ',';
    out += fmt_opt(r.hop_count);
    out += ',';
    out += fmt_opt(r.delay_s);
    out += ',';
    out += fmt_double(r.energy_per_node_j);
    out += ',';
    out += fmt_double(r.energy_stddev_j);
    out += ',';
    out += fmt_opt(r.first_failure_s);
    for (const auto& rel : r.rel_s) {
        out += ',';
        out += fmt_opt(rel);
    }
    out += ',';
    out += fmt_int(r.packets_sent);
    out += ',';
    out += fmt_int(r.packets_delivered);
    return out;
}

inline ReportRow parse_report_row(const std::string& line) {
    const std::vector<std::string> f = split_csv_row(line);
    if (static_cast<int>(f.size()) != kReportColumns) {
        throw std::invalid_argument("report row: expected " +
                                    std::to_string(kReportColumns) + " fields, got " +
                                    std::to_string(f.size()));
    }
    ReportRow r;
    r.scenario_hash = f[0];
    r.seed = static_cast<std::uint64_t>(parse_int_field(f[1], "seed"));
    r.policy = policy_from_name(f[2]);
    if (f[3] == "true") r.power_control = true;
    else if (f[3] == "false") r.power_control = false;
    else throw std::invalid_argument("report row: bad power_control `" + f[3] + "`");
    r.v_max = parse_double_field(f[4], "v_max");
    r.n_nodes = static_cast<int>(parse_int_field(f[5], "n_nodes"));
    r.n_sessions = static_cast<int>(parse_int_field(f[6], "n_sessions"));
    r.route_transitions = parse_double_field(f[7], "route_transitions");
    r.hop_count = parse_opt_field(f[8], "hop_count");
    r.delay_s = parse_opt_field(f[9], "delay_s");
    r.energy_per_node_j = parse_double_field(f[10], "energy_per_node_j");
    r.energy_stddev_j = parse_double_field(f[11], "energy_stddev_j");
    r.first_failure_s = parse_opt_field(f[12], "first_failure_s");
    for (int k = 0; k < 4; ++k) r.rel_s[k] = parse_opt_field(f[13 + k], "rel_s");
    r.packets_sent = parse_int_field(f[17], "packets_sent");
    r.packets_delivered = parse_int_field(f[18], "packets_delivered");
    return r;
}

inline std::string report_csv(const std::vector<ReportRow>& rows) {
    std::string out = kReportHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += format_report_row(r);
        out += '\n';
    }
    return out;
}

inline std::vector<ReportRow> parse_report_csv(const std::string& text) {
    std::vector<ReportRow> rows;
    std::size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        const std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        if (header) {
            if (line != kReportHeader) {
                throw std::invalid_argument("report csv: unexpected header");
            }
            header = false;
            continue;
        }
        rows.push_back(parse_report_row(line));
    }
    return rows;
}

// ---- per-node energy accounts ----------------------------------------------

inline std::string energy_csv(const EnergyLedger& ledger) {
    std::string out = "node_id,initial_j,residual_j";
    for (std::string_view name : kEnergyCategoryNames) {
        out += ',';
        out += name;
        out += "_j";
    }
    out += ",death_time_s\n";
    for (NodeId v = 0; v < ledger.size(); ++v) {
        const auto& acct = ledger.account(v);
        out += fmt_int(v);
        out += ',';
        out += fmt_double(acct.initial);
        out += ',';
        out += fmt_double(acct.residual);
        for (double d : acct.debits) {
            out += ',';
            out += fmt_double(d);
        }
        out += ',';
        out += fmt_opt(acct.death_time);
        out += '\n';
    }
    return out;
}

// ---- route events ------------------------------------------------------------

inline std::string route_events_csv(const std::vector<RouteEventRow>& events) {
    std::string out = "time_s,session_id,event,path,metric\n";
    for (const auto& e : events) {
        out += fmt_double(e.time);
        out += ',';
        out += fmt_int(static_cast<std::int64_t>(e.session));
        out += ',';
        out += route_event_name(e.kind);
        out += ',';
        for (std::size_t i = 0; i < e.path.size(); ++i) {
            if (i) out += '-';
            out += fmt_int(e.path[i]);
        }
        out += ',';
        out += fmt_double(e.metric);
        out += '\n';
    }
    return out;
}

// ---- sessions ----------------------------------------------------------------

inline std::string sessions_csv(const std::vector<SessionSpec>& sessions) {
    std::string out = "session_id,source,dest,start_s,rate_pps,payload_bytes\n";
    for (const auto& s : sessions) {
        out += fmt_int(static_cast<std::int64_t>(s.id));
        out += ',';
        out += fmt_int(s.source);
        out += ',';
        out += fmt_int(s.dest);
        out += ',';
        out += fmt_double(s.start);
        out += ',';
        out += fmt_double(s.rate);
        out += ',';
        out += fmt_int(s.payload_bytes);
        out += '\n';
    }
    return out;
}

// ---- mobility trace ------------------------------------------------------------

inline std::string mobility_trace_csv(const std::vector<WaypointEvent>& trace) {
    std::string out = "time_s,node_id,x_m,y_m,speed_mps\n";
    for (const auto& w : trace) {
        out += fmt_double(w.time);
        out += ',';
        out += fmt_int(w.node);
        out += ',';
        out += fmt_double(w.position.x);
        out += ',';
        out += fmt_double(w.position.y);
        out += ',';
        out += fmt_double(w.speed);
        out += '\n';
    }
    return out;
}

// ---- per-cell aggregation ------------------------------------------------------

// A grid cell: one point of the sweep, averaged over its replicas.
struct CellKey {
    Policy policy = Policy::forp;
    bool power_control = false;
    int n_nodes = 0;
    int n_sessions = 0;
    double v_max = 0.0;

    friend bool operator<(const CellKey& a, const CellKey& b) {
        return std::tie(a.policy, a.power_control, a.n_nodes, a.n_sessions, a.v_max) <
               std::tie(b.policy, b.power_control, b.n_nodes, b.n_sessions, b.v_max);
    }
    friend bool operator==(const CellKey& a, const CellKey& b) {
        return !(a < b) && !(b < a);
    }
};

struct AggregateRow {
    CellKey key;
    int replicas = 0;
    double route_transitions = 0.0;
    std::optional<double> hop_count;
    std::optional<double> delay_s;
    double energy_per_node_j = 0.0;
    double energy_stddev_j = 0.0;
    std::optional<double> first_failure_s;
    std::array<std::optional<double>, 4> rel_s;
    double packets_sent = 0.0;
    double packets_delivered = 0.0;
};

inline constexpr const char* kAggregateHeader =
    "policy,power_control,v_max,n_nodes,n_sessions,replicas,"
    "route_transitions,hop_count,delay_s,energy_per_node_j,energy_stddev_j,"
    "first_failure_s,rel2_s,rel3_s,rel4_s,rel5_s,packets_sent,packets_delivered";
inline constexpr int kAggregateColumns = 18;

// Mean per cell; optional columns average the defined values only and stay
// empty when no replica defined them. Output order is canonical (sorted by
// cell key), so the fold is permutation-invariant in its input.
inline std::vector<AggregateRow> aggregate_report_rows(const std::vector<ReportRow>& rows) {
    struct Acc {
        int n = 0;
        double transitions = 0.0, energy = 0.0, stddev = 0.0, sent = 0.0, delivered = 0.0;
        double hop = 0.0, delay = 0.0, first = 0.0;
        std::array<double, 4> rel{};
        int hop_n = 0, delay_n = 0, first_n = 0;
        std::array<int, 4> rel_n{};
    };
    std::map<CellKey, Acc> cells;
    for (const auto& r : rows) {
        const CellKey key{r.policy, r.power_control, r.n_nodes, r.n_sessions, r.v_max};
        Acc& a = cells[key];
        ++a.n;
        a.transitions += r.route_transitions;
        a.energy += r.energy_per_node_j;
        a.stddev += r.energy_stddev_j;
        a.sent += static_cast<double>(r.packets_sent);
        a.delivered += static_cast<double>(r.packets_delivered);
        if (r.hop_count) { a.hop += *r.hop_count; ++a.hop_n; }
        if (r.delay_s) { a.delay += *r.delay_s; ++a.delay_n; }
        if (r.first_failure_s) { a.first += *r.first_failure_s; ++a.first_n; }
        for (int k = 0; k < 4; ++k) {
            if (r.rel_s[k]) { a.rel[k] += *r.rel_s[k]; ++a.rel_n[k]; }
        }
    }
    std::vector<AggregateRow> out;
    for (const auto& [key, a] : cells) {
        AggregateRow g;
        g.key = key;
        g.replicas = a.n;
        const double n = static_cast<double>(a.n);
        g.route_transitions = a.transitions / n;
        g.energy_per_node_j = a.energy / n;
        g.energy_stddev_j = a.stddev / n;
        g.packets_sent = a.sent / n;
        g.packets_delivered = a.delivered / n;
        if (a.hop_n) g.hop_count = a.hop / a.hop_n;
        if (a.delay_n) g.delay_s = a.delay / a.delay_n;
        if (a.first_n) g.first_failure_s = a.first / a.first_n;
        for (int k = 0; k < 4; ++k) {
            if (a.rel_n[k]) g.rel_s[k] = a.rel[k] / a.rel_n[k];
        }
        out.push_back(std::move(g));
    }
    return out;
}

inline std::string format_aggregate_row(const AggregateRow& g) {
    std::string out;
    out += policy_name(g.key.policy);
    out += ',';
    out += g.key.power_control ? "true" : "false";
    out += ',';
    out += fmt_double(g.key.v_max);
    out += ',';
    out += fmt_int(g.key.n_nodes);
    out += ',';
    out += fmt_int(g.key.n_sessions);
    out += ',';
    out += fmt_int(g.replicas);
    out += ',';
    out += fmt_double(g.route_transitions);
    out += ',';
    out += fmt_opt(g.hop_count);
    out += ',';
    out += fmt_opt(g.delay_s);
    out += ',';
    out += fmt_double(g.energy_per_node_j);
    out += ',';
    out += fmt_double(g.energy_stddev_j);
    out += ',';
    out += fmt_opt(g.first_failure_s);
    for (const auto& rel : g.rel_s) {
        out += ',';
        out += fmt_opt(rel);
    }
    out += ',';
    out += fmt_double(g.packets_sent);
    out += ',';
    out += fmt_double(g.packets_delivered);
    return out;
}

inline std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
    std::string out = kAggregateHeader;
    out += '\n';
    for (const auto& g : rows) {
        out += format_aggregate_row(g);
        out += '\n';
    }
    return out;
}

inline AggregateRow parse_aggregate_row(const std::string& line) {
    const std::vector<std::string> f = split_csv_row(line);
    if (static_cast<int>(f.size()) != kAggregateColumns) {
        throw std::invalid_argument("aggregate row: expected " +
                                    std::to_string(kAggregateColumns) + " fields, got " +
                                    std::to_string(f.size()));
    }
    AggregateRow g;
    g.key.policy = policy_from_name(f[0]);
    if (f[1] == "true") g.key.power_control = true;
    else if (f[1] == "false") g.key.power_control = false;
    else throw std::invalid_argument("aggregate row: bad power_control `" + f[1] + "`");
    g.key.v_max = parse_double_field(f[2], "v_max");
    g.key.n_nodes = static_cast<int>(parse_int_field(f[3], "n_nodes"));
    g.key.n_sessions = static_cast<int>(parse_int_field(f[4], "n_sessions"));
    g.replicas = static_cast<int>(parse_int_field(f[5], "replicas"));
    g.route_transitions = parse_double_field(f[6], "route_transitions");
    g.hop_count = parse_opt_field(f[7], "hop_count");
    g.delay_s = parse_opt_field(f[8], "delay_s");
    g.energy_per_node_j = parse_double_field(f[9], "energy_per_node_j");
    g.energy_stddev_j = parse_double_field(f[10], "energy_stddev_j");
    g.first_failure_s = parse_opt_field(f[11], "first_failure_s");
    for (int k = 0; k < 4; ++k) g.rel_s[k] = parse_opt_field(f[12 + k], "rel_s");
    g.packets_sent = parse_double_field(f[16], "packets_sent");
    g.packets_delivered = parse_double_field(f[17], "packets_delivered");
    return g;
}

inline std::vector<AggregateRow> parse_aggregate_csv(const std::string& text) {
    std::vector<AggregateRow> rows;
    std::size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        const std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        if (header) {
            if (line != kAggregateHeader) {
                throw std::invalid_argument("aggregate csv: unexpected header");
            }
            header = false;
            continue;
        }
        rows.push_back(parse_aggregate_row(line));
    }
    return rows;
}

}  // namespace arena
