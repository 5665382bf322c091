#pragma once

// Plot-script generation from an aggregate CSV. Each figure panel becomes a
// gnuplot script plus a whitespace-separated data file: per condition
// (power_control, n_nodes, n_sessions) one panel per scalar metric with
// v_max on the x axis and one series per policy, and per (condition, v_max)
// one failure-timeline panel (relative failure times vs failure index).
// Missing cells become `nan` fields and a warning; gnuplot skips them.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "arena/csv.hpp"
#include "arena/report.hpp"
#include "arena/routing.hpp"
#include "arena/sweep.hpp"

namespace arena {

struct PlotOutcome {
    std::vector<std::string> files;  // everything written, relative names
    std::vector<std::string> warnings;
};

namespace detail {

struct PanelMetric {
    const char* tag;
    const char* label;
    std::optional<double> (*value)(const AggregateRow&);
};

inline const std::array<PanelMetric, 6>& panel_metrics() {
    static const std::array<PanelMetric, 6> panels = {{
        {"route_transitions", "route transitions / session",
         [](const AggregateRow& g) { return std::optional<double>(g.route_transitions); }},
        {"hop_count", "time-averaged hop count",
         [](const AggregateRow& g) { return g.hop_count; }},
        {"delay", "mean packet delay (s)",
         [](const AggregateRow& g) { return g.delay_s; }},
        {"energy", "mean energy consumed per node (J)",
         [](const AggregateRow& g) { return std::optional<double>(g.energy_per_node_j); }},
        {"energy_stddev", "energy consumption stddev (J)",
         [](const AggregateRow& g) { return std::optional<double>(g.energy_stddev_j); }},
        {"first_failure", "time of first node failure (s)",
         [](const AggregateRow& g) { return g.first_failure_s; }},
    }};
    return panels;
}

struct Condition {
    bool power_control = false;
    int n_nodes = 0;
    int n_sessions = 0;

    friend bool operator<(const Condition& a, const Condition& b) {
        return std::tie(a.power_control, a.n_nodes, a.n_sessions) <
               std::tie(b.power_control, b.n_nodes, b.n_sessions);
    }
};

inline std::string condition_tag(const Condition& c) {
    std::string out = c.power_control ? "pc-on" : "pc-off";
    out += "_n";
    out += fmt_int(c.n_nodes);
    out += "_s";
    out += fmt_int(c.n_sessions);
    return out;
}

inline std::string condition_label(const Condition& c) {
    std::string out = c.power_control ? "power control on" : "power control off";
    out += ", ";
    out += fmt_int(c.n_nodes);
    out += " nodes, ";
    out += fmt_int(c.n_sessions);
    out += " sessions";
    return out;
}

inline std::string gnuplot_script(const std::string& stem, const std::string& title,
                                  const std::string& xlabel, const std::string& ylabel,
                                  const std::vector<Policy>& series) {
    std::string out;
    out += "set terminal pngcairo size 800,600\n";
    out += "set output '" + stem + ".png'\n";
    out += "set title '" + title + "'\n";
    out += "set xlabel '" + xlabel + "'\n";
    out += "set ylabel '" + ylabel + "'\n";
    out += "set datafile missing 'nan'\n";
    out += "set key top left\n";
    out += "plot";
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (i) out += ",";
        out += " '" + stem + ".dat' using 1:" + fmt_int(static_cast<std::int64_t>(i + 2)) +
               " with linespoints title '" + policy_name(series[i]) + "'";
    }
    out += "\n";
    return out;
}

}  // namespace detail

inline PlotOutcome generate_plots(const std::vector<AggregateRow>& rows,
                                  const std::filesystem::path& out_dir) {
    using detail::Condition;
    if (rows.empty()) throw std::invalid_argument("no aggregate rows to plot");
    std::filesystem::create_directories(out_dir);

    std::map<CellKey, const AggregateRow*> cell;
    std::set<Condition> conditions;
    std::set<double> speeds;
    std::set<Policy> policy_set;
    for (const auto& g : rows) {
        cell[g.key] = &g;
        conditions.insert({g.key.power_control, g.key.n_nodes, g.key.n_sessions});
        speeds.insert(g.key.v_max);
        policy_set.insert(g.key.policy);
    }
    std::vector<Policy> policies(policy_set.begin(), policy_set.end());

    PlotOutcome out;
    auto emit = [&](const std::string& stem, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::string& dat) {
        write_text_file(out_dir / (stem + ".dat"), dat);
        write_text_file(out_dir / (stem + ".gp"),
                        detail::gnuplot_script(stem, title, xlabel, ylabel, policies));
        out.files.push_back(stem + ".dat");
        out.files.push_back(stem + ".gp");
    };

    auto lookup = [&](Policy p, const Condition& c, double v) -> const AggregateRow* {
        const auto it = cell.find(CellKey{p, c.power_control, c.n_nodes, c.n_sessions, v});
        return it == cell.end() ? nullptr : it->second;
    };

    for (const Condition& c : conditions) {
        const std::string ctag = detail::condition_tag(c);
        const std::string clabel = detail::condition_label(c);

        for (const auto& panel : detail::panel_metrics()) {
            const std::string stem = ctag + "_" + panel.tag;
            std::string dat = "# v_max_mps";
            for (Policy p : policies) {
                dat += ' ';
                dat += policy_name(p);
            }
            dat += '\n';
            for (double v : speeds) {
                dat += fmt_double(v);
                for (Policy p : policies) {
                    const AggregateRow* g = lookup(p, c, v);
                    const std::optional<double> y = g ? panel.value(*g) : std::nullopt;
                    dat += ' ';
                    if (y) {
                        dat += fmt_double(*y);
                    } else {
                        dat += "nan";
                        out.warnings.push_back(stem + ": no value for " +
                                               policy_name(p) + " at v_max=" + fmt_double(v));
                    }
                }
                dat += '\n';
            }
            emit(stem, std::string(panel.label) + " (" + clabel + ")", "max speed (m/s)",
                 panel.label, dat);
        }

        for (double v : speeds) {
            const std::string stem = ctag + "_v" + fmt_double(v) + "_failure_timeline";
            std::string dat = "# failure_index";
            for (Policy p : policies) {
                dat += ' ';
                dat += policy_name(p);
            }
            dat += '\n';
            for (int k = 2; k <= 5; ++k) {
                dat += fmt_int(k);
                for (Policy p : policies) {
                    const AggregateRow* g = lookup(p, c, v);
                    const std::optional<double> y =
                        g ? g->rel_s[static_cast<std::size_t>(k - 2)] : std::nullopt;
                    dat += ' ';
                    if (y) {
                        dat += fmt_double(*y);
                    } else {
                        dat += "nan";
                        out.warnings.push_back(stem + ": no value for " +
                                               policy_name(p) + " at failure " + fmt_int(k));
                    }
                }
                dat += '\n';
            }
            emit(stem,
                 "failure times since first failure (" + clabel + ", v_max " + fmt_double(v) +
                     " m/s)",
                 "failure index", "time since first failure (s)", dat);
        }
    }
    return out;
}

inline PlotOutcome generate_plots_from_csv(const std::filesystem::path& aggregate_csv,
                                           const std::filesystem::path& out_dir) {
    return generate_plots(parse_aggregate_csv(read_text_file(aggregate_csv)), out_dir);
}

}  // namespace arena
