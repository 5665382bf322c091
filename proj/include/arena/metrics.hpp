#pragma once

// Replica-level metric computations. All inputs are collected by the engine;
// nothing here touches simulation state.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace arena {

// A stretch of time during which a session held a route of `hops` hops.
struct HopSegment {
    int hops = 0;
    double duration = 0.0;  // s
};

// Time-averaged hop count: sum(h * d) / sum(d). Undefined when no route was
// ever held.
inline std::optional<double> time_averaged_hop_count(const std::vector<HopSegment>& segs) {
    double num = 0.0, den = 0.0;
    for (const auto& s : segs) {
        if (s.duration < 0.0) throw std::invalid_argument("hop segment: negative duration");
        if (s.hops <= 0) throw std::invalid_argument("hop segment: hops must be positive");
        num += s.hops * s.duration;
        den += s.duration;
    }
    if (den == 0.0) return std::nullopt;
    return num / den;
}

// Mean number of successful route discoveries per session.
inline double route_transitions_avg(const std::vector<int>& installs_per_session) {
    if (installs_per_session.empty()) {
        throw std::invalid_argument("route_transitions_avg: no sessions");
    }
    double sum = 0.0;
    for (int k : installs_per_session) {
        if (k < 0) throw std::invalid_argument("route_transitions_avg: negative count");
        sum += k;
    }
    return sum / static_cast<double>(installs_per_session.size());
}

// Mean end-to-end delay over delivered packets; undefined with none.
inline std::optional<double> delay_avg(const std::vector<double>& delays) {
    if (delays.empty()) return std::nullopt;
    double sum = 0.0;
    for (double d : delays) {
        if (d < 0.0) throw std::invalid_argument("delay_avg: negative delay");
        sum += d;
    }
    return sum / static_cast<double>(delays.size());
}

inline double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

// Population standard deviation (divide by N): the fairness figure.
inline double fairness_stddev(const std::vector<double>& xs) {
    const double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

// First node failure plus the 2nd..5th failures relative to the first.
struct FailureTimeline {
    std::optional<double> first;
    std::array<std::optional<double>, 4> rel;  // rel2..rel5
};

inline FailureTimeline failure_timeline(const std::vector<double>& deaths_sorted) {
    FailureTimeline out;
    for (std::size_t i = 1; i < deaths_sorted.size(); ++i) {
        if (deaths_sorted[i] < deaths_sorted[i - 1]) {
            throw std::invalid_argument("failure_timeline: not sorted");
        }
    }
    if (deaths_sorted.empty()) return out;
    out.first = deaths_sorted[0];
    for (std::size_t k = 1; k < deaths_sorted.size() && k <= 4; ++k) {
        out.rel[k - 1] = deaths_sorted[k] - deaths_sorted[0];
    }
    return out;
}

// Everything a replica reports. Optional fields stay empty when undefined
// (no delivery, no route, fewer than k failures).
struct MetricsReport {
    double route_transitions = 0.0;
    std::optional<double> hop_count;
    std::optional<double> delay_s;
    double energy_per_node_j = 0.0;
    double energy_stddev_j = 0.0;
    std::optional<double> first_failure_s;
    std::array<std::optional<double>, 4> failure_rel_s;  // rel2..rel5

    std::int64_t packets_sent = 0;
    std::int64_t packets_delivered = 0;
    std::int64_t discoveries = 0;
    std::int64_t routes_installed = 0;
    std::int64_t link_breaks = 0;
};

}  // namespace arena
