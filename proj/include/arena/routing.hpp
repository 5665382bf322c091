#pragma once

// Route selection policies and per-node routing state. The flooding
// mechanics live in the engine; everything here is pure bookkeeping over
// collected route candidates.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "arena/core.hpp"
#include "arena/mobility.hpp"

namespace arena {

enum class Policy { forp, lbr, mmbcr };

inline std::string policy_name(Policy p) {
    switch (p) {
        case Policy::forp: return "forp";
        case Policy::lbr: return "lbr";
        case Policy::mmbcr: return "mmbcr";
    }
    throw std::logic_error("policy_name: bad enum");
}

inline Policy policy_from_name(const std::string& s) {
    if (s == "forp") return Policy::forp;
    if (s == "lbr") return Policy::lbr;
    if (s == "mmbcr") return Policy::mmbcr;
    throw std::invalid_argument("policy: expected forp|lbr|mmbcr, got `" + s + "`");
}

// Flooded discovery request. Metric lists grow as the request travels:
//   link_lets      FORP, one entry per traversed link
//   activities/    LBR, one entry per intermediate node (paired lists)
//   interferences
//   batteries      MMBCR, one entry per intermediate node
struct RouteRequest {
    std::uint64_t seq = 0;
    NodeId source = -1;
    NodeId dest = -1;
    std::vector<NodeId> path;  // starts [source], forwarders append themselves
    std::vector<double> link_lets;
    std::vector<int> activities;
    std::vector<int> interferences;
    std::vector<double> batteries;
};

// One request copy as recorded at the destination (path closed with dest).
struct RouteCandidate {
    std::vector<NodeId> path;
    std::vector<double> link_lets;
    std::vector<int> activities;
    std::vector<int> interferences;
    std::vector<double> batteries;
    double arrival_time = 0.0;
    std::uint64_t arrival_order = 0;  // recording sequence, strictly increasing
};

struct RouteReply {
    std::uint64_t seq = 0;
    std::vector<NodeId> path;  // full source..dest
    double metric = 0.0;
};

struct Route {
    std::uint64_t session = 0;
    std::vector<NodeId> path;
    double created_at = 0.0;
    double metric = 0.0;

    int hop_count() const { return static_cast<int>(path.size()) - 1; }
};

struct NeighborBeacon {
    double heard_at = 0.0;
    NodeKinematics kin;  // sender state at beacon time
    int activity = 0;
    double battery = 0.0;
};

struct NodeRoutingState {
    std::uint64_t next_seq = 0;  // last discovery seq issued by this source
    std::unordered_map<NodeId, std::uint64_t> forwarded_seq;  // per source
    int activity = 0;  // live routes currently relayed
    std::map<NodeId, NeighborBeacon> beacon_table;

    // first-copy rule: forward a request iff its seq is new for that source
    bool should_forward(NodeId source, std::uint64_t seq) const {
        auto it = forwarded_seq.find(source);
        return it == forwarded_seq.end() || seq > it->second;
    }
};

// LBR interference term: activity of every neighbour as advertised in the
// beacons currently on file. Missing neighbours simply contribute nothing.
inline int traffic_interference(const NodeRoutingState& st) {
    int ti = 0;
    for (const auto& [id, entry] : st.beacon_table) ti += entry.activity;
    return ti;
}

namespace detail {

inline void check_candidate(const RouteCandidate& c, Policy p) {
    if (c.path.size() < 2) throw std::logic_error("route candidate: path too short");
    const std::size_t hops = c.path.size() - 1;
    const std::size_t inner = c.path.size() - 2;
    switch (p) {
        case Policy::forp:
            if (c.link_lets.size() != hops) {
                throw std::logic_error("route candidate: link metric count mismatch");
            }
            break;
        case Policy::lbr:
            if (c.activities.size() != inner || c.interferences.size() != inner) {
                throw std::logic_error("route candidate: node metric count mismatch");
            }
            break;
        case Policy::mmbcr:
            if (c.batteries.size() != inner) {
                throw std::logic_error("route candidate: battery count mismatch");
            }
            break;
    }
}

}  // namespace detail

// FORP figure of merit: predicted route lifetime (higher is better).
inline double forp_ret(const RouteCandidate& c) {
    return route_expiration_time(c.link_lets);
}

// LBR figure of merit: total load on intermediates (lower is better).
// A direct source-dest path costs zero.
inline double lbr_cost(const RouteCandidate& c) {
    double cost = 0.0;
    for (std::size_t i = 0; i < c.activities.size(); ++i) {
        cost += c.activities[i] + c.interferences[i];
    }
    return cost;
}

// MMBCR figure of merit: weakest intermediate battery (higher is better).
// A direct path has no intermediates to drain, so it is never the bottleneck.
inline double mmbcr_bottleneck(const RouteCandidate& c) {
    double b = kInfiniteTime;
    for (double x : c.batteries) b = std::min(b, x);
    return b;
}

// Pick the winner among recorded candidates. Ties fall to the shorter path,
// then to the copy recorded first.
inline std::size_t select_route(Policy policy, const std::vector<RouteCandidate>& cands) {
    if (cands.empty()) throw std::invalid_argument("select_route: no candidates");
    auto metric = [&](const RouteCandidate& c) {
        switch (policy) {
            case Policy::forp: return forp_ret(c);
            case Policy::lbr: return lbr_cost(c);
            case Policy::mmbcr: return mmbcr_bottleneck(c);
        }
        throw std::logic_error("select_route: bad policy");
    };
    const bool higher_wins = policy != Policy::lbr;

    std::size_t best = 0;
    detail::check_candidate(cands[0], policy);
    double best_metric = metric(cands[0]);
    for (std::size_t i = 1; i < cands.size(); ++i) {
        detail::check_candidate(cands[i], policy);
        const double m = metric(cands[i]);
        bool wins = false;
        if (m != best_metric) {
            wins = higher_wins ? (m > best_metric) : (m < best_metric);
        } else if (cands[i].path.size() != cands[best].path.size()) {
            wins = cands[i].path.size() < cands[best].path.size();
        } else {
            wins = cands[i].arrival_order < cands[best].arrival_order;
        }
        if (wins) {
            best = i;
            best_metric = m;
        }
    }
    return best;
}

inline double route_metric(Policy policy, const RouteCandidate& c) {
    switch (policy) {
        case Policy::forp: return forp_ret(c);
        case Policy::lbr: return lbr_cost(c);
        case Policy::mmbcr: return mmbcr_bottleneck(c);
    }
    throw std::logic_error("route_metric: bad policy");
}

}  // namespace arena
