#pragma once

// CBR session generation and emission schedules.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "arena/core.hpp"
#include "arena/rng.hpp"

namespace arena {

struct SessionSpec {
    std::uint64_t id = 0;
    NodeId source = -1;
    NodeId dest = -1;
    double start = 0.0;        // s
    double rate = 4.0;         // packets/s
    int payload_bytes = 512;
};

// Draw sessions uniformly with role caps: a node may source at most two
// sessions and sink at most two. Start times are uniform over [1, 20] s.
// A dead-ended draw (only the chosen source left with sink capacity, etc.)
// restarts the whole assignment.
inline std::vector<SessionSpec> generate_sessions(int n_nodes, int n_sessions,
                                                  Rng& rng, double rate = 4.0,
                                                  int payload_bytes = 512) {
    if (n_nodes < 2) throw std::invalid_argument("generate_sessions: n_nodes < 2");
    if (n_sessions < 1) throw std::invalid_argument("generate_sessions: n_sessions < 1");
    if (n_sessions > 2 * n_nodes) {
        throw std::invalid_argument("generate_sessions: more sessions than role capacity");
    }

    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<int> src_count(n_nodes, 0), dst_count(n_nodes, 0);
        std::vector<SessionSpec> out;
        bool dead_end = false;
        for (int s = 0; s < n_sessions && !dead_end; ++s) {
            std::vector<NodeId> src_pool, dst_pool;
            for (NodeId n = 0; n < n_nodes; ++n) {
                if (src_count[n] < 2) src_pool.push_back(n);
            }
            const NodeId src = src_pool[rng.below(src_pool.size())];
            for (NodeId n = 0; n < n_nodes; ++n) {
                if (n != src && dst_count[n] < 2) dst_pool.push_back(n);
            }
            if (dst_pool.empty()) {
                dead_end = true;
                break;
            }
            const NodeId dst = dst_pool[rng.below(dst_pool.size())];
            ++src_count[src];
            ++dst_count[dst];
            SessionSpec spec;
            spec.id = static_cast<std::uint64_t>(s);
            spec.source = src;
            spec.dest = dst;
            spec.start = rng.uniform(1.0, 20.0);
            spec.rate = rate;
            spec.payload_bytes = payload_bytes;
            out.push_back(spec);
        }
        if (!dead_end) return out;
    }
    throw std::runtime_error("generate_sessions: could not satisfy role caps");
}

// Number of packets a session emits up to and including `horizon`.
inline std::size_t emission_count(const SessionSpec& s, double horizon) {
    if (s.rate <= 0.0) throw std::invalid_argument("emission_count: rate <= 0");
    if (horizon < s.start) return 0;
    return static_cast<std::size_t>(std::floor((horizon - s.start) * s.rate + 1e-9)) + 1;
}

// Emission instants: start, start + 1/rate, ... while <= horizon. The k-th
// instant is computed as start + k/rate (no accumulation drift).
inline std::vector<double> emission_times(const SessionSpec& s, double horizon) {
    const std::size_t n = emission_count(s, horizon);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.push_back(s.start + static_cast<double>(k) / s.rate);
    }
    return out;
}

}  // namespace arena
