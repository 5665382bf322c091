#pragma once

// Random Waypoint mobility and link-lifetime prediction.

#include <stdexcept>
#include <vector>

#include "arena/core.hpp"
#include "arena/rng.hpp"

namespace arena {

struct AreaConfig {
    double width = 1000.0;
    double height = 1000.0;

    bool contains(Vec2 p) const {
        return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
    }
};

struct MobilityConfig {
    double v_max = 5.0;       // m/s
    double pause_time = 0.0;  // s, at each waypoint
};

struct NodeKinematics {
    Vec2 position;
    double speed = 0.0;    // m/s, current leg
    double heading = 0.0;  // rad, [0, 2*pi)
    Vec2 waypoint;
    double pause_remaining = 0.0;  // s left of the current pause

    Vec2 velocity() const {
        if (pause_remaining > 0.0) return {0.0, 0.0};
        return {speed * std::cos(heading), speed * std::sin(heading)};
    }

    // Straight-line extrapolation; ignores waypoint arrival. Used for
    // beacon-based position prediction.
    Vec2 position_after(double dt) const { return position + velocity() * dt; }
};

// Emitted whenever a node picks a new waypoint (mobility trace rows).
struct WaypointEvent {
    double time = 0.0;
    NodeId node = -1;
    Vec2 position;  // where the node stood when it retargeted
    Vec2 target;
    double speed = 0.0;
};

namespace detail {

// Pick a new waypoint and leg speed. Speed is uniform over (0, v_max]:
// 1 - uniform01() lies in (0, 1], so a zero-speed stall cannot occur.
inline void retarget(NodeKinematics& st, const MobilityConfig& mob,
                     const AreaConfig& area, Rng& rng) {
    Vec2 target;
    do {
        target.x = rng.uniform(0.0, area.width);
        target.y = rng.uniform(0.0, area.height);
    } while (target.x == st.position.x && target.y == st.position.y);
    st.waypoint = target;
    st.speed = mob.v_max * (1.0 - rng.uniform01());
    st.heading = std::atan2(target.y - st.position.y, target.x - st.position.x);
    if (st.heading < 0.0) st.heading += 2.0 * M_PI;
}

}  // namespace detail

// Initial placement: uniform position, then a first waypoint/speed draw.
// Draw order (x, y, waypoint, speed) is part of the deterministic contract.
inline NodeKinematics random_node_state(Rng& rng, const MobilityConfig& mob,
                                        const AreaConfig& area) {
    NodeKinematics st;
    st.position.x = rng.uniform(0.0, area.width);
    st.position.y = rng.uniform(0.0, area.height);
    detail::retarget(st, mob, area, rng);
    st.pause_remaining = 0.0;
    return st;
}

// Advance one node by dt, consuming pauses and waypoint arrivals in order.
// `now` is the time at the START of the step; trace rows (if requested) are
// stamped with the in-step arrival time.
inline void advance(NodeKinematics& st, double dt, const MobilityConfig& mob,
                    const AreaConfig& area, Rng& rng, double now = 0.0,
                    NodeId id = -1, std::vector<WaypointEvent>* trace = nullptr) {
    if (dt < 0.0) throw std::invalid_argument("advance: dt < 0");
    double left = dt;
    while (left > 0.0) {
        if (st.pause_remaining > 0.0) {
            const double hold = std::min(st.pause_remaining, left);
            st.pause_remaining -= hold;
            left -= hold;
            if (st.pause_remaining > 0.0) return;
            if (left <= 0.0) return;
        }
        const double gap = distance(st.position, st.waypoint);
        const double reach = st.speed * left;
        if (reach < gap) {
            st.position = st.position + st.velocity() * left;
            return;
        }
        // arrive at the waypoint within this step
        const double used = st.speed > 0.0 ? gap / st.speed : 0.0;
        st.position = st.waypoint;
        left -= used;
        st.pause_remaining = mob.pause_time;
        detail::retarget(st, mob, area, rng);
        if (trace) {
            trace->push_back({now + (dt - left), id, st.position, st.waypoint, st.speed});
        }
    }
}

// Link expiration time: how long two in-range nodes stay within `range` of
// each other assuming both keep their current velocity.
//
//   a = v_i cos(h_i) - v_j cos(h_j)     b = x_i - x_j
//   c = v_i sin(h_i) - v_j sin(h_j)     d = y_i - y_j
//   t = (-(ab + cd) + sqrt((a^2+c^2) r^2 - (ad - bc)^2)) / (a^2 + c^2)
//
// Equal velocities never separate -> kInfiniteTime. The discriminant is
// non-negative whenever the pair is currently in range; a materially
// negative value indicates a caller bug and throws rather than clamping.
inline double link_expiration_time(const NodeKinematics& ni,
                                   const NodeKinematics& nj, double range) {
    if (range <= 0.0) throw std::invalid_argument("link_expiration_time: range <= 0");
    const Vec2 vi = ni.velocity();
    const Vec2 vj = nj.velocity();
    const double a = vi.x - vj.x;
    const double b = ni.position.x - nj.position.x;
    const double c = vi.y - vj.y;
    const double d = ni.position.y - nj.position.y;
    if (b * b + d * d > range * range * (1.0 + 1e-12)) {
        throw std::invalid_argument("link_expiration_time: nodes out of range");
    }
    const double s = a * a + c * c;
    if (s == 0.0) return kInfiniteTime;
    const double cross = a * d - b * c;
    double disc = s * range * range - cross * cross;
    if (disc < 0.0) {
        if (disc < -1e-9 * s * range * range) {
            throw std::logic_error("link_expiration_time: negative discriminant");
        }
        disc = 0.0;
    }
    const double t = (-(a * b + c * d) + std::sqrt(disc)) / s;
    return t > 0.0 ? t : 0.0;
}

// A route lives as long as its weakest link.
inline double route_expiration_time(const std::vector<double>& link_lets) {
    if (link_lets.empty()) {
        throw std::invalid_argument("route_expiration_time: empty link list");
    }
    double ret = kInfiniteTime;
    for (double t : link_lets) ret = std::min(ret, t);
    return ret;
}

}  // namespace arena
