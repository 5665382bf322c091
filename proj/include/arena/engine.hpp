#pragma once

// Discrete-event simulator: Random Waypoint nodes, beaconing, flooding
// route discovery, an abstract deferral-based MAC, per-frame energy debits
// and the replica metrics. Event order is a strict (time, tie) total order,
// so a replica is a pure function of its scenario.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "arena/core.hpp"
#include "arena/metrics.hpp"
#include "arena/mobility.hpp"
#include "arena/radio_energy.hpp"
#include "arena/rng.hpp"
#include "arena/routing.hpp"
#include "arena/scenario.hpp"
#include "arena/traffic.hpp"

namespace arena {

inline constexpr double kBeaconPeriod = 1.0;   // s
inline constexpr int kBeaconBytes = 64;
inline constexpr int kRtsBytes = 40;
inline constexpr int kCtsBytes = 39;
inline constexpr int kAckBytes = 39;
inline constexpr int kHandshakeBytes = kRtsBytes + kCtsBytes + kAckBytes;
inline constexpr int kRreqBytes = 64;
inline constexpr int kRrepBytes = 64;
inline constexpr int kRerrBytes = 32;
inline constexpr double kDiscoveryTimeout = 1.0;   // s between re-floods
inline constexpr double kNeighborPurgeAge = 2.5;   // s: third missed beacon
inline constexpr std::size_t kSourceBufferCap = 64;

enum class EventKind {
    mobility_step,
    beacon_tick,
    packet_emit,
    frame_start,
    frame_end,
    discovery_timeout,
    reply_window_close,
    session_start,
};

struct Event {
    double time = 0.0;
    std::uint64_t tie = 0;
    EventKind kind{};
    std::uint64_t a = 0;
    std::uint64_t b = 0;
};

struct EventAfter {
    bool operator()(const Event& x, const Event& y) const {
        if (x.time != y.time) return x.time > y.time;
        return x.tie > y.tie;
    }
};

struct Packet {
    std::uint64_t session = 0;
    std::int64_t seq = 0;
    double emit_time = 0.0;
};

enum class FrameKind { data, rreq, rrep, rerr };

struct Frame {
    std::uint64_t id = 0;
    FrameKind kind = FrameKind::data;
    NodeId dst = -1;  // -1: broadcast
    int bytes = 0;    // frame body; data frames add the handshake on air
    std::uint64_t session = 0;
    Packet packet;
    RouteRequest rreq;
    RouteReply rrep;
    int hop_index = 0;  // rrep/rerr: path index of the frame's receiver
    std::vector<NodeId> rerr_path;
    double start_time = 0.0;
    Vec2 src_pos, dst_pos;
    double hop_dist = 0.0;
    double radius = 0.0;
};

struct RouteEventRow {
    enum class Kind { discovered, installed, broken, torn_down };
    double time = 0.0;
    std::uint64_t session = 0;
    Kind kind{};
    std::vector<NodeId> path;
    double metric = 0.0;
};

inline const char* route_event_name(RouteEventRow::Kind k) {
    switch (k) {
        case RouteEventRow::Kind::discovered: return "discovered";
        case RouteEventRow::Kind::installed: return "installed";
        case RouteEventRow::Kind::broken: return "broken";
        case RouteEventRow::Kind::torn_down: return "torn_down";
    }
    return "?";
}

struct FrameLogRow {
    double start = 0.0;
    double end = 0.0;
    FrameKind kind{};
    NodeId src = -1;
    NodeId dst = -1;
    std::uint64_t session = 0;
};

struct RunOptions {
    bool route_log = false;
    bool mobility_trace = false;
    bool frame_log = false;
    std::optional<std::vector<NodeKinematics>> kinematics_override;
    std::optional<std::vector<SessionSpec>> sessions_override;
};

struct ReplicaResult {
    MetricsReport metrics;
    EnergyLedger ledger;
    std::vector<SessionSpec> sessions;
    std::vector<RouteEventRow> route_events;
    std::vector<WaypointEvent> waypoint_trace;
    std::vector<FrameLogRow> frame_log;
    std::vector<std::pair<NodeId, double>> deaths;  // chronological
    double end_time = 0.0;
};

class Simulator {
  public:
    struct SessionRt {
        SessionSpec spec;
        enum class State { idle, discovering, active };
        State state = State::idle;
        bool alive = true;
        std::uint64_t disc_seq = 0;
        Route route;
        bool has_route = false;
        std::deque<Packet> buffer;
        std::int64_t emit_k = 0;
        int installs = 0;
        double seg_open = 0.0;
        std::vector<HopSegment> segments;
        std::vector<double> delays;
        std::int64_t sent = 0;
        std::int64_t delivered = 0;
    };

    explicit Simulator(Scenario scn, RunOptions opt = {})
        : scn_(std::move(scn)),
          opt_(std::move(opt)),
          rng_mob_(substream(scn_.seed, "mobility")) {
        scn_.validate();
        radio_ = scn_.radio();
        area_ = scn_.area();
        mob_ = scn_.mobility();
        init();
    }

    ReplicaResult run() {
        while (step()) {
        }
        return finish();
    }

    // Process one event. Returns false once the run is over.
    bool step() {
        if (done_) return false;
        if (events_.empty()) {
            end_run(scn_.failure_stop_mode() ? now_ : scn_.effective_horizon());
            return false;
        }
        const Event ev = events_.top();
        if (!scn_.failure_stop_mode() &&
            ev.time > scn_.effective_horizon() + 1e-9) {
            end_run(scn_.effective_horizon());
            return false;
        }
        events_.pop();
        now_ = ev.time;
        dispatch(ev);
        if (scn_.failure_stop_mode() &&
            deaths_.size() >= static_cast<std::size_t>(*scn_.stop_after_failures)) {
            end_run(deaths_[static_cast<std::size_t>(*scn_.stop_after_failures) - 1].second);
            return false;
        }
        if (alive_count_ == 0) {
            end_run(scn_.failure_stop_mode() ? now_ : scn_.effective_horizon());
            return false;
        }
        return true;
    }

    void run_until(double t) {
        while (!done_ && !events_.empty() && events_.top().time <= t) {
            if (!step()) break;
        }
        if (!done_) now_ = t;
    }

    ReplicaResult finish() {
        if (!done_) end_run(scn_.failure_stop_mode() ? now_ : scn_.effective_horizon());
        ReplicaResult res;
        res.end_time = end_time_;
        res.ledger = ledger_;
        res.deaths = deaths_;
        res.route_events = std::move(route_events_);
        res.waypoint_trace = std::move(wp_trace_);
        res.frame_log = std::move(frame_log_);
        for (const auto& s : sessions_) res.sessions.push_back(s.spec);

        MetricsReport& m = res.metrics;
        std::vector<int> installs;
        std::vector<HopSegment> segments;
        std::vector<double> delays;
        for (const auto& s : sessions_) {
            installs.push_back(s.installs);
            segments.insert(segments.end(), s.segments.begin(), s.segments.end());
            delays.insert(delays.end(), s.delays.begin(), s.delays.end());
        }
        m.route_transitions = route_transitions_avg(installs);
        m.hop_count = time_averaged_hop_count(segments);
        m.delay_s = delay_avg(delays);
        std::vector<double> consumed;
        for (NodeId v = 0; v < scn_.n_nodes; ++v) consumed.push_back(ledger_.consumed(v));
        m.energy_per_node_j = mean(consumed);
        m.energy_stddev_j = fairness_stddev(consumed);
        const FailureTimeline tl = failure_timeline(ledger_.death_times_sorted());
        m.first_failure_s = tl.first;
        m.failure_rel_s = tl.rel;
        m.packets_sent = packets_sent_;
        m.packets_delivered = packets_delivered_;
        m.discoveries = discoveries_;
        m.routes_installed = installs_;
        m.link_breaks = breaks_;
        return res;
    }

    // introspection for tests
    double now() const { return now_; }
    bool finished() const { return done_; }
    double end_time() const { return end_time_; }
    const EnergyLedger& ledger() const { return ledger_; }
    const std::vector<std::vector<NodeId>>& topology() const { return topo_; }
    const SessionRt& session(std::size_t i) const { return sessions_.at(i); }
    std::size_t session_count() const { return sessions_.size(); }
    const NodeKinematics& kinematics(NodeId v) const {
        return nodes_.at(static_cast<std::size_t>(v)).kin;
    }
    const NodeRoutingState& routing_state(NodeId v) const {
        return nodes_.at(static_cast<std::size_t>(v)).routing;
    }
    int total_activity() const {
        int sum = 0;
        for (const auto& nd : nodes_) sum += nd.routing.activity;
        return sum;
    }
    int live_route_inner_sum() const {
        int sum = 0;
        for (const auto& s : sessions_) {
            if (s.alive && s.has_route) {
                sum += static_cast<int>(s.route.path.size()) - 2;
            }
        }
        return sum;
    }

  private:
    struct NodeRt {
        NodeKinematics kin;
        NodeRoutingState routing;
        std::deque<Frame> queue;
        bool in_flight = false;
        bool start_scheduled = false;
    };

    struct FlightInfo {
        NodeId sender = -1;
        bool unicast = false;
        Vec2 src_pos, dst_pos;
        double radius = 0.0;
    };

    struct PendingReply {
        std::uint64_t session = 0;
        bool open = false;
        std::vector<RouteCandidate> cands;
    };

    void init() {
        const int n = scn_.n_nodes;
        ledger_ = EnergyLedger(n, scn_.initial_energy);
        alive_count_ = n;
        nodes_.resize(static_cast<std::size_t>(n));
        if (opt_.kinematics_override) {
            if (static_cast<int>(opt_.kinematics_override->size()) != n) {
                throw std::invalid_argument("kinematics override: wrong node count");
            }
            for (int v = 0; v < n; ++v) {
                nodes_[static_cast<std::size_t>(v)].kin = (*opt_.kinematics_override)[v];
            }
        } else {
            for (int v = 0; v < n; ++v) {
                nodes_[static_cast<std::size_t>(v)].kin =
                    random_node_state(rng_mob_, mob_, area_);
            }
        }
        if (opt_.mobility_trace) {
            for (int v = 0; v < n; ++v) {
                const auto& k = nodes_[static_cast<std::size_t>(v)].kin;
                wp_trace_.push_back({0.0, v, k.position, k.waypoint, k.speed});
            }
        }

        std::vector<SessionSpec> specs;
        if (opt_.sessions_override) {
            specs = *opt_.sessions_override;
            for (std::size_t i = 0; i < specs.size(); ++i) {
                const auto& sp = specs[i];
                if (sp.id != i) throw std::invalid_argument("session override: bad ids");
                if (sp.source < 0 || sp.source >= n || sp.dest < 0 || sp.dest >= n ||
                    sp.source == sp.dest) {
                    throw std::invalid_argument("session override: bad endpoints");
                }
            }
        } else {
            Rng rng_sessions = substream(scn_.seed, "sessions");
            specs = generate_sessions(n, scn_.n_sessions, rng_sessions, scn_.rate,
                                      scn_.payload_bytes);
        }
        for (const auto& sp : specs) {
            SessionRt s;
            s.spec = sp;
            sessions_.push_back(std::move(s));
        }

        rebuild_topology();
        schedule(0.0, EventKind::beacon_tick);
        schedule(scn_.topology_dt, EventKind::mobility_step);
        for (const auto& s : sessions_) {
            schedule(s.spec.start, EventKind::session_start, s.spec.id);
        }
    }

    void schedule(double t, EventKind k, std::uint64_t a = 0, std::uint64_t b = 0) {
        events_.push({t, next_tie_++, k, a, b});
    }

    void dispatch(const Event& ev) {
        switch (ev.kind) {
            case EventKind::mobility_step: on_mobility_step(); break;
            case EventKind::beacon_tick: on_beacon_tick(); break;
            case EventKind::session_start:
            case EventKind::packet_emit: on_packet_emit(ev.a); break;
            case EventKind::frame_start: on_frame_start(static_cast<NodeId>(ev.a)); break;
            case EventKind::frame_end: on_frame_end(ev.a); break;
            case EventKind::discovery_timeout: on_discovery_timeout(ev.a, ev.b); break;
            case EventKind::reply_window_close:
                on_reply_window_close(static_cast<NodeId>(ev.a), ev.b);
                break;
        }
    }

    void end_run(double t) {
        done_ = true;
        end_time_ = t;
        for (auto& s : sessions_) {
            if (s.alive && s.has_route) close_segment(s, end_time_);
        }
    }

    bool alive(NodeId v) const { return ledger_.alive(v); }

    NodeRt& node(NodeId v) { return nodes_[static_cast<std::size_t>(v)]; }

    void rebuild_topology() {
        const int n = scn_.n_nodes;
        topo_.assign(static_cast<std::size_t>(n), {});
        for (NodeId i = 0; i < n; ++i) {
            if (!alive(i)) continue;
            for (NodeId j = i + 1; j < n; ++j) {
                if (!alive(j)) continue;
                if (distance(node(i).kin.position, node(j).kin.position) <= radio_.range) {
                    topo_[static_cast<std::size_t>(i)].push_back(j);
                    topo_[static_cast<std::size_t>(j)].push_back(i);
                }
            }
        }
    }

    // ---- mobility / beacons -------------------------------------------

    void on_mobility_step() {
        ++mob_step_k_;
        const double step_start = now_ - scn_.topology_dt;
        for (NodeId v = 0; v < scn_.n_nodes; ++v) {
            // dead nodes keep moving: keeps traces identical across runs
            // that only differ in who dies when
            advance(node(v).kin, scn_.topology_dt, mob_, area_, rng_mob_, step_start,
                    v, opt_.mobility_trace ? &wp_trace_ : nullptr);
        }
        rebuild_topology();
        scan_routes_for_breaks();
        const double next = static_cast<double>(mob_step_k_ + 1) * scn_.topology_dt;
        if (scn_.failure_stop_mode() || next < scn_.effective_horizon()) {
            schedule(next, EventKind::mobility_step);
        }
    }

    void on_beacon_tick() {
        const std::size_t deaths_before = deaths_.size();
        const double t_beacon = packet_airtime(kBeaconBytes, radio_);
        for (NodeId v = 0; v < scn_.n_nodes; ++v) {
            if (!alive(v)) continue;
            const bool sender_died =
                ledger_.debit(v, radio_.fixed_tx_power * t_beacon,
                              EnergyCategory::beacon_tx, now_);
            // the beacon is on air regardless: neighbours still hear it
            NeighborBeacon entry;
            entry.heard_at = now_;
            entry.kin = node(v).kin;
            entry.activity = node(v).routing.activity;
            entry.battery = ledger_.residual(v);
            for (NodeId r : topo_[static_cast<std::size_t>(v)]) {
                if (!alive(r)) continue;
                const bool rx_died = ledger_.debit(r, radio_.rx_power * t_beacon,
                                                   EnergyCategory::beacon_rx, now_);
                node(r).routing.beacon_table[v] = entry;
                if (rx_died) process_death(r);
            }
            if (sender_died) process_death(v);
        }
        for (NodeId v = 0; v < scn_.n_nodes; ++v) {
            if (!alive(v)) continue;
            auto& table = node(v).routing.beacon_table;
            for (auto it = table.begin(); it != table.end();) {
                if (now_ - it->second.heard_at > kNeighborPurgeAge) {
                    it = table.erase(it);
                } else {
                    ++it;
                }
            }
        }
        if (deaths_.size() != deaths_before) {
            rebuild_topology();
            scan_routes_for_breaks();
            retry_blocked_starts();
        }
        ++beacon_k_;
        const double next = static_cast<double>(beacon_k_) * kBeaconPeriod;
        if (scn_.failure_stop_mode() || next < scn_.effective_horizon()) {
            schedule(next, EventKind::beacon_tick);
        }
    }

    // ---- traffic -------------------------------------------------------

    void on_packet_emit(std::uint64_t sid) {
        auto& s = sessions_[static_cast<std::size_t>(sid)];
        if (s.alive) {
            Packet p{sid, s.emit_k, now_};
            ++s.emit_k;
            ++s.sent;
            ++packets_sent_;
            if (s.has_route) {
                send_data(s, p);
            } else {
                buffer_packet(s, p);
                if (s.state == SessionRt::State::idle) initiate_discovery(s);
            }
            const double next = s.spec.start +
                                static_cast<double>(s.emit_k) / s.spec.rate;
            if (scn_.failure_stop_mode() || next <= scn_.effective_horizon() + 1e-9) {
                schedule(next, EventKind::packet_emit, sid);
            }
        }
    }

    void send_data(SessionRt& s, const Packet& p) {
        Frame f;
        f.kind = FrameKind::data;
        f.dst = s.route.path[1];
        f.bytes = s.spec.payload_bytes;
        f.session = s.spec.id;
        f.packet = p;
        enqueue_frame(s.spec.source, std::move(f));
    }

    void buffer_packet(SessionRt& s, const Packet& p) {
        s.buffer.push_back(p);
        trim_buffer(s);
    }

    void trim_buffer(SessionRt& s) {
        while (s.buffer.size() > kSourceBufferCap) {
            s.buffer.pop_front();  // oldest first
            ++buffer_drops_;
        }
    }

    void return_to_buffer(SessionRt& s, const Packet& p) {
        auto it = s.buffer.begin();
        while (it != s.buffer.end() && it->seq < p.seq) ++it;
        s.buffer.insert(it, p);
        trim_buffer(s);
    }

    // ---- MAC -----------------------------------------------------------

    void enqueue_frame(NodeId holder, Frame f) {
        f.id = next_frame_id_++;
        node(holder).queue.push_back(std::move(f));
        maybe_schedule_start(holder);
    }

    void maybe_schedule_start(NodeId v) {
        auto& nd = node(v);
        if (!alive(v) || nd.in_flight || nd.start_scheduled || nd.queue.empty()) return;
        nd.start_scheduled = true;
        schedule(now_, EventKind::frame_start, static_cast<std::uint64_t>(v));
    }

    void retry_blocked_starts() {
        for (NodeId v = 0; v < scn_.n_nodes; ++v) maybe_schedule_start(v);
    }

    void on_frame_start(NodeId v) {
        auto& nd = node(v);
        nd.start_scheduled = false;
        if (!alive(v) || nd.in_flight || nd.queue.empty()) return;
        Frame& f = nd.queue.front();

        if (f.kind == FrameKind::data) {
            // the route may have moved on while this frame sat queued
            auto& s = sessions_[static_cast<std::size_t>(f.session)];
            if (!s.alive) {
                nd.queue.pop_front();
                maybe_schedule_start(v);
                return;
            }
            if (!s.has_route) {
                return_to_buffer(s, f.packet);
                nd.queue.pop_front();
                maybe_schedule_start(v);
                return;
            }
            const auto& path = s.route.path;
            auto pos = std::find(path.begin(), path.end(), v);
            if (pos == path.end() || pos + 1 == path.end()) {
                return_to_buffer(s, f.packet);
                nd.queue.pop_front();
                maybe_schedule_start(v);
                return;
            }
            f.dst = *(pos + 1);
        }

        if (f.kind != FrameKind::rreq) {
            const bool reachable =
                alive(f.dst) &&
                distance(nd.kin.position, node(f.dst).kin.position) <= radio_.range;
            if (!reachable) {
                Frame failed = std::move(nd.queue.front());
                nd.queue.pop_front();
                on_start_failure(v, std::move(failed));
                maybe_schedule_start(v);
                return;
            }
        }

        // deferral: stay queued while inside any in-flight footprint
        const Vec2 here = nd.kin.position;
        for (const auto& [id, fl] : inflight_) {
            if (distance(here, fl.src_pos) <= fl.radius ||
                (fl.unicast && distance(here, fl.dst_pos) <= fl.radius)) {
                return;  // woken again by retry_blocked_starts
            }
        }

        f.start_time = now_;
        f.src_pos = here;
        double duration;
        if (f.kind == FrameKind::rreq) {
            f.radius = radio_.range;
            duration = packet_airtime(f.bytes, radio_);
        } else {
            f.dst_pos = node(f.dst).kin.position;
            f.hop_dist = distance(here, f.dst_pos);
            f.radius = interference_radius(f.hop_dist, radio_);
            const int on_air =
                f.kind == FrameKind::data ? f.bytes + kHandshakeBytes : f.bytes;
            duration = packet_airtime(on_air, radio_);
        }
        nd.in_flight = true;
        inflight_[f.id] = {v, f.kind != FrameKind::rreq, f.src_pos, f.dst_pos, f.radius};
        schedule(now_ + duration, EventKind::frame_end, f.id);
    }

    void on_start_failure(NodeId v, Frame f) {
        switch (f.kind) {
            case FrameKind::data: {
                auto& s = sessions_[static_cast<std::size_t>(f.session)];
                // next hop gone: this is how a stale route is noticed
                handle_link_break(v, s, &f.packet);
                break;
            }
            case FrameKind::rrep:
                ++rrep_drops_;
                break;
            case FrameKind::rerr:
                ++rerr_drops_;
                break;
            case FrameKind::rreq:
                throw std::logic_error("broadcast start cannot fail");
        }
    }

    void on_frame_end(std::uint64_t frame_id) {
        auto it = inflight_.find(frame_id);
        if (it == inflight_.end()) return;  // aborted: sender died mid-air
        const NodeId v = it->second.sender;
        inflight_.erase(it);
        auto& nd = node(v);
        if (nd.queue.empty() || nd.queue.front().id != frame_id) {
            throw std::logic_error("in-flight frame lost its queue slot");
        }
        Frame f = std::move(nd.queue.front());
        nd.queue.pop_front();
        nd.in_flight = false;
        if (opt_.frame_log) {
            frame_log_.push_back({f.start_time, now_, f.kind, v, f.dst, f.session});
        }

        const std::size_t deaths_before = deaths_.size();
        std::vector<NodeId> died;
        auto debit = [&](NodeId who, double e, EnergyCategory cat) {
            if (ledger_.debit(who, e, cat, now_)) died.push_back(who);
        };

        if (f.kind == FrameKind::rreq) {
            const double t_frame = packet_airtime(f.bytes, radio_);
            debit(v, radio_.fixed_tx_power * t_frame, EnergyCategory::discovery_tx);
            // receivers resolved at completion from the live topology
            const std::vector<NodeId> receivers = topo_[static_cast<std::size_t>(v)];
            for (NodeId r : receivers) {
                if (!alive(r)) continue;
                debit(r, radio_.rx_power * t_frame, EnergyCategory::discovery_rx);
            }
            for (NodeId r : receivers) {
                if (!alive(r)) continue;  // death while receiving: no payload
                deliver_rreq(f, v, r);
            }
        } else {
            const double t_body = packet_airtime(f.bytes, radio_);
            const double p_hop = tx_power(std::min(f.hop_dist, radio_.range), radio_);
            if (f.kind == FrameKind::data) {
                const double t_rts = packet_airtime(kRtsBytes, radio_);
                const double t_cts = packet_airtime(kCtsBytes, radio_);
                const double t_ack = packet_airtime(kAckBytes, radio_);
                debit(v, radio_.fixed_tx_power * t_rts, EnergyCategory::control_tx);
                debit(v, radio_.rx_power * (t_cts + t_ack), EnergyCategory::control_rx);
                debit(v, p_hop * t_body, EnergyCategory::data_tx);
                if (alive(f.dst)) {
                    debit(f.dst, radio_.rx_power * t_rts, EnergyCategory::control_rx);
                    debit(f.dst, p_hop * (t_cts + t_ack), EnergyCategory::control_tx);
                    debit(f.dst, radio_.rx_power * t_body, EnergyCategory::data_rx);
                }
            } else {
                debit(v, p_hop * t_body, EnergyCategory::discovery_tx);
                if (alive(f.dst)) {
                    debit(f.dst, radio_.rx_power * t_body, EnergyCategory::discovery_rx);
                }
            }
            switch (f.kind) {
                case FrameKind::data:
                    if (alive(f.dst)) {
                        deliver_data(f);
                    } else {
                        auto& s = sessions_[static_cast<std::size_t>(f.session)];
                        if (s.alive) return_to_buffer(s, f.packet);
                    }
                    break;
                case FrameKind::rrep:
                    if (alive(f.dst)) deliver_rrep(f); else ++rrep_drops_;
                    break;
                case FrameKind::rerr:
                    if (alive(f.dst)) deliver_rerr(f); else ++rerr_drops_;
                    break;
                case FrameKind::rreq:
                    break;
            }
        }

        for (NodeId d : died) process_death(d);
        if (deaths_.size() != deaths_before) {
            rebuild_topology();
            scan_routes_for_breaks();
        }
        maybe_schedule_start(v);
        retry_blocked_starts();
    }

    // ---- discovery -----------------------------------------------------

    void initiate_discovery(SessionRt& s) {
        const NodeId src = s.spec.source;
        const std::uint64_t seq = ++node(src).routing.next_seq;
        s.disc_seq = seq;
        s.state = SessionRt::State::discovering;
        ++discoveries_;
        disc_session_[{src, seq}] = s.spec.id;
        Frame f;
        f.kind = FrameKind::rreq;
        f.dst = -1;
        f.bytes = kRreqBytes;
        f.session = s.spec.id;
        f.rreq.seq = seq;
        f.rreq.source = src;
        f.rreq.dest = s.spec.dest;
        f.rreq.path = {src};
        enqueue_frame(src, std::move(f));
        schedule(now_ + kDiscoveryTimeout, EventKind::discovery_timeout, s.spec.id, seq);
    }

    void on_discovery_timeout(std::uint64_t sid, std::uint64_t seq) {
        auto& s = sessions_[static_cast<std::size_t>(sid)];
        if (!s.alive || s.state != SessionRt::State::discovering || s.disc_seq != seq) {
            return;
        }
        s.state = SessionRt::State::idle;
        initiate_discovery(s);
    }

    // FORP link lifetime as the receiver predicts it: own true state against
    // the sender's last beacon extrapolated to now (true state if no beacon
    // is on file yet).
    double predicted_let(NodeId receiver, NodeId sender) {
        const NodeKinematics& self = node(receiver).kin;
        NodeKinematics other;
        const auto& table = node(receiver).routing.beacon_table;
        auto it = table.find(sender);
        if (it != table.end()) {
            other = it->second.kin;
            other.position = other.position_after(now_ - it->second.heard_at);
        } else {
            other = node(sender).kin;
        }
        if (distance(self.position, other.position) > radio_.range) return 0.0;
        return link_expiration_time(self, other, radio_.range);
    }

    void deliver_rreq(const Frame& f, NodeId from, NodeId r) {
        const RouteRequest& q = f.rreq;
        if (r == q.dest) {
            const auto key = std::make_pair(q.source, q.seq);
            auto it = pending_replies_.find(key);
            if (it == pending_replies_.end()) {
                PendingReply pr;
                pr.session = disc_session_.at(key);
                pr.open = true;
                it = pending_replies_.emplace(key, std::move(pr)).first;
                schedule(now_ + scn_.reply_window, EventKind::reply_window_close,
                         static_cast<std::uint64_t>(q.source), q.seq);
            }
            if (!it->second.open) return;
            RouteCandidate c;
            c.path = q.path;
            c.path.push_back(r);
            c.link_lets = q.link_lets;
            c.activities = q.activities;
            c.interferences = q.interferences;
            c.batteries = q.batteries;
            if (scn_.policy == Policy::forp) {
                c.link_lets.push_back(predicted_let(r, from));
            }
            c.arrival_time = now_;
            c.arrival_order = cand_order_++;
            it->second.cands.push_back(std::move(c));
            return;
        }
        if (std::find(q.path.begin(), q.path.end(), r) != q.path.end()) return;
        auto& rt = node(r).routing;
        if (!rt.should_forward(q.source, q.seq)) return;
        rt.forwarded_seq[q.source] = q.seq;

        Frame g;
        g.kind = FrameKind::rreq;
        g.dst = -1;
        g.bytes = kRreqBytes;
        g.session = f.session;
        g.rreq = q;
        g.rreq.path.push_back(r);
        switch (scn_.policy) {
            case Policy::forp:
                g.rreq.link_lets.push_back(predicted_let(r, from));
                break;
            case Policy::lbr:
                g.rreq.activities.push_back(rt.activity);
                g.rreq.interferences.push_back(traffic_interference(rt));
                break;
            case Policy::mmbcr:
                g.rreq.batteries.push_back(ledger_.residual(r));
                break;
        }
        enqueue_frame(r, std::move(g));
    }

    void on_reply_window_close(NodeId source, std::uint64_t seq) {
        auto it = pending_replies_.find({source, seq});
        if (it == pending_replies_.end()) return;
        PendingReply& pr = it->second;
        pr.open = false;
        auto& s = sessions_[static_cast<std::size_t>(pr.session)];
        std::vector<RouteCandidate> cands = std::move(pr.cands);
        pr.cands.clear();
        if (!s.alive || s.state != SessionRt::State::discovering || s.disc_seq != seq) {
            return;
        }
        const NodeId dest = s.spec.dest;
        if (!alive(dest) || cands.empty()) return;
        const std::size_t best = select_route(scn_.policy, cands);
        const RouteCandidate& c = cands[best];
        const double metric = route_metric(scn_.policy, c);
        log_route(RouteEventRow::Kind::discovered, s.spec.id, c.path, metric);

        Frame f;
        f.kind = FrameKind::rrep;
        f.bytes = kRrepBytes;
        f.session = s.spec.id;
        f.rrep.seq = seq;
        f.rrep.path = c.path;
        f.rrep.metric = metric;
        f.hop_index = static_cast<int>(c.path.size()) - 2;
        f.dst = c.path[static_cast<std::size_t>(f.hop_index)];
        enqueue_frame(dest, std::move(f));
    }

    void deliver_rrep(const Frame& f) {
        const RouteReply& rep = f.rrep;
        const int idx = f.hop_index;
        if (idx > 0) {
            Frame g;
            g.kind = FrameKind::rrep;
            g.bytes = kRrepBytes;
            g.session = f.session;
            g.rrep = rep;
            g.hop_index = idx - 1;
            g.dst = rep.path[static_cast<std::size_t>(idx - 1)];
            enqueue_frame(rep.path[static_cast<std::size_t>(idx)], std::move(g));
            return;
        }
        // back at the source: install if this discovery is still current
        const NodeId src = rep.path.front();
        auto ds = disc_session_.find({src, rep.seq});
        if (ds == disc_session_.end()) return;
        auto& s = sessions_[static_cast<std::size_t>(ds->second)];
        if (!s.alive || s.state != SessionRt::State::discovering ||
            s.disc_seq != rep.seq) {
            return;
        }
        for (std::size_t i = 0; i < rep.path.size(); ++i) {
            if (!alive(rep.path[i])) { ++install_failures_; return; }
            if (i + 1 < rep.path.size() &&
                distance(node(rep.path[i]).kin.position,
                         node(rep.path[i + 1]).kin.position) > radio_.range) {
                ++install_failures_;
                return;
            }
        }
        install_route(s, rep);
    }

    void install_route(SessionRt& s, const RouteReply& rep) {
        s.route = Route{s.spec.id, rep.path, now_, rep.metric};
        s.has_route = true;
        s.state = SessionRt::State::active;
        s.seg_open = now_;
        ++s.installs;
        ++installs_;
        for (std::size_t i = 1; i + 1 < rep.path.size(); ++i) {
            ++node(rep.path[i]).routing.activity;
        }
        log_route(RouteEventRow::Kind::installed, s.spec.id, rep.path, rep.metric);
        while (!s.buffer.empty()) {
            Packet p = s.buffer.front();
            s.buffer.pop_front();
            send_data(s, p);
        }
    }

    void deliver_rerr(const Frame& f) {
        const int idx = f.hop_index;
        if (idx > 0) {
            Frame g;
            g.kind = FrameKind::rerr;
            g.bytes = kRerrBytes;
            g.session = f.session;
            g.rerr_path = f.rerr_path;
            g.hop_index = idx - 1;
            g.dst = f.rerr_path[static_cast<std::size_t>(idx - 1)];
            enqueue_frame(f.rerr_path[static_cast<std::size_t>(idx)], std::move(g));
            return;
        }
        auto& s = sessions_[static_cast<std::size_t>(f.session)];
        if (s.alive && s.state == SessionRt::State::idle && !s.has_route) {
            initiate_discovery(s);
        }
    }

    // ---- route lifecycle -----------------------------------------------

    void close_segment(SessionRt& s, double t) {
        const double dur = t - s.seg_open;
        if (dur > 0.0) {
            s.segments.push_back({s.route.hop_count(), dur});
        }
    }

    void tear_down(SessionRt& s) {
        close_segment(s, now_);
        for (std::size_t i = 1; i + 1 < s.route.path.size(); ++i) {
            auto& act = node(s.route.path[i]).routing.activity;
            if (act <= 0) throw std::logic_error("activity underflow");
            --act;
        }
        s.has_route = false;
        s.state = SessionRt::State::idle;
        log_route(RouteEventRow::Kind::torn_down, s.spec.id, s.route.path,
                  s.route.metric);
    }

    void handle_link_break(NodeId detector, SessionRt& s, const Packet* hitting) {
        ++breaks_;
        const std::vector<NodeId> old_path = s.route.path;
        log_route(RouteEventRow::Kind::broken, s.spec.id, old_path, s.route.metric);
        tear_down(s);

        // pull this session's queued data frames back into the source buffer;
        // whatever sits at a dead node is gone
        std::vector<Packet> rescued;
        if (hitting) rescued.push_back(*hitting);
        for (NodeId v : old_path) {
            if (!alive(v)) continue;
            auto& q = node(v).queue;
            const std::size_t skip = node(v).in_flight ? 1 : 0;  // front is on air
            std::size_t kept = 0;
            std::deque<Frame> keep;
            std::size_t index = 0;
            for (auto& fr : q) {
                if (index >= skip && fr.kind == FrameKind::data &&
                    fr.session == s.spec.id) {
                    rescued.push_back(fr.packet);
                } else {
                    keep.push_back(std::move(fr));
                    ++kept;
                }
                ++index;
            }
            (void)kept;
            q = std::move(keep);
        }
        std::sort(rescued.begin(), rescued.end(),
                  [](const Packet& a, const Packet& b) { return a.seq < b.seq; });
        for (const Packet& p : rescued) return_to_buffer(s, p);

        if (detector == s.spec.source) {
            if (s.alive) initiate_discovery(s);
            return;
        }
        auto pos = std::find(old_path.begin(), old_path.end(), detector);
        if (pos == old_path.end() || pos == old_path.begin()) {
            throw std::logic_error("break detector not on path");
        }
        const int idx = static_cast<int>(pos - old_path.begin());
        Frame g;
        g.kind = FrameKind::rerr;
        g.bytes = kRerrBytes;
        g.session = s.spec.id;
        g.rerr_path = old_path;
        g.hop_index = idx - 1;
        g.dst = old_path[static_cast<std::size_t>(idx - 1)];
        enqueue_frame(detector, std::move(g));
    }

    void scan_routes_for_breaks() {
        for (auto& s : sessions_) {
            if (!s.alive || !s.has_route) continue;
            const auto& path = s.route.path;
            for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                const bool ok =
                    alive(path[i]) && alive(path[i + 1]) &&
                    distance(node(path[i]).kin.position,
                             node(path[i + 1]).kin.position) <= radio_.range;
                if (!ok) {
                    handle_link_break(path[i], s, nullptr);
                    break;
                }
            }
        }
    }

    void deliver_data(const Frame& f) {
        auto& s = sessions_[static_cast<std::size_t>(f.session)];
        if (!s.alive) return;
        const NodeId here = f.dst;
        if (!s.has_route) {
            return_to_buffer(s, f.packet);
            return;
        }
        const auto& path = s.route.path;
        auto pos = std::find(path.begin(), path.end(), here);
        if (pos == path.end()) {
            return_to_buffer(s, f.packet);
            return;
        }
        if (here == path.back()) {
            ++s.delivered;
            ++packets_delivered_;
            s.delays.push_back(now_ - f.packet.emit_time);
            return;
        }
        Frame g;
        g.kind = FrameKind::data;
        g.dst = *(pos + 1);
        g.bytes = s.spec.payload_bytes;
        g.session = s.spec.id;
        g.packet = f.packet;
        enqueue_frame(here, std::move(g));
    }

    // ---- deaths ----------------------------------------------------------

    void terminate_session(SessionRt& s) {
        if (s.has_route) {
            close_segment(s, now_);
            for (std::size_t i = 1; i + 1 < s.route.path.size(); ++i) {
                auto& act = node(s.route.path[i]).routing.activity;
                if (act <= 0) throw std::logic_error("activity underflow");
                --act;
            }
            log_route(RouteEventRow::Kind::torn_down, s.spec.id, s.route.path,
                      s.route.metric);
            s.has_route = false;
        }
        s.state = SessionRt::State::idle;
        s.alive = false;
        s.buffer.clear();
    }

    void process_death(NodeId v) {
        deaths_.emplace_back(v, now_);
        --alive_count_;
        for (auto& s : sessions_) {
            if (s.alive && (s.spec.source == v || s.spec.dest == v)) {
                terminate_session(s);
            }
        }
        auto& nd = node(v);
        if (nd.in_flight) {
            // abort whatever is on air; its frame_end turns into a no-op
            inflight_.erase(nd.queue.front().id);
            nd.in_flight = false;
        }
        nd.queue.clear();
        // routes with v in transit fall out in the next break scan
    }

    void log_route(RouteEventRow::Kind kind, std::uint64_t session,
                   const std::vector<NodeId>& path, double metric) {
        if (!opt_.route_log) return;
        route_events_.push_back({now_, session, kind, path, metric});
    }

    Scenario scn_;
    RunOptions opt_;
    RadioConfig radio_;
    AreaConfig area_;
    MobilityConfig mob_;
    Rng rng_mob_;

    std::vector<NodeRt> nodes_;
    EnergyLedger ledger_;
    std::vector<SessionRt> sessions_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
    std::map<std::uint64_t, FlightInfo> inflight_;
    std::map<std::pair<NodeId, std::uint64_t>, std::uint64_t> disc_session_;
    std::map<std::pair<NodeId, std::uint64_t>, PendingReply> pending_replies_;
    std::vector<std::vector<NodeId>> topo_;
    std::vector<std::pair<NodeId, double>> deaths_;

    std::uint64_t next_tie_ = 0;
    std::uint64_t next_frame_id_ = 1;
    std::uint64_t cand_order_ = 0;
    std::int64_t mob_step_k_ = 0;
    std::int64_t beacon_k_ = 0;
    double now_ = 0.0;
    double end_time_ = 0.0;
    bool done_ = false;
    int alive_count_ = 0;

    std::int64_t packets_sent_ = 0;
    std::int64_t packets_delivered_ = 0;
    std::int64_t discoveries_ = 0;
    std::int64_t installs_ = 0;
    std::int64_t breaks_ = 0;
    std::int64_t buffer_drops_ = 0;
    std::int64_t rrep_drops_ = 0;
    std::int64_t rerr_drops_ = 0;
    std::int64_t install_failures_ = 0;

    std::vector<RouteEventRow> route_events_;
    std::vector<WaypointEvent> wp_trace_;
    std::vector<FrameLogRow> frame_log_;
};

inline ReplicaResult run_replica(const Scenario& scn, const RunOptions& opt = {}) {
    Simulator sim(scn, opt);
    return sim.run();
}

}  // namespace arena
