#pragma once

// Scenario files: `key = value` lines describing one simulation setup.
// Unknown or malformed keys are hard errors so a typo cannot silently fall
// back to a default.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "arena/csv.hpp"
#include "arena/mobility.hpp"
#include "arena/radio_energy.hpp"
#include "arena/rng.hpp"
#include "arena/routing.hpp"

namespace arena {

struct Scenario {
    int n_nodes = 50;
    double area_w = 1000.0;
    double area_h = 1000.0;
    double range = 250.0;
    bool power_control = false;
    Policy policy = Policy::forp;
    double v_max = 5.0;
    double pause = 0.0;
    int n_sessions = 15;
    double rate = 4.0;
    int payload_bytes = 512;
    double initial_energy = 1500.0;
    std::optional<double> horizon;           // exactly one of these two
    std::optional<int> stop_after_failures;  // is active after validation
    std::uint64_t seed = 1;
    double bandwidth = 2e6;
    double topology_dt = 0.1;
    double reply_window = 0.05;

    AreaConfig area() const { return {area_w, area_h}; }
    MobilityConfig mobility() const { return {v_max, pause}; }
    RadioConfig radio() const {
        RadioConfig r;
        r.range = range;
        r.bandwidth = bandwidth;
        r.power_control = power_control;
        return r;
    }

    void validate() const {
        if (n_nodes < 2) throw std::invalid_argument("n_nodes: need at least 2");
        if (area_w <= 0.0) throw std::invalid_argument("area_w_m: must be positive");
        if (area_h <= 0.0) throw std::invalid_argument("area_h_m: must be positive");
        if (v_max <= 0.0) throw std::invalid_argument("v_max_mps: must be positive");
        if (pause < 0.0) throw std::invalid_argument("pause_s: must be non-negative");
        if (n_sessions < 1) throw std::invalid_argument("n_sessions: must be positive");
        if (n_sessions > 2 * n_nodes) {
            throw std::invalid_argument("n_sessions: exceeds role capacity (2 per node)");
        }
        if (rate <= 0.0) throw std::invalid_argument("rate_pps: must be positive");
        if (payload_bytes < 1) throw std::invalid_argument("payload_bytes: must be positive");
        if (initial_energy <= 0.0) {
            throw std::invalid_argument("initial_energy_j: must be positive");
        }
        if (horizon && stop_after_failures) {
            throw std::invalid_argument(
                "horizon_s and stop_after_failures are mutually exclusive");
        }
        if (horizon && *horizon <= 0.0) {
            throw std::invalid_argument("horizon_s: must be positive");
        }
        if (stop_after_failures &&
            (*stop_after_failures < 1 || *stop_after_failures > n_nodes)) {
            throw std::invalid_argument("stop_after_failures: must be in [1, n_nodes]");
        }
        if (topology_dt <= 0.0) {
            throw std::invalid_argument("topology_dt_s: must be positive");
        }
        if (reply_window <= 0.0) {
            throw std::invalid_argument("reply_window_s: must be positive");
        }
        radio().validate();
    }

    // Neither stop key given -> a 1000 s horizon.
    double effective_horizon() const { return horizon ? *horizon : 1000.0; }
    bool failure_stop_mode() const { return stop_after_failures.has_value(); }

    // Canonical serialisation: sorted keys, exact float rendering. Input to
    // the scenario hash and to `run` output directories.
    std::string canonical() const {
        std::ostringstream out;
        out << "area_h_m=" << fmt_double(area_h) << '\n';
        out << "area_w_m=" << fmt_double(area_w) << '\n';
        out << "bandwidth_bps=" << fmt_double(bandwidth) << '\n';
        if (!stop_after_failures) {
            out << "horizon_s=" << fmt_double(effective_horizon()) << '\n';
        }
        out << "initial_energy_j=" << fmt_double(initial_energy) << '\n';
        out << "n_nodes=" << n_nodes << '\n';
        out << "n_sessions=" << n_sessions << '\n';
        out << "pause_s=" << fmt_double(pause) << '\n';
        out << "payload_bytes=" << payload_bytes << '\n';
        out << "policy=" << policy_name(policy) << '\n';
        out << "power_control=" << (power_control ? "true" : "false") << '\n';
        out << "range_m=" << fmt_double(range) << '\n';
        out << "rate_pps=" << fmt_double(rate) << '\n';
        out << "reply_window_s=" << fmt_double(reply_window) << '\n';
        out << "seed=" << seed << '\n';
        if (stop_after_failures) {
            out << "stop_after_failures=" << *stop_after_failures << '\n';
        }
        out << "topology_dt_s=" << fmt_double(topology_dt) << '\n';
        out << "v_max_mps=" << fmt_double(v_max) << '\n';
        return out.str();
    }

    std::string hash_hex() const {
        char buf[17];
        snprintf(buf, sizeof(buf), "%016llx",
                 static_cast<unsigned long long>(fnv1a(canonical())));
        return std::string(buf);
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_scalar(const std::string& key, const std::string& val) {
    try {
        return parse_double_field(val, key.c_str());
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": bad number `" + val + "`");
    }
}

inline int parse_integer(const std::string& key, const std::string& val) {
    const double d = parse_scalar(key, val);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) {
        throw std::invalid_argument(key + ": expected an integer, got `" + val + "`");
    }
    return i;
}

inline bool parse_flag(const std::string& key, const std::string& val) {
    if (val == "true" || val == "1" || val == "on") return true;
    if (val == "false" || val == "0" || val == "off") return false;
    throw std::invalid_argument(key + ": expected true|false, got `" + val + "`");
}

inline std::uint64_t parse_seed(const std::string& key, const std::string& val) {
    try {
        std::size_t used = 0;
        const std::uint64_t s = std::stoull(val, &used);
        if (used != val.size()) throw std::invalid_argument("");
        return s;
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": bad seed `" + val + "`");
    }
}

// key=value lines -> ordered map; `#` starts a comment; repeats are errors.
inline std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("line " + std::to_string(lineno) +
                                        ": expected `key = value`");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) {
            throw std::invalid_argument("line " + std::to_string(lineno) +
                                        ": expected `key = value`");
        }
        if (!kv.emplace(key, val).second) {
            throw std::invalid_argument("duplicate key `" + key + "`");
        }
    }
    return kv;
}

}  // namespace detail

inline Scenario scenario_from_kv(const std::map<std::string, std::string>& kv) {
    using namespace detail;
    Scenario s;
    bool have_policy = false;
    for (const auto& [key, val] : kv) {
        if (key == "n_nodes") s.n_nodes = parse_integer(key, val);
        else if (key == "area_w_m") s.area_w = parse_scalar(key, val);
        else if (key == "area_h_m") s.area_h = parse_scalar(key, val);
        else if (key == "range_m") s.range = parse_scalar(key, val);
        else if (key == "power_control") s.power_control = parse_flag(key, val);
        else if (key == "policy") { s.policy = policy_from_name(val); have_policy = true; }
        else if (key == "v_max_mps") s.v_max = parse_scalar(key, val);
        else if (key == "pause_s") s.pause = parse_scalar(key, val);
        else if (key == "n_sessions") s.n_sessions = parse_integer(key, val);
        else if (key == "rate_pps") s.rate = parse_scalar(key, val);
        else if (key == "payload_bytes") s.payload_bytes = parse_integer(key, val);
        else if (key == "initial_energy_j") s.initial_energy = parse_scalar(key, val);
        else if (key == "horizon_s") s.horizon = parse_scalar(key, val);
        else if (key == "stop_after_failures") s.stop_after_failures = parse_integer(key, val);
        else if (key == "seed") s.seed = parse_seed(key, val);
        else if (key == "bandwidth_bps") s.bandwidth = parse_scalar(key, val);
        else if (key == "topology_dt_s") s.topology_dt = parse_scalar(key, val);
        else if (key == "reply_window_s") s.reply_window = parse_scalar(key, val);
        else throw std::invalid_argument("unknown key `" + key + "`");
    }
    if (!have_policy) throw std::invalid_argument("missing required key `policy`");
    s.validate();
    return s;
}

inline Scenario parse_scenario(const std::string& text) {
    return scenario_from_kv(detail::parse_kv(text));
}

inline Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file `" + path + "`");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

}  // namespace arena
