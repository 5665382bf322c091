#pragma once

// Grid sweeps. A grid file is a scenario file whose policy, power_control,
// n_nodes, n_sessions and v_max_mps values may be comma-separated lists,
// plus replica counts (mobility_seeds, session_sets). The grid expands into
// a deterministic job list; jobs run isolated, optionally across threads,
// and rows fold into per-cell means. Replica seeds mix the master seed, the
// node count and the (mobility, session-set) indices only, so every policy,
// power setting and speed compares against identical worlds.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "arena/engine.hpp"
#include "arena/report.hpp"
#include "arena/rng.hpp"
#include "arena/scenario.hpp"

namespace arena {

struct SweepGrid {
    std::vector<Policy> policies;
    std::vector<bool> power_control{false};
    std::vector<int> n_nodes{50};
    std::vector<int> n_sessions{15};
    std::vector<double> v_max{5.0};
    int mobility_seeds = 5;
    int session_sets = 5;
    std::uint64_t master_seed = 1;
    Scenario base;  // scalar settings shared by every cell
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& key, const std::string& val) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = val.find(',', pos);
        const std::string item =
            trim(comma == std::string::npos ? val.substr(pos) : val.substr(pos, comma - pos));
        if (item.empty()) {
            throw std::invalid_argument(key + ": empty list element in `" + val + "`");
        }
        out.push_back(item);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline int parse_count(const std::string& key, const std::string& val) {
    const int n = parse_integer(key, val);
    if (n < 1) throw std::invalid_argument(key + ": must be at least 1, got `" + val + "`");
    return n;
}

}  // namespace detail

inline SweepGrid grid_from_kv(const std::map<std::string, std::string>& kv) {
    using namespace detail;
    SweepGrid g;
    bool have_policy = false;
    for (const auto& [key, val] : kv) {
        if (key == "policy") {
            g.policies.clear();
            for (const auto& item : split_list(key, val)) {
                g.policies.push_back(policy_from_name(item));
            }
            have_policy = true;
        } else if (key == "power_control") {
            g.power_control.clear();
            for (const auto& item : split_list(key, val)) {
                g.power_control.push_back(parse_flag(key, item));
            }
        } else if (key == "n_nodes") {
            g.n_nodes.clear();
            for (const auto& item : split_list(key, val)) {
                g.n_nodes.push_back(parse_integer(key, item));
            }
        } else if (key == "n_sessions") {
            g.n_sessions.clear();
            for (const auto& item : split_list(key, val)) {
                g.n_sessions.push_back(parse_integer(key, item));
            }
        } else if (key == "v_max_mps") {
            g.v_max.clear();
            for (const auto& item : split_list(key, val)) {
                g.v_max.push_back(parse_scalar(key, item));
            }
        } else if (key == "mobility_seeds") {
            g.mobility_seeds = parse_count(key, val);
        } else if (key == "session_sets") {
            g.session_sets = parse_count(key, val);
        } else if (key == "seed") {
            g.master_seed = parse_seed(key, val);
        } else if (key == "area_w_m") {
            g.base.area_w = parse_scalar(key, val);
        } else if (key == "area_h_m") {
            g.base.area_h = parse_scalar(key, val);
        } else if (key == "range_m") {
            g.base.range = parse_scalar(key, val);
        } else if (key == "pause_s") {
            g.base.pause = parse_scalar(key, val);
        } else if (key == "rate_pps") {
            g.base.rate = parse_scalar(key, val);
        } else if (key == "payload_bytes") {
            g.base.payload_bytes = parse_integer(key, val);
        } else if (key == "initial_energy_j") {
            g.base.initial_energy = parse_scalar(key, val);
        } else if (key == "horizon_s") {
            g.base.horizon = parse_scalar(key, val);
        } else if (key == "stop_after_failures") {
            g.base.stop_after_failures = parse_integer(key, val);
        } else if (key == "bandwidth_bps") {
            g.base.bandwidth = parse_scalar(key, val);
        } else if (key == "topology_dt_s") {
            g.base.topology_dt = parse_scalar(key, val);
        } else if (key == "reply_window_s") {
            g.base.reply_window = parse_scalar(key, val);
        } else {
            throw std::invalid_argument("unknown key `" + key + "`");
        }
    }
    if (!have_policy) throw std::invalid_argument("missing required key `policy`");
    return g;
}

inline SweepGrid parse_grid(const std::string& text) {
    return grid_from_kv(detail::parse_kv(text));
}

inline SweepGrid parse_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open grid file `" + path + "`");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_grid(buf.str());
}

// Same worlds for every (policy, power_control, v_max) cell: only the master
// seed, node count and replica indices feed the hash.
inline std::uint64_t replica_seed(std::uint64_t master, int n_nodes, int mobility_index,
                                  int session_index) {
    std::uint64_t h = fnv1a("replica");
    h = fnv1a_u64(master, h);
    h = fnv1a_u64(static_cast<std::uint64_t>(n_nodes), h);
    h = fnv1a_u64(static_cast<std::uint64_t>(mobility_index), h);
    h = fnv1a_u64(static_cast<std::uint64_t>(session_index), h);
    return h;
}

struct SweepJob {
    std::size_t index = 0;  // position in expansion order
    int mobility_index = 0;
    int session_index = 0;
    Scenario scenario;
};

inline std::vector<SweepJob> expand_jobs(const SweepGrid& g) {
    std::vector<SweepJob> jobs;
    for (Policy policy : g.policies) {
        for (bool pc : g.power_control) {
            for (int nodes : g.n_nodes) {
                for (int sessions : g.n_sessions) {
                    for (double v : g.v_max) {
                        for (int mi = 0; mi < g.mobility_seeds; ++mi) {
                            for (int si = 0; si < g.session_sets; ++si) {
                                SweepJob j;
                                j.index = jobs.size();
                                j.mobility_index = mi;
                                j.session_index = si;
                                j.scenario = g.base;
                                j.scenario.policy = policy;
                                j.scenario.power_control = pc;
                                j.scenario.n_nodes = nodes;
                                j.scenario.n_sessions = sessions;
                                j.scenario.v_max = v;
                                j.scenario.seed =
                                    replica_seed(g.master_seed, nodes, mi, si);
                                j.scenario.validate();
                                jobs.push_back(std::move(j));
                            }
                        }
                    }
                }
            }
        }
    }
    return jobs;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open `" + path.string() + "`");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write `" + path.string() + "`");
    out << content;
    if (!out) throw std::runtime_error("short write to `" + path.string() + "`");
}

struct SweepOutcome {
    int total = 0;
    int executed = 0;
    int reused = 0;
    std::vector<std::pair<std::string, std::string>> failures;  // (scenario hash, error)
};

// Runs every job not already present in <out_dir>/replicas.csv (when resume
// is set), then rewrites replicas.csv in expansion order and aggregate.csv
// in cell-key order. Output bytes are independent of the worker count.
inline SweepOutcome run_sweep(const SweepGrid& grid, const std::filesystem::path& out_dir,
                              int jobs, bool resume) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path replicas_path = out_dir / "replicas.csv";
    const fs::path aggregate_path = out_dir / "aggregate.csv";

    const std::vector<SweepJob> all = expand_jobs(grid);
    std::map<std::string, ReportRow> prior;
    if (resume && fs::exists(replicas_path)) {
        for (ReportRow& r : parse_report_csv(read_text_file(replicas_path))) {
            prior.emplace(r.scenario_hash, std::move(r));
        }
    }

    SweepOutcome out;
    out.total = static_cast<int>(all.size());
    std::vector<std::optional<ReportRow>> rows(all.size());
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto it = prior.find(all[i].scenario.hash_hex());
        if (it != prior.end()) {
            rows[i] = it->second;
            ++out.reused;
        } else {
            todo.push_back(i);
        }
    }

    std::atomic<std::size_t> cursor{0};
    std::mutex mu;
    std::vector<std::pair<std::string, std::string>> failures;
    auto worker = [&]() {
        while (true) {
            const std::size_t k = cursor.fetch_add(1);
            if (k >= todo.size()) return;
            const SweepJob& job = all[todo[k]];
            try {
                const ReplicaResult res = run_replica(job.scenario);
                ReportRow row = report_row_from(job.scenario, res.metrics);
                const std::lock_guard<std::mutex> lock(mu);
                rows[todo[k]] = std::move(row);
            } catch (const std::exception& e) {
                const std::lock_guard<std::mutex> lock(mu);
                failures.emplace_back(job.scenario.hash_hex(), e.what());
            }
        }
    };
    const int workers = std::max(1, jobs);
    if (workers == 1 || todo.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const std::size_t spawn =
            std::min(static_cast<std::size_t>(workers), todo.size());
        for (std::size_t w = 0; w < spawn; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<ReportRow> flat;
    flat.reserve(all.size());
    for (const auto& r : rows) {
        if (r) flat.push_back(*r);
    }
    out.executed = static_cast<int>(flat.size()) - out.reused;
    write_text_file(replicas_path, report_csv(flat));
    write_text_file(aggregate_path, aggregate_csv(aggregate_report_rows(flat)));

    std::sort(failures.begin(), failures.end());
    out.failures = std::move(failures);
    if (!out.failures.empty()) {
        std::string etext = "scenario_hash,error\n";
        for (const auto& [hash, msg] : out.failures) {
            std::string clean = msg;
            for (char& c : clean) {
                if (c == ',' || c == '\n' || c == '\r') c = ';';
            }
            etext += hash;
            etext += ',';
            etext += clean;
            etext += '\n';
        }
        write_text_file(out_dir / "errors.csv", etext);
    }
    return out;
}

}  // namespace arena
