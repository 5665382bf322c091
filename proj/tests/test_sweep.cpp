#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "arena/report.hpp"
#include "arena/sweep.hpp"

using Catch::Approx;
namespace fs = std::filesystem;

namespace {

arena::ReportRow sample_row() {
    arena::ReportRow r;
    r.scenario_hash = "00deadbeef001234";
    r.seed = 987654321;
    r.policy = arena::Policy::lbr;
    r.power_control = true;
    r.v_max = 12.5;
    r.n_nodes = 50;
    r.n_sessions = 15;
    r.route_transitions = 2.25;
    r.hop_count = 3.5;
    r.delay_s = 0.0125;
    r.energy_per_node_j = 42.75;
    r.energy_stddev_j = 1.5;
    r.first_failure_s = 123.0;
    r.rel_s = {10.0, 20.5, 30.0, 40.0};
    r.packets_sent = 1000;
    r.packets_delivered = 900;
    return r;
}

bool rows_equal(const arena::ReportRow& a, const arena::ReportRow& b) {
    return arena::format_report_row(a) == arena::format_report_row(b);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("report rows round-trip through their CSV form", "[sweep]") {
    const arena::ReportRow full = sample_row();
    const std::string line = arena::format_report_row(full);
    CHECK(rows_equal(arena::parse_report_row(line), full));

    arena::ReportRow sparse = sample_row();
    sparse.hop_count.reset();
    sparse.delay_s.reset();
    sparse.first_failure_s.reset();
    sparse.rel_s = {std::nullopt, std::nullopt, std::nullopt, std::nullopt};
    const std::string sparse_line = arena::format_report_row(sparse);
    CHECK(arena::split_csv_row(sparse_line).size() == arena::kReportColumns);
    CHECK(rows_equal(arena::parse_report_row(sparse_line), sparse));
    CHECK_FALSE(arena::parse_report_row(sparse_line).hop_count.has_value());

    const std::string csv = arena::report_csv({full, sparse});
    const std::vector<arena::ReportRow> back = arena::parse_report_csv(csv);
    REQUIRE(back.size() == 2);
    CHECK(rows_equal(back[0], full));
    CHECK(rows_equal(back[1], sparse));
    CHECK(arena::report_csv(back) == csv);

    CHECK_THROWS_AS(arena::parse_report_row("a,b,c"), std::invalid_argument);
    CHECK_THROWS_AS(arena::parse_report_csv("bogus_header\n"), std::invalid_argument);
}

TEST_CASE("per-cell aggregation averages defined values only", "[sweep]") {
    arena::ReportRow r1 = sample_row();
    r1.policy = arena::Policy::forp;
    r1.power_control = false;
    r1.v_max = 5.0;
    r1.route_transitions = 1.0;
    r1.hop_count = 2.0;
    r1.delay_s = 0.1;
    r1.energy_per_node_j = 3.0;
    r1.energy_stddev_j = 0.5;
    r1.first_failure_s = 100.0;
    r1.rel_s = {10.0, 20.0, 30.0, 40.0};
    r1.packets_sent = 100;
    r1.packets_delivered = 90;

    arena::ReportRow r2 = r1;
    r2.seed += 1;
    r2.route_transitions = 3.0;
    r2.hop_count = 4.0;
    r2.delay_s.reset();
    r2.energy_per_node_j = 5.0;
    r2.energy_stddev_j = 1.5;
    r2.first_failure_s.reset();
    r2.rel_s = {std::nullopt, std::nullopt, std::nullopt, std::nullopt};
    r2.packets_sent = 200;
    r2.packets_delivered = 150;

    arena::ReportRow other = sample_row();  // lbr cell, sorts after forp
    other.power_control = false;

    const std::vector<arena::AggregateRow> agg =
        arena::aggregate_report_rows({other, r2, r1});
    REQUIRE(agg.size() == 2);

    const arena::AggregateRow& cell = agg[0];
    CHECK(cell.key.policy == arena::Policy::forp);
    CHECK(cell.replicas == 2);
    CHECK(cell.route_transitions == Approx(2.0));
    REQUIRE(cell.hop_count.has_value());
    CHECK(*cell.hop_count == Approx(3.0));
    REQUIRE(cell.delay_s.has_value());
    CHECK(*cell.delay_s == Approx(0.1));  // only r1 defined it
    CHECK(cell.energy_per_node_j == Approx(4.0));
    CHECK(cell.energy_stddev_j == Approx(1.0));
    REQUIRE(cell.first_failure_s.has_value());
    CHECK(*cell.first_failure_s == Approx(100.0));
    for (int k = 0; k < 4; ++k) {
        REQUIRE(cell.rel_s[k].has_value());
        CHECK(*cell.rel_s[k] == Approx(10.0 * (k + 1)));
    }
    CHECK(cell.packets_sent == Approx(150.0));
    CHECK(cell.packets_delivered == Approx(120.0));

    CHECK(agg[1].key.policy == arena::Policy::lbr);
    CHECK(agg[1].replicas == 1);

    // permutation invariance, including the serialized form
    const std::string canon = arena::aggregate_csv(agg);
    CHECK(arena::aggregate_csv(arena::aggregate_report_rows({r1, other, r2})) == canon);
    const std::vector<arena::AggregateRow> reparsed = arena::parse_aggregate_csv(canon);
    CHECK(arena::aggregate_csv(reparsed) == canon);
}

TEST_CASE("grid files parse lists, counts and scalar settings", "[sweep]") {
    const std::string text =
        "policy = forp, lbr , mmbcr\n"
        "power_control = false,true\n"
        "n_nodes = 50 ,100\n"
        "n_sessions = 15\n"
        "v_max_mps = 5, 10, 20\n"
        "mobility_seeds = 2\n"
        "session_sets = 3\n"
        "seed = 42\n"
        "horizon_s = 50\n"
        "initial_energy_j = 100\n";
    const arena::SweepGrid g = arena::parse_grid(text);
    CHECK(g.policies == std::vector<arena::Policy>{arena::Policy::forp, arena::Policy::lbr,
                                                   arena::Policy::mmbcr});
    CHECK(g.power_control == std::vector<bool>{false, true});
    CHECK(g.n_nodes == std::vector<int>{50, 100});
    CHECK(g.n_sessions == std::vector<int>{15});
    CHECK(g.v_max == std::vector<double>{5.0, 10.0, 20.0});
    CHECK(g.mobility_seeds == 2);
    CHECK(g.session_sets == 3);
    CHECK(g.master_seed == 42);
    REQUIRE(g.base.horizon.has_value());
    CHECK(*g.base.horizon == 50.0);
    CHECK(g.base.initial_energy == 100.0);

    CHECK_THROWS_WITH(arena::parse_grid("policy = forp\nfoo = 1\n"),
                      Catch::Matchers::ContainsSubstring("foo"));
    CHECK_THROWS_WITH(arena::parse_grid("v_max_mps = 5\n"),
                      Catch::Matchers::ContainsSubstring("policy"));
    CHECK_THROWS_WITH(arena::parse_grid("policy = forp\nmobility_seeds = 0\n"),
                      Catch::Matchers::ContainsSubstring("mobility_seeds"));
    CHECK_THROWS_WITH(arena::parse_grid("policy = forp,,lbr\n"),
                      Catch::Matchers::ContainsSubstring("policy"));
    CHECK_THROWS_WITH(arena::parse_grid("policy = forp\nv_max_mps = 5,x\n"),
                      Catch::Matchers::ContainsSubstring("v_max_mps"));
}

TEST_CASE("job expansion is deterministic and pairs worlds across cells", "[sweep]") {
    arena::SweepGrid g;
    g.policies = {arena::Policy::forp, arena::Policy::lbr};
    g.power_control = {false};
    g.n_nodes = {10};
    g.n_sessions = {2};
    g.v_max = {5.0};
    g.mobility_seeds = 2;
    g.session_sets = 2;
    g.master_seed = 7;
    g.base.horizon = 20.0;

    const std::vector<arena::SweepJob> jobs = arena::expand_jobs(g);
    REQUIRE(jobs.size() == 8);
    std::set<std::string> hashes;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        CHECK(jobs[i].index == i);
        CHECK(jobs[i].scenario.policy ==
              (i < 4 ? arena::Policy::forp : arena::Policy::lbr));
        CHECK(jobs[i].mobility_index == static_cast<int>((i / 2) % 2));
        CHECK(jobs[i].session_index == static_cast<int>(i % 2));
        hashes.insert(jobs[i].scenario.hash_hex());
    }
    CHECK(hashes.size() == 8);  // every job is a distinct scenario

    // same replica indices -> same world regardless of policy
    for (int k = 0; k < 4; ++k) {
        CHECK(jobs[k].scenario.seed == jobs[k + 4].scenario.seed);
    }
    CHECK(std::set<std::uint64_t>{jobs[0].scenario.seed, jobs[1].scenario.seed,
                                  jobs[2].scenario.seed, jobs[3].scenario.seed}
              .size() == 4);

    // master seed and node count both feed the derivation
    CHECK(arena::replica_seed(7, 10, 0, 0) != arena::replica_seed(8, 10, 0, 0));
    CHECK(arena::replica_seed(7, 10, 0, 0) != arena::replica_seed(7, 11, 0, 0));

    // invalid cells surface the offending key at expansion time
    arena::SweepGrid bad = g;
    bad.n_sessions = {64};
    CHECK_THROWS_WITH(arena::expand_jobs(bad),
                      Catch::Matchers::ContainsSubstring("n_sessions"));
}

TEST_CASE("sweeps write deterministic, resumable, parallel-safe outputs", "[sweep]") {
    arena::SweepGrid g;
    g.policies = {arena::Policy::forp, arena::Policy::lbr};
    g.power_control = {false};
    g.n_nodes = {10};
    g.n_sessions = {3};
    g.v_max = {5.0, 10.0};
    g.mobility_seeds = 2;
    g.session_sets = 1;
    g.master_seed = 99;
    g.base.horizon = 10.0;
    g.base.initial_energy = 50.0;

    const fs::path dir1 = fresh_dir("arena_sweep_serial");
    const arena::SweepOutcome first = arena::run_sweep(g, dir1, 1, false);
    CHECK(first.total == 8);
    CHECK(first.executed == 8);
    CHECK(first.reused == 0);
    CHECK(first.failures.empty());

    const std::string replicas = arena::read_text_file(dir1 / "replicas.csv");
    const std::string aggregate = arena::read_text_file(dir1 / "aggregate.csv");
    const std::vector<arena::ReportRow> rows = arena::parse_report_csv(replicas);
    REQUIRE(rows.size() == 8);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].policy == (i < 4 ? arena::Policy::forp : arena::Policy::lbr));
        CHECK(rows[i].n_nodes == 10);
    }
    // the published aggregate equals an independent fold of the replica rows
    CHECK(arena::aggregate_csv(arena::aggregate_report_rows(rows)) == aggregate);
    const std::vector<arena::AggregateRow> cells = arena::parse_aggregate_csv(aggregate);
    REQUIRE(cells.size() == 4);
    for (const auto& c : cells) CHECK(c.replicas == 2);

    SECTION("resume skips completed replicas and leaves bytes unchanged") {
        const arena::SweepOutcome again = arena::run_sweep(g, dir1, 1, true);
        CHECK(again.executed == 0);
        CHECK(again.reused == 8);
        CHECK(arena::read_text_file(dir1 / "replicas.csv") == replicas);
        CHECK(arena::read_text_file(dir1 / "aggregate.csv") == aggregate);
    }

    SECTION("a full rerun reproduces identical bytes") {
        const arena::SweepOutcome again = arena::run_sweep(g, dir1, 1, false);
        CHECK(again.executed == 8);
        CHECK(arena::read_text_file(dir1 / "replicas.csv") == replicas);
        CHECK(arena::read_text_file(dir1 / "aggregate.csv") == aggregate);
    }

    SECTION("worker count does not change any output byte") {
        const fs::path dir4 = fresh_dir("arena_sweep_parallel");
        const arena::SweepOutcome par = arena::run_sweep(g, dir4, 4, false);
        CHECK(par.executed == 8);
        CHECK(arena::read_text_file(dir4 / "replicas.csv") == replicas);
        CHECK(arena::read_text_file(dir4 / "aggregate.csv") == aggregate);
        fs::remove_all(dir4);
    }

    SECTION("partial prior results are kept and only the gap is run") {
        const fs::path dir2 = fresh_dir("arena_sweep_partial");
        fs::create_directories(dir2);
        // seed the output with only the first three rows, as an interrupt would
        std::string partial = arena::kReportHeader;
        partial += '\n';
        for (int i = 0; i < 3; ++i) {
            partial += arena::format_report_row(rows[static_cast<std::size_t>(i)]);
            partial += '\n';
        }
        arena::write_text_file(dir2 / "replicas.csv", partial);
        const arena::SweepOutcome rest = arena::run_sweep(g, dir2, 1, true);
        CHECK(rest.reused == 3);
        CHECK(rest.executed == 5);
        CHECK(arena::read_text_file(dir2 / "replicas.csv") == replicas);
        CHECK(arena::read_text_file(dir2 / "aggregate.csv") == aggregate);
        fs::remove_all(dir2);
    }

    fs::remove_all(dir1);
}
