#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "arena/plots.hpp"
#include "arena/report.hpp"

namespace fs = std::filesystem;

namespace {

arena::AggregateRow cell(arena::Policy p, bool pc, int nodes, int sessions, double v) {
    arena::AggregateRow g;
    g.key = {p, pc, nodes, sessions, v};
    g.replicas = 25;
    const double base = 10.0 * static_cast<double>(p) + v;
    g.route_transitions = 1.0 + base;
    g.hop_count = 2.0 + base;
    g.delay_s = 0.01 + base;
    g.energy_per_node_j = 100.0 + base;
    g.energy_stddev_j = 5.0 + base;
    g.first_failure_s = 200.0 + base;
    g.rel_s = {1.0 + base, 2.0 + base, 3.0 + base, 4.0 + base};
    g.packets_sent = 1000.0;
    g.packets_delivered = 900.0;
    return g;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

bool has_file(const arena::PlotOutcome& out, const std::string& name) {
    return std::find(out.files.begin(), out.files.end(), name) != out.files.end();
}

}  // namespace

TEST_CASE("each condition yields six metric panels plus per-speed timelines", "[plots]") {
    const fs::path dir = fresh_dir("arena_plots_basic");
    std::vector<arena::AggregateRow> rows;
    for (arena::Policy p : {arena::Policy::forp, arena::Policy::mmbcr}) {
        for (double v : {5.0, 50.0}) rows.push_back(cell(p, false, 50, 15, v));
    }

    const arena::PlotOutcome out = arena::generate_plots(rows, dir);
    CHECK(out.warnings.empty());
    CHECK(out.files.size() == 16);  // (6 panels + 2 timelines) x (.gp + .dat)
    for (const char* stem :
         {"pc-off_n50_s15_route_transitions", "pc-off_n50_s15_hop_count",
          "pc-off_n50_s15_delay", "pc-off_n50_s15_energy", "pc-off_n50_s15_energy_stddev",
          "pc-off_n50_s15_first_failure", "pc-off_n50_s15_v5_failure_timeline",
          "pc-off_n50_s15_v50_failure_timeline"}) {
        CHECK(has_file(out, std::string(stem) + ".dat"));
        CHECK(has_file(out, std::string(stem) + ".gp"));
        CHECK(fs::exists(dir / (std::string(stem) + ".dat")));
        CHECK(fs::exists(dir / (std::string(stem) + ".gp")));
    }

    // data: one x row per speed, one column per policy, exact values
    const std::string dat =
        arena::read_text_file(dir / "pc-off_n50_s15_route_transitions.dat");
    CHECK(dat ==
          "# v_max_mps forp mmbcr\n"
          "5 6 26\n"
          "50 51 71\n");

    const std::string gp = arena::read_text_file(dir / "pc-off_n50_s15_route_transitions.gp");
    CHECK(gp.find("set output 'pc-off_n50_s15_route_transitions.png'") != std::string::npos);
    CHECK(gp.find("set datafile missing 'nan'") != std::string::npos);
    CHECK(gp.find("using 1:2 with linespoints title 'forp'") != std::string::npos);
    CHECK(gp.find("using 1:3 with linespoints title 'mmbcr'") != std::string::npos);

    // timeline data: failure index 2..5 against relative times
    const std::string tl =
        arena::read_text_file(dir / "pc-off_n50_s15_v5_failure_timeline.dat");
    CHECK(tl ==
          "# failure_index forp mmbcr\n"
          "2 6 26\n"
          "3 7 27\n"
          "4 8 28\n"
          "5 9 29\n");

    fs::remove_all(dir);
}

TEST_CASE("gaps become nan fields and warnings", "[plots]") {
    const fs::path dir = fresh_dir("arena_plots_gaps");
    std::vector<arena::AggregateRow> rows;
    rows.push_back(cell(arena::Policy::forp, false, 50, 15, 5.0));
    rows.push_back(cell(arena::Policy::forp, false, 50, 15, 10.0));
    rows.push_back(cell(arena::Policy::lbr, false, 50, 15, 5.0));  // lbr missing at v=10
    rows[0].hop_count.reset();  // forp@5 lacks one optional metric

    const arena::PlotOutcome out = arena::generate_plots(rows, dir);
    // lbr@10: 6 scalar panels + 4 timeline rows; forp@5: hop_count panel
    CHECK(out.warnings.size() == 11);
    CHECK(std::count(out.warnings.begin(), out.warnings.end(),
                     "pc-off_n50_s15_hop_count: no value for forp at v_max=5") == 1);
    CHECK(std::count(out.warnings.begin(), out.warnings.end(),
                     "pc-off_n50_s15_delay: no value for lbr at v_max=10") == 1);
    CHECK(std::count(out.warnings.begin(), out.warnings.end(),
                     "pc-off_n50_s15_v10_failure_timeline: no value for lbr at failure 2") ==
          1);

    const std::string hop = arena::read_text_file(dir / "pc-off_n50_s15_hop_count.dat");
    CHECK(hop ==
          "# v_max_mps forp lbr\n"
          "5 nan 17\n"
          "10 12 nan\n");

    fs::remove_all(dir);
}

TEST_CASE("no aggregate rows is an error", "[plots]") {
    const fs::path dir = fresh_dir("arena_plots_empty");
    CHECK_THROWS_AS(arena::generate_plots({}, dir), std::invalid_argument);
    // a header-only CSV carries no rows either
    fs::create_directories(dir);
    arena::write_text_file(dir / "aggregate.csv", std::string(arena::kAggregateHeader) + "\n");
    CHECK_THROWS_AS(arena::generate_plots_from_csv(dir / "aggregate.csv", dir),
                    std::invalid_argument);
    fs::remove_all(dir);
}

TEST_CASE("a single-policy aggregate plots one series", "[plots]") {
    const fs::path dir = fresh_dir("arena_plots_single");
    const arena::PlotOutcome out =
        arena::generate_plots({cell(arena::Policy::mmbcr, true, 100, 30, 20.0)}, dir);
    CHECK(out.files.size() == 14);  // 6 panels + 1 timeline
    const std::string gp = arena::read_text_file(dir / "pc-on_n100_s30_energy.gp");
    CHECK(gp.find("title 'mmbcr'") != std::string::npos);
    CHECK(gp.find("using 1:3") == std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("plots from a CSV file match plots from the parsed rows", "[plots]") {
    const fs::path dir_a = fresh_dir("arena_plots_direct");
    const fs::path dir_b = fresh_dir("arena_plots_csv");
    std::vector<arena::AggregateRow> rows;
    for (arena::Policy p : {arena::Policy::forp, arena::Policy::lbr, arena::Policy::mmbcr}) {
        for (double v : {5.0, 20.0}) rows.push_back(cell(p, true, 50, 30, v));
    }
    const arena::PlotOutcome direct = arena::generate_plots(rows, dir_a);

    fs::create_directories(dir_b);
    arena::write_text_file(dir_b / "aggregate.csv", arena::aggregate_csv(rows));
    const arena::PlotOutcome via_csv =
        arena::generate_plots_from_csv(dir_b / "aggregate.csv", dir_b);

    CHECK(via_csv.files == direct.files);
    CHECK(via_csv.warnings == direct.warnings);
    for (const std::string& name : direct.files) {
        CHECK(arena::read_text_file(dir_b / name) == arena::read_text_file(dir_a / name));
    }
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("the full grid produces the expected panel count", "[plots]") {
    const fs::path dir = fresh_dir("arena_plots_full");
    std::vector<arena::AggregateRow> rows;
    for (arena::Policy p : {arena::Policy::forp, arena::Policy::lbr, arena::Policy::mmbcr}) {
        for (bool pc : {false, true}) {
            for (int nodes : {50, 100}) {
                for (int sessions : {15, 30}) {
                    for (double v : {5.0, 10.0, 20.0, 30.0, 40.0, 50.0}) {
                        rows.push_back(cell(p, pc, nodes, sessions, v));
                    }
                }
            }
        }
    }
    const arena::PlotOutcome out = arena::generate_plots(rows, dir);
    CHECK(out.warnings.empty());
    // 8 conditions x (6 metric panels + 6 timelines), a script and a data file each
    CHECK(out.files.size() == 8 * 12 * 2);
    const std::set<std::string> unique(out.files.begin(), out.files.end());
    CHECK(unique.size() == out.files.size());
    fs::remove_all(dir);
}
