#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "arena/routing.hpp"
#include "arena/rng.hpp"
#include "route_oracle.hpp"

using namespace arena;

namespace {

RouteCandidate forp_cand(std::vector<NodeId> path, std::vector<double> lets,
                         std::uint64_t order) {
    RouteCandidate c;
    c.path = std::move(path);
    c.link_lets = std::move(lets);
    c.arrival_order = order;
    return c;
}

RouteCandidate lbr_cand(std::vector<NodeId> path, std::vector<int> acts,
                        std::vector<int> tis, std::uint64_t order) {
    RouteCandidate c;
    c.path = std::move(path);
    c.activities = std::move(acts);
    c.interferences = std::move(tis);
    c.arrival_order = order;
    return c;
}

RouteCandidate mmbcr_cand(std::vector<NodeId> path, std::vector<double> batteries,
                          std::uint64_t order) {
    RouteCandidate c;
    c.path = std::move(path);
    c.batteries = std::move(batteries);
    c.arrival_order = order;
    return c;
}

// independent reference selection used by the randomized cross-check
std::size_t reference_select(Policy p, const std::vector<RouteCandidate>& cs) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < cs.size(); ++i) {
        const RouteCandidate& a = cs[i];
        const RouteCandidate& b = cs[best];
        double ma, mb;
        switch (p) {
            case Policy::forp: ma = forp_ret(a), mb = forp_ret(b); break;
            case Policy::lbr: ma = -lbr_cost(a), mb = -lbr_cost(b); break;
            case Policy::mmbcr: ma = mmbcr_bottleneck(a), mb = mmbcr_bottleneck(b); break;
        }
        if (ma > mb || (ma == mb && a.path.size() < b.path.size()) ||
            (ma == mb && a.path.size() == b.path.size() &&
             a.arrival_order < b.arrival_order)) {
            best = i;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("policy names round-trip", "[routing]") {
    CHECK(policy_from_name("forp") == Policy::forp);
    CHECK(policy_from_name("lbr") == Policy::lbr);
    CHECK(policy_from_name("mmbcr") == Policy::mmbcr);
    CHECK(policy_name(Policy::mmbcr) == "mmbcr");
    CHECK_THROWS_AS(policy_from_name("dsr"), std::invalid_argument);
}

TEST_CASE("forp keeps the route that lives longest", "[routing]") {
    // {10,20} -> RET 10 loses to {15,12} -> RET 12
    auto a = forp_cand({0, 1, 2}, {10.0, 20.0}, 1);
    auto b = forp_cand({0, 3, 2}, {15.0, 12.0}, 2);
    CHECK(select_route(Policy::forp, {a, b}) == 1);
    CHECK(forp_ret(a) == 10.0);
    CHECK(forp_ret(b) == 12.0);
}

TEST_CASE("lbr prefers idle intermediates and free direct paths", "[routing]") {
    auto direct = forp_cand({0, 2}, {}, 5);  // no intermediates at all
    auto loaded = lbr_cand({0, 1, 2}, {1}, {3}, 1);
    CHECK(lbr_cost(direct) == 0.0);
    CHECK(lbr_cost(loaded) == 4.0);
    CHECK(select_route(Policy::lbr, {loaded, direct}) == 1);
}

TEST_CASE("mmbcr maximises the weakest battery", "[routing]") {
    auto a = mmbcr_cand({0, 1, 2, 3}, {50.0, 80.0}, 1);
    auto b = mmbcr_cand({0, 4, 5, 3}, {60.0, 60.0}, 2);
    CHECK(mmbcr_bottleneck(a) == 50.0);
    CHECK(mmbcr_bottleneck(b) == 60.0);
    CHECK(select_route(Policy::mmbcr, {a, b}) == 1);

    // direct path: nothing in the middle to exhaust
    auto direct = mmbcr_cand({0, 3}, {}, 3);
    CHECK(mmbcr_bottleneck(direct) == kInfiniteTime);
    CHECK(select_route(Policy::mmbcr, {a, b, direct}) == 2);
}

TEST_CASE("metric ties fall to the shorter path then first arrival", "[routing]") {
    auto long5 = forp_cand({0, 1, 2, 3, 4, 9}, {10, 30, 40, 50, 60}, 1);
    auto short3 = forp_cand({0, 7, 8, 9}, {10, 25, 35}, 2);
    CHECK(select_route(Policy::forp, {long5, short3}) == 1);

    auto first = forp_cand({0, 1, 9}, {10, 20}, 4);
    auto second = forp_cand({0, 2, 9}, {10, 20}, 7);
    CHECK(select_route(Policy::forp, {second, first}) == 1);
    CHECK(select_route(Policy::forp, {first, second}) == 0);
}

TEST_CASE("selection agrees with a reference argbest on random inputs", "[routing]") {
    Rng rng(substream_seed(8, "routing-random"));
    for (int trial = 0; trial < 2000; ++trial) {
        const auto policy = static_cast<Policy>(rng.below(3));
        const int n = 1 + static_cast<int>(rng.below(8));
        std::vector<RouteCandidate> cands;
        for (int i = 0; i < n; ++i) {
            const int hops = 1 + static_cast<int>(rng.below(4));
            RouteCandidate c;
            for (int k = 0; k <= hops; ++k) c.path.push_back(k * 10 + i);
            for (int k = 0; k < hops; ++k) {
                // small integer pool to provoke plenty of ties
                c.link_lets.push_back(static_cast<double>(rng.below(4) + 1));
            }
            for (int k = 0; k < hops - 1; ++k) {
                c.activities.push_back(static_cast<int>(rng.below(3)));
                c.interferences.push_back(static_cast<int>(rng.below(3)));
                c.batteries.push_back(static_cast<double>(rng.below(4) * 25));
            }
            c.arrival_order = trial * 100ULL + i;
            cands.push_back(std::move(c));
        }
        REQUIRE(select_route(policy, cands) == reference_select(policy, cands));
    }
}

TEST_CASE("mmbcr winner is never battery-dominated", "[routing]") {
    Rng rng(substream_seed(12, "mmbcr-dominance"));
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<RouteCandidate> cands;
        const int n = 2 + static_cast<int>(rng.below(6));
        for (int i = 0; i < n; ++i) {
            const int inner = 1 + static_cast<int>(rng.below(3));
            std::vector<NodeId> path{0};
            std::vector<double> batt;
            for (int k = 0; k < inner; ++k) {
                path.push_back(10 + i * 4 + k);
                batt.push_back(rng.uniform(1.0, 100.0));
            }
            path.push_back(1);
            cands.push_back(mmbcr_cand(std::move(path), std::move(batt), i));
        }
        const std::size_t pick = select_route(Policy::mmbcr, cands);
        for (const auto& c : cands) {
            REQUIRE(mmbcr_bottleneck(cands[pick]) >= mmbcr_bottleneck(c));
        }
    }
}

TEST_CASE("forp choice is invariant under exact time rescaling", "[routing]") {
    Rng rng(substream_seed(21, "forp-scale"));
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<RouteCandidate> cands;
        const int n = 2 + static_cast<int>(rng.below(5));
        for (int i = 0; i < n; ++i) {
            const int hops = 1 + static_cast<int>(rng.below(4));
            std::vector<NodeId> path{0};
            std::vector<double> lets;
            for (int k = 0; k < hops - 1; ++k) path.push_back(10 + i * 4 + k);
            path.push_back(1);
            for (int k = 0; k < hops; ++k) lets.push_back(rng.uniform(0.5, 60.0));
            cands.push_back(forp_cand(std::move(path), std::move(lets), i));
        }
        const std::size_t base = select_route(Policy::forp, cands);
        for (double scale : {0.25, 0.5, 2.0, 8.0}) {
            auto scaled = cands;
            for (auto& c : scaled) {
                for (auto& t : c.link_lets) t *= scale;  // exact: powers of two
            }
            REQUIRE(select_route(Policy::forp, scaled) == base);
        }
    }
}

TEST_CASE("malformed candidates are rejected", "[routing]") {
    auto bad = forp_cand({0, 1, 2}, {10.0}, 1);  // 2 hops, 1 link metric
    CHECK_THROWS_AS(select_route(Policy::forp, {bad}), std::logic_error);
    CHECK_THROWS_AS(select_route(Policy::forp, {}), std::invalid_argument);
    auto bad_lbr = lbr_cand({0, 1, 2}, {1, 2}, {0}, 1);  // pair length mismatch
    CHECK_THROWS_AS(select_route(Policy::lbr, {bad_lbr}), std::logic_error);
}

TEST_CASE("first-copy rule tracks the highest forwarded seq per source", "[routing]") {
    NodeRoutingState st;
    CHECK(st.should_forward(4, 1));
    st.forwarded_seq[4] = 1;
    CHECK_FALSE(st.should_forward(4, 1));
    CHECK(st.should_forward(4, 2));
    CHECK(st.should_forward(9, 1));  // different source, independent
}

TEST_CASE("traffic interference sums advertised activity", "[routing]") {
    NodeRoutingState st;
    CHECK(traffic_interference(st) == 0);
    st.beacon_table[3] = {1.0, {}, 2, 90.0};
    st.beacon_table[7] = {1.0, {}, 0, 80.0};
    st.beacon_table[9] = {2.0, {}, 5, 70.0};
    CHECK(traffic_interference(st) == 7);
}

TEST_CASE("selection over enumerated graph paths matches brute force", "[routing]") {
    // every simple path of a random graph becomes a candidate; the selector
    // must agree with a direct transcription of each policy formula
    Rng rng(0x5E1);
    int instances = 0;
    while (instances < 300) {
        testutil::GraphInstance g = testutil::random_graph(rng);
        const auto paths = testutil::all_simple_paths(g, 0, g.n - 1);
        if (paths.empty()) continue;
        ++instances;
        const auto cands = testutil::candidates_from_paths(g, paths);
        for (Policy p : {Policy::forp, Policy::lbr, Policy::mmbcr}) {
            REQUIRE(select_route(p, cands) == testutil::reference_best(p, g, paths));
        }
    }
}
