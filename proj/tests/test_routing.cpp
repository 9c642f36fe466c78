// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "fixtures.hpp"

using namespace sagsin;
using Catch::Matchers::WithinRel;

namespace {

bool has_kind(const std::vector<TreeViolation>& v, const std::string& kind) {
    return std::any_of(v.begin(), v.end(), [&](const TreeViolation& x) { return x.kind == kind; });
}

double ground_dmax(double tau) {
    const LayerDefaultsTable t;
    const auto a = make_node(0, LayerKind::Ground, NodeRole::Relay, {0, 0, 0}, t);
    const auto b = make_node(1, LayerKind::Ground, NodeRole::Relay, {0, 1, 0}, t);
    return max_link_distance(a, b, default_eve_field(), tau);
}

// Root, two mirrored relays, one user: the relays sit inside D_max of both
// ends, the user sits beyond D_max of the root.
FeasibleGraph diamond() {
    const double tau = 0.9999;
    const double d = 0.7 * ground_dmax(tau);
    Network net;
    net.nodes = {fixtures::grid_node(0, 0, 0), fixtures::grid_node(1, d, 1), fixtures::grid_node(2, d, -1),
                 fixtures::grid_node(3, 2 * d, 0, NodeRole::User)};
    net.root = 0;
    return FeasibleGraph(net, fixtures::lenient_policy(tau));
}

std::vector<std::vector<int>> adjacency(const FeasibleGraph& fg) {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(fg.size()));
    for (int i = 0; i < fg.size(); ++i) adj[static_cast<std::size_t>(i)] = fg.out(i);
    return adj;
}

// Max over every consistent combination of simple user paths, or nullopt
// when the enumeration would be too large for a unit test.
std::optional<double> enumerated_optimum(const FeasibleGraph& fg) {
    const auto adj = adjacency(fg);
    std::vector<std::vector<std::vector<int>>> options;
    double combos = 1;
    for (int u : fg.served_users()) {
        options.push_back(oracle::simple_paths(adj, fg.root(), u));
        combos *= static_cast<double>(options.back().size());
    }
    if (combos > 2e6) return std::nullopt;
    double best = 0.0;
    const auto users = fg.served_users();
    oracle::for_each_tree(options, [&](const std::vector<const std::vector<int>*>& pick) {
        std::map<int, std::vector<int>> paths;
        for (std::size_t k = 0; k < users.size(); ++k) paths[users[k]] = *pick[k];
        const auto g = RoutingGraph::from_node_paths(fg.root(), paths);
        best = std::max(best, allocate(g, fg).min_throughput_bps);
    });
    return best;
}

void check_solution_shape(const RoutingSolution& s, const FeasibleGraph& fg) {
    CHECK(validate_spanning_tree(s.graph).empty());
    for (const auto& e : s.graph.edges) {
        CHECK(fg.has_edge(e.from, e.to));
        CHECK(fg.link(e.from, e.to).distance_km <= fg.link(e.from, e.to).max_distance_km);
    }
    std::set<int> routed;
    for (const auto& [u, p] : s.graph.user_paths) routed.insert(u);
    const auto& served = fg.served_users();
    CHECK(routed == std::set<int>(served.begin(), served.end()));
}

} // namespace

TEST_CASE("tree validation") {
    SECTION("a path graph is a tree") {
        CHECK(validate_spanning_tree(RoutingGraph::from_node_paths(0, {{2, {0, 1, 2}}})).empty());
    }
    SECTION("a back edge breaks unit in-degree") {
        auto g = RoutingGraph::from_node_paths(0, {{2, {0, 1, 2}}});
        g.edges.insert({2, 1});
        CHECK(has_kind(validate_spanning_tree(g), "in_degree"));
    }
    SECTION("edge into the root") {
        auto g = RoutingGraph::from_node_paths(0, {{2, {0, 1, 2}}});
        g.edges.insert({1, 0});
        CHECK(has_kind(validate_spanning_tree(g), "root_in_degree"));
    }
    SECTION("detached cycle") {
        auto g = RoutingGraph::from_node_paths(0, {{1, {0, 1}}});
        g.nodes.insert({5, 6});
        g.edges.insert({5, 6});
        g.edges.insert({6, 5});
        CHECK(has_kind(validate_spanning_tree(g), "unreachable"));
    }
    SECTION("broken user paths") {
        auto g = RoutingGraph::from_node_paths(0, {{2, {0, 1, 2}}});
        g.user_paths[2] = {{0, 1}, {0, 2}};
        CHECK(has_kind(validate_spanning_tree(g), "path_gap"));
        g.user_paths[2] = {{1, 2}};
        CHECK(has_kind(validate_spanning_tree(g), "path_start"));
        g.user_paths[2] = {};
        CHECK(has_kind(validate_spanning_tree(g), "empty_path"));
    }
}

TEST_CASE("feasible graph construction") {
    SECTION("a lenient threshold links every relay pair") {
        Network net;
        for (int i = 0; i < 5; ++i) net.nodes.push_back(fixtures::grid_node(i, 7.0 * i, 3.0 * (i % 2)));
        net.root = 0;
        const FeasibleGraph fg(net, fixtures::lenient_policy(1e-9));
        CHECK(fg.edge_count() == 4 * 4);
        for (int j = 1; j < 5; ++j) CHECK(fg.in(j).size() == 4);
    }
    SECTION("far nodes are not linked") {
        Network net;
        net.nodes = {fixtures::line_node(0, 0), fixtures::line_node(1, 10000, NodeRole::User)};
        const FeasibleGraph fg(net, fixtures::lenient_policy(0.9999));
        CHECK(fg.edge_count() == 0);
        CHECK(fg.unserved_users() == std::vector<int>{1});
    }
    SECTION("denser eavesdroppers never add edges") {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            auto cfg = fixtures::small_config(seed);
            const auto net = random_scenario(cfg);
            const FeasibleGraph base(net, cfg.policy());
            for (auto k : kAllLayers) cfg.eve_field.density_per_layer[k] *= 2;
            const FeasibleGraph dense(net, cfg.policy());
            CHECK(dense.edge_count() <= base.edge_count());
            for (int i = 0; i < dense.size(); ++i)
                for (int j : dense.out(i)) CHECK(base.has_edge(i, j));
        }
    }
    SECTION("feasible edges respect the distance limit") {
        const auto fg = fixtures::feasible(fixtures::desk_config(3));
        for (int i = 0; i < fg.size(); ++i) {
            for (int j : fg.out(i)) {
                CHECK(fg.node(i).can_relay());
                CHECK(j != fg.root());
                CHECK(fg.link(i, j).distance_km <= fg.link(i, j).max_distance_km);
            }
        }
    }
}

TEST_CASE("candidate path sampling") {
    SECTION("diamond routes are equally likely") {
        const auto fg = diamond();
        REQUIRE_FALSE(fg.has_edge(0, 3));
        REQUIRE(fg.has_edge(1, 3));
        REQUIRE(fg.has_edge(2, 3));
        Rng rng = make_stream(4, 0);
        int via_one = 0;
        const int draws = 200;
        for (int k = 0; k < draws; ++k) {
            const auto p = random_shortest_path(fg, 3, rng);
            REQUIRE(p);
            if ((*p)[p->size() - 2] == 1) ++via_one;
        }
        CHECK(std::abs(via_one / double(draws) - 0.5) <= 0.15);
        const auto k50 = sample_candidate_paths(fg, 3, 50, 9);
        std::set<std::vector<int>> distinct;
        for (const auto& c : k50) distinct.insert(c.nodes);
        CHECK(distinct.size() == k50.size());
        CHECK(distinct.count({0, 1, 3}) == 1);
        CHECK(distinct.count({0, 2, 3}) == 1);
    }
    SECTION("unique route") {
        Network net;
        net.nodes = {fixtures::line_node(0, 0), fixtures::line_node(1, 5, NodeRole::User)};
        const FeasibleGraph fg(net, fixtures::lenient_policy(0.5));
        const auto c = sample_candidate_paths(fg, 1, 1, 3);
        REQUIRE(c.size() == 1);
        CHECK(c.front().nodes == std::vector<int>{0, 1});
        CHECK(c.front().edges() == std::vector<Edge>{{0, 1}});
    }
    SECTION("paths are simple, feasible and reproducible") {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto fg = fixtures::feasible(fixtures::small_config(seed));
            for (int u : fg.served_users()) {
                const auto a = sample_candidate_paths(fg, u, 12, seed);
                CHECK(a == sample_candidate_paths(fg, u, 12, seed));
                for (const auto& c : a) {
                    CHECK(std::set<int>(c.nodes.begin(), c.nodes.end()).size() == c.nodes.size());
                    CHECK(c.nodes.front() == fg.root());
                    CHECK(c.nodes.back() == u);
                    for (const auto& e : c.edges()) CHECK(fg.has_edge(e.from, e.to));
                }
            }
        }
    }
    SECTION("unreachable user") {
        Network net;
        net.nodes = {fixtures::line_node(0, 0), fixtures::line_node(1, 10000, NodeRole::User)};
        const FeasibleGraph fg(net, fixtures::lenient_policy(0.9999));
        try {
            sample_candidate_paths(fg, 1, 3, 1);
            FAIL("expected Unreachable");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Unreachable);
        }
    }
}

TEST_CASE("mcrr") {
    SECTION("single direct hop") {
        Network net;
        net.nodes = {fixtures::line_node(0, 0), fixtures::line_node(1, 5, NodeRole::User)};
        const FeasibleGraph fg(net, fixtures::lenient_policy(0.5));
        const auto s = mcrr(fg);
        CHECK(s.graph.edges == std::set<Edge>{{0, 1}});
        const double gamma = fg.spectral_efficiency(0, 1, fg.node(0).p_max_psd());
        CHECK_THAT(s.min_throughput_bps, WithinRel(fg.node(0).bandwidth_hz * gamma, 1e-12));
    }
    SECTION("outputs are trees with a non-decreasing trace") {
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            const auto fg = fixtures::feasible(fixtures::small_config(seed));
            McrrOptions opt;
            opt.seed = seed;
            const auto s = mcrr(fg, opt);
            check_solution_shape(s, fg);
            REQUIRE_FALSE(s.trace.empty());
            CHECK(s.trace.size() <= static_cast<std::size_t>(opt.max_rounds) + 1);
            for (std::size_t k = 1; k < s.trace.size(); ++k) CHECK(s.trace[k] >= s.trace[k - 1]);
            if (s.unserved.empty()) CHECK_THAT(s.min_throughput_bps, WithinRel(s.trace.back(), 1e-12));
        }
    }
    SECTION("bit-reproducible") {
        const auto fg = fixtures::feasible(fixtures::desk_config(5));
        McrrOptions opt;
        opt.seed = 77;
        const auto a = mcrr(fg, opt);
        const auto b = mcrr(fg, opt);
        CHECK(a.graph == b.graph);
        CHECK(a.trace == b.trace);
        CHECK(a.min_throughput_bps == b.min_throughput_bps);
    }
    SECTION("unserved users zero the objective") {
        auto cfg = fixtures::small_config(2);
        auto net = random_scenario(cfg);
        net.nodes.push_back(fixtures::line_node(static_cast<int>(net.nodes.size()) + 100, -170 * 111.19, NodeRole::User));
        const FeasibleGraph fg(net, cfg.policy());
        REQUIRE_FALSE(fg.unserved_users().empty());
        const auto s = mcrr(fg);
        CHECK(s.min_throughput_bps == 0.0);
        CHECK(s.unserved == fg.unserved_users());
        CHECK(validate_spanning_tree(s.graph).empty());
    }
}

TEST_CASE("exact brute force matches exhaustive enumeration") {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 60 && checked < 15; ++seed) {
        const auto fg = fixtures::feasible(fixtures::tree_config(seed));
        if (fg.served_users().empty() || !fg.unserved_users().empty()) continue;
        const auto want = enumerated_optimum(fg);
        if (!want) continue;
        ++checked;
        const auto exact = bruteforce_exact(fg);
        CHECK_THAT(exact.min_throughput_bps, WithinRel(*want, 1e-9));
        check_solution_shape(exact, fg);
        for (const auto& other : {mcrr(fg), greedy_route(fg), astar_route(fg, AstarMetric::Distance),
                                  astar_route(fg, AstarMetric::Hop), astar_route(fg, AstarMetric::InverseSe),
                                  bruteforce_sampled(fg, 200, seed)}) {
            CHECK(other.min_throughput_bps <= exact.min_throughput_bps * (1 + 1e-9));
        }
    }
    CHECK(checked >= 8);
}

TEST_CASE("brute force modes") {
    SECTION("three-node chain") {
        Network net;
        net.nodes = {fixtures::line_node(0, 0), fixtures::line_node(1, 0.6 * ground_dmax(0.9999)),
                     fixtures::line_node(2, 1.2 * ground_dmax(0.9999), NodeRole::User)};
        const FeasibleGraph fg(net, fixtures::lenient_policy(0.9999));
        REQUIRE_FALSE(fg.has_edge(0, 2));
        const auto s = bruteforce_route(fg);
        CHECK(s.graph.edges == std::set<Edge>{{0, 1}, {1, 2}});
    }
    SECTION("sampled mode is deterministic") {
        const auto fg = fixtures::feasible(fixtures::desk_config(2));
        const auto a = bruteforce_sampled(fg, 300, 5);
        const auto b = bruteforce_sampled(fg, 300, 5);
        CHECK(a.graph == b.graph);
        CHECK(a.min_throughput_bps == b.min_throughput_bps);
        check_solution_shape(a, fg);
    }
    SECTION("exact mode refuses a blown budget") {
        const auto fg = fixtures::feasible(fixtures::desk_config(2));
        try {
            bruteforce_exact(fg, 1000);
            FAIL("expected CombinatorialBlowup");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::CombinatorialBlowup);
        }
        BruteForceOptions opt;
        opt.max_search_nodes = 1000;
        opt.trials = 50;
        CHECK(bruteforce_route(fg, opt).graph == bruteforce_sampled(fg, 50, 1).graph);
    }
}

TEST_CASE("genetic search") {
    const auto fg = fixtures::feasible(fixtures::small_config(4));
    GeneticOptions opt;
    opt.generations = 60;
    opt.seed = 3;
    SECTION("best fitness never drops and runs reproduce") {
        const auto a = genetic_route(fg, opt);
        for (std::size_t k = 1; k < a.trace.size(); ++k) CHECK(a.trace[k] >= a.trace[k - 1]);
        CHECK(a.trace.size() == 61);
        check_solution_shape(a, fg);
        const auto b = genetic_route(fg, opt);
        CHECK(a.graph == b.graph);
        CHECK(a.trace == b.trace);
    }
    SECTION("identical genomes without mutation stay put") {
        int relays = 0;
        for (int i = 0; i < fg.size(); ++i) relays += i != fg.root() && fg.node(i).can_relay();
        opt.mutation_rate = 0.0;
        opt.initial_genome = std::vector<char>(static_cast<std::size_t>(relays), 1);
        const auto s = genetic_route(fg, opt);
        for (double t : s.trace) CHECK(t == s.trace.front());
    }
    SECTION("invalid options") {
        opt.population = 6;
        CHECK_THROWS_AS(genetic_route(fg, opt), Error);
    }
}

TEST_CASE("a-star baselines") {
    SECTION("distance metric finds classical shortest paths") {
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            const auto fg = fixtures::feasible(fixtures::small_config(seed));
            const auto n = static_cast<std::size_t>(fg.size());
            std::vector<std::vector<double>> w(n, std::vector<double>(n, oracle::kInf));
            for (int i = 0; i < fg.size(); ++i)
                for (int j : fg.out(i)) w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = fg.link(i, j).distance_km;
            const auto dist = oracle::floyd_warshall(w);
            for (int u : fg.served_users()) {
                const auto p = detail::metric_path(fg, fg.root(), u, AstarMetric::Distance, nullptr);
                REQUIRE(p);
                double len = 0;
                for (std::size_t k = 0; k + 1 < p->size(); ++k) len += fg.link((*p)[k], (*p)[k + 1]).distance_km;
                CHECK_THAT(len, WithinRel(dist[static_cast<std::size_t>(fg.root())][static_cast<std::size_t>(u)], 1e-12));
            }
        }
    }
    SECTION("hop metric takes the direct link") {
        Network net;
        net.nodes = {fixtures::line_node(0, 0), fixtures::line_node(1, 4), fixtures::line_node(2, 8),
                     fixtures::line_node(3, 12, NodeRole::User)};
        const FeasibleGraph fg(net, fixtures::lenient_policy(1e-6));
        REQUIRE(fg.has_edge(0, 3));
        CHECK(astar_route(fg, AstarMetric::Hop).graph.edges == std::set<Edge>{{0, 3}});
    }
    SECTION("path unions are trees") {
        for (std::uint64_t seed = 1; seed <= 40; ++seed) {
            const auto fg = fixtures::feasible(fixtures::desk_config(seed));
            for (auto m : {AstarMetric::Distance, AstarMetric::Hop, AstarMetric::InverseSe}) check_solution_shape(astar_route(fg, m), fg);
        }
    }
}

TEST_CASE("greedy") {
    SECTION("single user picks the best metric path") {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            auto cfg = fixtures::small_config(seed);
            cfg.counts.users = 1;
            const auto fg = fixtures::feasible(cfg);
            if (fg.served_users().empty()) continue;
            const double g = greedy_route(fg).min_throughput_bps;
            double best = 0.0;
            for (auto m : {AstarMetric::Distance, AstarMetric::Hop, AstarMetric::InverseSe})
                best = std::max(best, astar_route(fg, m).min_throughput_bps);
            CHECK_THAT(g, WithinRel(best, 1e-12));
            CHECK(g <= bruteforce_exact(fg).min_throughput_bps * (1 + 1e-12));
        }
    }
    SECTION("user order matters") {
        // Both orders checked exhaustively; the id order lands on the frozen value.
        auto cfg = fixtures::tree_config(8);
        cfg.counts.users = 2;
        auto net = random_scenario(cfg);
        const FeasibleGraph forward(net, cfg.policy());
        const auto users = net.users();
        REQUIRE(users.size() == 2);
        std::swap(net.nodes[static_cast<std::size_t>(users[0])], net.nodes[static_cast<std::size_t>(users[1])]);
        const FeasibleGraph backward(net, cfg.policy());
        const double a = greedy_route(forward).min_throughput_bps;
        const double b = greedy_route(backward).min_throughput_bps;
        CHECK(a != b);
        CHECK_THAT(a, WithinRel(476278243.8283847, 1e-9));
    }
}

TEST_CASE("path sampling scales near-linearithmically", "[perf]") {
    // Constant node density: the box grows with the node count. The base box
    // is two desk boxes wide so long air and space links stop adding degree
    // through the boundary. Timed per randomized draw, best of five runs.
    auto seconds_per_draw = [](int scale) {
        auto cfg = fixtures::desk_config(1);
        cfg.counts = {20 * scale, 20 * scale, 2 * scale, 2 * scale, 6};
        cfg.box.lon_max = cfg.box.lon_min + (cfg.box.lon_max - cfg.box.lon_min) * scale;
        const auto fg = fixtures::feasible(cfg);
        const auto& users = fg.served_users();
        REQUIRE_FALSE(users.empty());
        double best = kInf;
        for (int rep = 0; rep < 5; ++rep) {
            Rng rng = make_stream(static_cast<std::uint64_t>(rep), 0);
            const auto start = std::chrono::steady_clock::now();
            for (int draw = 0; draw < 12 * 30; ++draw)
                for (int u : users) (void)random_shortest_path(fg, u, rng);
            best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() /
                                      static_cast<double>(12 * 30 * users.size()));
        }
        return best;
    };
    const double small = seconds_per_draw(2);
    const double large = seconds_per_draw(4);
    CAPTURE(small, large);
    CHECK(large / small <= 2.6);
}
