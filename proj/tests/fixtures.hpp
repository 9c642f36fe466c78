// SPDX-License-Identifier: Apache-2.0
// Scenario builders shared by the unit suites and the acceptance runner.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sagsin/sagsin.hpp"

namespace fixtures {

using namespace sagsin;

// Nine relays and three users: small enough for exhaustive search.
inline ScenarioConfig small_config(std::uint64_t seed) {
    ScenarioConfig c = desk_scale_config();
    c.counts = {4, 3, 1, 1, 3};
    c.seed = seed;
    return c;
}

// Ten nodes or fewer.
inline ScenarioConfig tree_config(std::uint64_t seed) {
    ScenarioConfig c = desk_scale_config();
    c.counts = {3, 2, 1, 1, 3};
    c.seed = seed;
    return c;
}

inline ScenarioConfig desk_config(std::uint64_t seed) {
    ScenarioConfig c = desk_scale_config();
    c.seed = seed;
    return c;
}

inline FeasibleGraph feasible(const ScenarioConfig& c) { return FeasibleGraph(random_scenario(c), c.policy()); }

// Hand-placed network: positions in km east of (0, 0) along the equator.
inline NodeSpec line_node(int id, double east_km, NodeRole role = NodeRole::Relay,
                          LayerKind layer = LayerKind::Ground) {
    LayerDefaultsTable t;
    const double lon = east_km / (6371.0 * oracle::kPi / 180.0);
    return make_node(id, layer, role, {0.0, lon, 0.0}, t);
}

inline NodeSpec grid_node(int id, double east_km, double north_km, NodeRole role = NodeRole::Relay) {
    LayerDefaultsTable t;
    const double deg = 6371.0 * oracle::kPi / 180.0;
    return make_node(id, LayerKind::Ground, role, {north_km / deg, east_km / deg, 0.0}, t);
}

inline SecurityPolicy lenient_policy(double tau = 0.5) {
    SecurityPolicy p;
    p.field = default_eve_field();
    p.tau = tau;
    return p;
}

// Per-node grid search over (rho, sigma) with an SPSC filter, followed by the
// iterative max-min bandwidth split. Returns the oracle's min throughput.
inline double grid_power_oracle(const RoutingGraph& g, const FeasibleGraph& fg, int steps = 200) {
    std::map<int, std::vector<int>> children;
    std::map<int, double> weight;  // edge head -> sum of user hop counts
    for (const auto& [u, path] : g.user_paths)
        for (const auto& e : path) weight[e.to] += static_cast<double>(path.size());
    for (const auto& e : g.edges) children[e.from].push_back(e.to);
    std::map<int, double> best_rho;
    for (const auto& [i, kids] : children) {
        const auto& node = fg.node(i);
        const double pmax = node.p_max_psd(), pmin = node.p_min_psd();
        double best_rate = -1.0;
        for (int a = 0; a < steps; ++a) {
            const double rho = pmin + (pmax - pmin) * a / (steps - 1);
            for (int b = 0; b < steps; ++b) {
                const double sigma = pmax * b / (steps - 1);
                if (rho + sigma > pmax * (1 + 1e-12)) break;
                bool secure = true;
                for (int c : kids) secure = secure && fg.spsc(i, c, sigma) >= fg.policy().tau;
                if (!secure) continue;
                double load = 0.0;
                for (int c : kids) load += weight[c] / fg.spectral_efficiency(i, c, rho);
                const double rate = node.bandwidth_hz / load;
                if (rate > best_rate) {
                    best_rate = rate;
                    best_rho[i] = rho;
                }
                break;  // larger sigma only lowers the admissible rho
            }
        }
        if (best_rate < 0.0) return 0.0;
    }
    std::vector<oracle::Flow> flows;
    std::map<int, double> budget;
    for (const auto& [u, path] : g.user_paths) {
        for (const auto& e : path) {
            flows.push_back({e.from, u, fg.spectral_efficiency(e.from, e.to, best_rho.at(e.from)),
                             static_cast<double>(path.size())});
            budget[e.from] = fg.node(e.from).bandwidth_hz;
        }
    }
    return oracle::iterative_max_min(flows, budget);
}

// A random feasible tree over a random small scenario, or nullopt when the
// draw serves nobody.
inline std::optional<std::pair<FeasibleGraph, RoutingGraph>> random_tree(std::uint64_t seed) {
    FeasibleGraph fg = feasible(tree_config(seed));
    if (fg.served_users().empty()) return std::nullopt;
    auto sol = bruteforce_sampled(fg, 1, seed);
    return std::make_pair(std::move(fg), sol.graph);
}

} // namespace fixtures
