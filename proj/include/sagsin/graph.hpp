// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace sagsin {

struct Edge {
    int from = 0;
    int to = 0;
    auto operator<=>(const Edge&) const = default;
};

// Relay tree: node indices refer to positions in the network's node list.
struct RoutingGraph {
    int root = 0;
    std::set<int> nodes;
    std::set<Edge> edges;
    std::map<int, std::vector<Edge>> user_paths;

    bool operator==(const RoutingGraph&) const = default;

    int hop_count(int user) const { return static_cast<int>(user_paths.at(user).size()); }

    std::map<int, int> hop_counts() const {
        std::map<int, int> h;
        for (const auto& [u, path] : user_paths) h[u] = static_cast<int>(path.size());
        return h;
    }

    // Users whose path uses each edge.
    std::map<Edge, std::vector<int>> edge_users() const {
        std::map<Edge, std::vector<int>> out;
        for (const auto& [u, path] : user_paths)
            for (const auto& e : path) out[e].push_back(u);
        return out;
    }

    static RoutingGraph from_node_paths(int root, const std::map<int, std::vector<int>>& paths) {
        RoutingGraph g;
        g.root = root;
        g.nodes.insert(root);
        for (const auto& [u, nodes] : paths) {
            auto& edges = g.user_paths[u];
            for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
                Edge e{nodes[k], nodes[k + 1]};
                edges.push_back(e);
                g.edges.insert(e);
                g.nodes.insert(e.from);
                g.nodes.insert(e.to);
            }
        }
        return g;
    }
};

struct TreeViolation {
    std::string kind;
    int node = -1;
    std::string detail;
};

inline std::vector<TreeViolation> validate_spanning_tree(const RoutingGraph& g) {
    std::vector<TreeViolation> out;
    std::map<int, std::vector<int>> parents;
    std::map<int, std::vector<int>> children;
    for (const auto& e : g.edges) {
        if (!g.nodes.count(e.from) || !g.nodes.count(e.to)) {
            out.push_back({"dangling_edge", e.from, "edge endpoint not among included nodes"});
        }
        if (e.from == e.to) out.push_back({"self_loop", e.from, "edge from a node to itself"});
        parents[e.to].push_back(e.from);
        children[e.from].push_back(e.to);
    }
    if (!g.nodes.count(g.root)) out.push_back({"missing_root", g.root, "root not included"});
    if (parents.count(g.root)) out.push_back({"root_in_degree", g.root, "edge enters the root"});
    for (int v : g.nodes) {
        if (v == g.root) continue;
        const auto n = parents.count(v) ? parents[v].size() : 0;
        if (n != 1) out.push_back({"in_degree", v, "in-degree " + std::to_string(n)});
    }
    // Reachability from the root also rules out cycles once in-degrees are one.
    std::set<int> seen{g.root};
    std::vector<int> stack{g.root};
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int c : children[v]) {
            if (seen.insert(c).second) stack.push_back(c);
        }
    }
    for (int v : g.nodes) {
        if (!seen.count(v)) out.push_back({"unreachable", v, "not reachable from root (cycle or orphan)"});
    }
    for (const auto& [u, path] : g.user_paths) {
        if (path.empty()) {
            out.push_back({"empty_path", u, "user path has no edges"});
            continue;
        }
        if (path.front().from != g.root) out.push_back({"path_start", u, "path does not start at root"});
        if (path.back().to != u) out.push_back({"path_end", u, "path does not end at user"});
        std::set<int> visited{path.front().from};
        for (std::size_t k = 0; k < path.size(); ++k) {
            if (!g.edges.count(path[k])) out.push_back({"path_edge", u, "path edge missing from edge set"});
            if (k > 0 && path[k - 1].to != path[k].from) out.push_back({"path_gap", u, "path is not contiguous"});
            if (!visited.insert(path[k].to).second) out.push_back({"path_repeat", u, "path revisits a node"});
        }
    }
    return out;
}

} // namespace sagsin
