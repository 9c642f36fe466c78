// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "sagsin/error.hpp"
#include "sagsin/feasible.hpp"
#include "sagsin/graph.hpp"
#include "sagsin/rng.hpp"
#include "sagsin/rrm.hpp"

namespace sagsin {

// Mutable relay tree with per-node load accumulators. Adding or removing a
// user path refreshes only the transmitting nodes on that path.
class TreeState {
public:
    explicit TreeState(const FeasibleGraph& fg)
        : fg_(&fg),
          n_(static_cast<std::size_t>(fg.size())),
          parent_(n_, -1),
          in_tree_(n_, 0),
          children_(n_),
          edge_weight_(n_, 0),
          edge_users_(n_, 0),
          rate_(n_, kInf),
          tau_(n_, 0.0),
          user_path_(n_) {
        if (fg.root() >= 0) in_tree_[static_cast<std::size_t>(fg.root())] = 1;
    }

    const FeasibleGraph& feasible() const { return *fg_; }
    bool contains(int v) const { return in_tree_[idx(v)] != 0; }
    int parent(int v) const { return parent_[idx(v)]; }
    bool has_user(int u) const { return !user_path_[idx(u)].empty(); }
    const std::vector<int>& user_path(int u) const { return user_path_[idx(u)]; }
    int user_count() const { return users_; }

    std::vector<int> path_to(int v) const {
        std::vector<int> p;
        for (int w = v; w != -1; w = parent_[idx(w)]) p.push_back(w);
        std::reverse(p.begin(), p.end());
        return p;
    }

    // Candidate re-expressed against the current tree: the tree route to the
    // deepest candidate node already in the tree, then the candidate's tail.
    std::vector<int> splice(const std::vector<int>& candidate) const {
        std::size_t anchor = 0;
        for (std::size_t k = 0; k < candidate.size(); ++k)
            if (contains(candidate[k])) anchor = k;
        auto p = path_to(candidate[anchor]);
        p.insert(p.end(), candidate.begin() + static_cast<std::ptrdiff_t>(anchor) + 1, candidate.end());
        return p;
    }

    void add_user(int u, const std::vector<int>& path) {
        require(path.size() >= 2 && path.front() == fg_->root() && path.back() == u, ErrorCode::InvalidArgument,
                "user path must run from the root to the user");
        require(!has_user(u), ErrorCode::InvalidArgument, "user already routed");
        const int h = static_cast<int>(path.size()) - 1;
        for (std::size_t k = 1; k < path.size(); ++k) {
            const int a = path[k - 1], b = path[k];
            if (contains(b)) {
                require(parent_[idx(b)] == a, ErrorCode::InvalidArgument, "path conflicts with tree parent");
            } else {
                require(fg_->has_edge(a, b), ErrorCode::InvalidArgument, "path uses an infeasible edge");
                parent_[idx(b)] = a;
                in_tree_[idx(b)] = 1;
                auto& ch = children_[idx(a)];
                ch.insert(std::lower_bound(ch.begin(), ch.end(), b), b);
            }
            edge_weight_[idx(b)] += h;
            edge_users_[idx(b)] += 1;
        }
        user_path_[idx(u)] = path;
        ++users_;
        for (std::size_t k = 0; k + 1 < path.size(); ++k) refresh(path[k]);
    }

    void remove_user(int u) {
        const auto path = user_path_[idx(u)];
        require(!path.empty(), ErrorCode::InvalidArgument, "user not routed");
        const int h = static_cast<int>(path.size()) - 1;
        for (std::size_t k = path.size() - 1; k >= 1; --k) {
            const int a = path[k - 1], b = path[k];
            edge_weight_[idx(b)] -= h;
            if (--edge_users_[idx(b)] == 0) {
                auto& ch = children_[idx(a)];
                ch.erase(std::lower_bound(ch.begin(), ch.end(), b));
                parent_[idx(b)] = -1;
                in_tree_[idx(b)] = 0;
            }
        }
        user_path_[idx(u)].clear();
        --users_;
        for (std::size_t k = 0; k + 1 < path.size(); ++k) refresh(path[k]);
    }

    // Min over transmitting nodes of B_i / sum(h_u / gamma); zero when empty.
    double throughput() const {
        if (users_ == 0) return 0.0;
        double t = kInf;
        for (std::size_t i = 0; i < n_; ++i)
            if (!children_[i].empty()) t = std::min(t, rate_[i]);
        return t;
    }

    double node_rate(int i) const { return rate_[idx(i)]; }

    std::map<int, std::vector<int>> paths() const {
        std::map<int, std::vector<int>> out;
        for (std::size_t u = 0; u < n_; ++u)
            if (!user_path_[u].empty()) out[static_cast<int>(u)] = user_path_[u];
        return out;
    }

    RoutingGraph graph() const {
        if (fg_->root() < 0) return RoutingGraph{-1, {}, {}, {}};
        return RoutingGraph::from_node_paths(fg_->root(), paths());
    }

private:
    static std::size_t idx(int v) { return static_cast<std::size_t>(v); }

    void refresh(int i) {
        const auto& ch = children_[idx(i)];
        if (ch.empty()) {
            rate_[idx(i)] = kInf;
            tau_[idx(i)] = 0.0;
            return;
        }
        double tau = 0.0;
        for (int c : ch) tau = std::max(tau, fg_->link(i, c).required_sigma);
        const auto& node = fg_->node(i);
        const double rho = node.p_max_psd() - tau;
        double load = 0.0;
        for (int c : ch) {
            const double gamma = fg_->spectral_efficiency(i, c, rho);
            if (!(gamma > 0.0)) {
                load = kInf;
                break;
            }
            load += static_cast<double>(edge_weight_[idx(c)]) / gamma;
        }
        tau_[idx(i)] = tau;
        rate_[idx(i)] = node.bandwidth_hz / load;
    }

    const FeasibleGraph* fg_;
    std::size_t n_;
    std::vector<int> parent_;
    std::vector<char> in_tree_;
    std::vector<std::vector<int>> children_;
    std::vector<long long> edge_weight_;  // sum of hop counts of users through edge parent->v
    std::vector<int> edge_users_;
    std::vector<double> rate_;
    std::vector<double> tau_;
    std::vector<std::vector<int>> user_path_;
    int users_ = 0;
};

struct RoutingSolution {
    std::string method;
    RoutingGraph graph;
    Allocation allocation;
    std::vector<int> unserved;
    double min_throughput_bps = 0.0;  // zero whenever a user is unserved
    std::vector<double> trace;
};

inline RoutingSolution finish_solution(const FeasibleGraph& fg, const TreeState& state, std::string method,
                                       std::vector<double> trace = {}) {
    RoutingSolution s;
    s.method = std::move(method);
    s.graph = state.graph();
    s.unserved = fg.unserved_users();
    s.trace = std::move(trace);
    if (s.graph.edges.empty()) {
        const auto n = static_cast<std::size_t>(fg.size());
        s.allocation.tx_psd.resize(n);
        s.allocation.jam_psd.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) s.allocation.tx_psd[i] = fg.network().nodes[i].p_max_psd();
    } else {
        s.allocation = allocate(s.graph, fg);
    }
    s.min_throughput_bps = s.unserved.empty() ? s.allocation.min_throughput_bps : 0.0;
    return s;
}

// Dijkstra/A* from source to target over G_all. `cost(v, w)` is queried once
// per relaxed edge; `blocked[v]` bars v as an intermediate hop.
template <class Cost, class Heuristic>
std::optional<std::vector<int>> shortest_path(const FeasibleGraph& fg, int source, int target, Cost&& cost,
                                              Heuristic&& heuristic, const std::vector<char>* blocked = nullptr) {
    const auto n = static_cast<std::size_t>(fg.size());
    std::vector<double> dist(n, kInf);
    std::vector<int> prev(n, -1);
    std::vector<char> done(n, 0);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    dist[static_cast<std::size_t>(source)] = 0.0;
    open.push({heuristic(source), source});
    while (!open.empty()) {
        const int v = open.top().second;
        open.pop();
        if (done[static_cast<std::size_t>(v)]) continue;
        done[static_cast<std::size_t>(v)] = 1;
        if (v == target) break;
        if (v != source && blocked && (*blocked)[static_cast<std::size_t>(v)]) continue;
        for (int w : fg.out(v)) {
            if (done[static_cast<std::size_t>(w)]) continue;
            if (w != target && blocked && (*blocked)[static_cast<std::size_t>(w)]) continue;
            const double nd = dist[static_cast<std::size_t>(v)] + cost(v, w);
            if (nd < dist[static_cast<std::size_t>(w)]) {
                dist[static_cast<std::size_t>(w)] = nd;
                prev[static_cast<std::size_t>(w)] = v;
                open.push({nd + heuristic(w), w});
            }
        }
    }
    if (!done[static_cast<std::size_t>(target)]) return std::nullopt;
    std::vector<int> path;
    for (int v = target; v != -1; v = prev[static_cast<std::size_t>(v)]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
}

inline auto zero_heuristic() {
    return [](int) { return 0.0; };
}

struct CandidatePath {
    int user = 0;
    std::vector<int> nodes;

    std::vector<Edge> edges() const {
        std::vector<Edge> e;
        for (std::size_t k = 0; k + 1 < nodes.size(); ++k) e.push_back({nodes[k], nodes[k + 1]});
        return e;
    }
    bool operator==(const CandidatePath&) const = default;
};

// One root-to-user shortest path under fresh Uniform(0,1) edge weights.
inline std::optional<std::vector<int>> random_shortest_path(const FeasibleGraph& fg, int user, Rng& rng,
                                                            const std::vector<char>* blocked = nullptr) {
    std::uniform_real_distribution<double> weight(0.0, 1.0);
    return shortest_path(
        fg, fg.root(), user, [&](int, int) { return weight(rng); }, zero_heuristic(), blocked);
}

inline constexpr int kCandidateAttemptsPerPath = 8;

inline std::vector<CandidatePath> sample_candidate_paths(const FeasibleGraph& fg, int user, int k,
                                                         std::uint64_t seed) {
    require(k >= 1, ErrorCode::InvalidArgument, "K must be at least 1");
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(user), 0x6d63);
    std::vector<CandidatePath> out;
    // Duplicates are redrawn; graphs with fewer than k distinct routes stop early.
    const int attempts = kCandidateAttemptsPerPath * k;
    for (int draw = 0; draw < attempts && static_cast<int>(out.size()) < k; ++draw) {
        auto p = random_shortest_path(fg, user, rng);
        require(p.has_value(), ErrorCode::Unreachable,
                "user " + std::to_string(fg.node(user).id) + " unreachable from root");
        CandidatePath c{user, std::move(*p)};
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
    }
    return out;
}

struct McrrOptions {
    int candidates = 12;
    double epsilon = 1e-6;
    int max_rounds = 20;
    std::uint64_t seed = 1;
};

inline RoutingSolution mcrr(const FeasibleGraph& fg, const McrrOptions& opt = {}) {
    require(opt.max_rounds >= 0, ErrorCode::InvalidArgument, "max_rounds must be non-negative");
    const auto& users = fg.served_users();
    std::map<int, std::vector<CandidatePath>> candidates;
    for (int u : users) candidates[u] = sample_candidate_paths(fg, u, opt.candidates, opt.seed);

    TreeState state(fg);
    // A routing is scored on the nodes of u's own path: every other node keeps
    // its rate or gains, so raising this score never lowers the system minimum.
    auto score_with = [&](int u, const std::vector<int>& path) {
        state.add_user(u, path);
        double t = kInf;
        for (std::size_t k = 0; k + 1 < path.size(); ++k) t = std::min(t, state.node_rate(path[k]));
        state.remove_user(u);
        return t;
    };
    auto best_for = [&](int u, std::vector<int> incumbent) {
        double incumbent_t = incumbent.empty() ? -1.0 : score_with(u, incumbent);
        const double start_t = incumbent_t;
        for (const auto& c : candidates[u]) {
            auto path = state.splice(c.nodes);
            if (path == incumbent) continue;
            const double t = score_with(u, path);
            if (t > incumbent_t) {
                incumbent_t = t;
                incumbent = std::move(path);
            }
        }
        const double gain = start_t > 0.0 ? incumbent_t / start_t - 1.0 : 0.0;
        return std::make_pair(std::move(incumbent), gain);
    };

    for (int u : users) state.add_user(u, best_for(u, {}).first);
    std::vector<double> trace{state.throughput()};
    for (int round = 0; round < opt.max_rounds && !users.empty(); ++round) {
        double best_gain = 0.0;
        for (int u : users) {
            auto keep = state.user_path(u);
            state.remove_user(u);
            auto [path, gain] = best_for(u, std::move(keep));
            state.add_user(u, path);
            best_gain = std::max(best_gain, gain);
        }
        trace.push_back(state.throughput());
        if (!(best_gain > opt.epsilon)) break;
    }
    return finish_solution(fg, state, "mcrr", std::move(trace));
}

} // namespace sagsin
