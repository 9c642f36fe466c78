// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "sagsin/channel.hpp"
#include "sagsin/error.hpp"
#include "sagsin/secrecy.hpp"

namespace sagsin {

struct Network {
    std::vector<NodeSpec> nodes;
    int root = 0;

    std::size_t size() const { return nodes.size(); }

    std::vector<int> users() const {
        std::vector<int> out;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i].role == NodeRole::User) out.push_back(static_cast<int>(i));
        return out;
    }

    // root == -1 marks a network without any relay; every user is unserved.
    void validate() const {
        require(root >= -1 && root < static_cast<int>(nodes.size()), ErrorCode::InvalidArgument,
                "root index out of range");
        require(root < 0 || nodes[static_cast<std::size_t>(root)].can_relay(), ErrorCode::InvalidArgument,
                "root must be relay-capable");
        for (const auto& n : nodes) n.validate();
    }
};

struct SecurityPolicy {
    EveField field;
    double tau = 0.9999;
    DistanceSearch search;
};

struct LinkInfo {
    double distance_km = 0.0;
    double gain = 0.0;
    double noise = 0.0;
    double lambda = 0.0;
    double required_sigma = 0.0;  // jamming needed for this link alone to meet tau
    double max_distance_km = 0.0; // transmitter's D_max toward this receiver's budget
    bool feasible = false;
};

// All secure candidate links (G_all) with per-link quantities precomputed.
class FeasibleGraph {
public:
    FeasibleGraph(Network net, SecurityPolicy policy) : net_(std::move(net)), policy_(std::move(policy)) {
        net_.validate();
        policy_.field.validate();
        require(policy_.tau > 0.0 && policy_.tau < 1.0, ErrorCode::InvalidArgument, "tau must lie in (0, 1)");
        const std::size_t n = net_.size();
        links_.assign(n * n, {});
        out_.assign(n, {});
        in_.assign(n, {});
        for (std::size_t i = 0; i < n; ++i) {
            const auto& tx = net_.nodes[i];
            if (!tx.can_relay() || net_.root < 0) continue;
            std::map<std::pair<double, double>, double> dmax_cache;
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j || static_cast<int>(j) == net_.root) continue;
                const auto& rx = net_.nodes[j];
                LinkInfo& l = links_[i * n + j];
                l.distance_km = link_distance(tx, rx);
                l.gain = link_gain(tx, rx);
                l.noise = noise_psd(rx, tx.layer);
                l.lambda = policy_.field.effective_density(tx, l.distance_km);
                SpscQuery q{l.distance_km, tx.alpha, l.lambda, 0.0, l.gain, l.noise};
                l.required_sigma = min_jamming(q, policy_.tau, policy_.search.model, policy_.field.calibration);
                const auto key = std::make_pair(l.gain, l.noise);
                auto it = dmax_cache.find(key);
                if (it == dmax_cache.end()) {
                    it = dmax_cache
                             .emplace(key, max_link_distance(tx, l.gain, l.noise, policy_.field, policy_.tau,
                                                             policy_.search))
                             .first;
                }
                l.max_distance_km = it->second;
                l.feasible = l.distance_km <= l.max_distance_km &&
                             l.required_sigma <= tx.jamming_budget_psd() * (1.0 + 1e-9);
                if (l.feasible) {
                    out_[i].push_back(static_cast<int>(j));
                    in_[j].push_back(static_cast<int>(i));
                    ++edge_count_;
                }
            }
        }
        std::vector<char> reached(n, 0);
        std::vector<int> stack;
        if (net_.root >= 0) {
            stack.push_back(net_.root);
            reached[static_cast<std::size_t>(net_.root)] = 1;
        }
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w : out_[static_cast<std::size_t>(v)]) {
                if (!reached[static_cast<std::size_t>(w)]) {
                    reached[static_cast<std::size_t>(w)] = 1;
                    stack.push_back(w);
                }
            }
        }
        for (int u : net_.users()) (reached[static_cast<std::size_t>(u)] ? served_ : unserved_).push_back(u);
    }

    const Network& network() const { return net_; }
    const SecurityPolicy& policy() const { return policy_; }
    const NodeSpec& node(int i) const { return net_.nodes[static_cast<std::size_t>(i)]; }
    int size() const { return static_cast<int>(net_.size()); }
    int root() const { return net_.root; }
    std::size_t edge_count() const { return edge_count_; }

    const LinkInfo& link(int i, int j) const {
        return links_[static_cast<std::size_t>(i) * net_.size() + static_cast<std::size_t>(j)];
    }
    bool has_edge(int i, int j) const { return link(i, j).feasible; }
    const std::vector<int>& out(int i) const { return out_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& in(int j) const { return in_[static_cast<std::size_t>(j)]; }
    const std::vector<int>& served_users() const { return served_; }
    const std::vector<int>& unserved_users() const { return unserved_; }

    LinkBudget budget(int i, int j) const {
        const auto& l = link(i, j);
        return {l.distance_km, l.gain, l.noise, node(i).alpha};
    }

    double spectral_efficiency(int i, int j, double rho) const { return sagsin::spectral_efficiency(rho, budget(i, j)); }

    double spsc(int i, int j, double sigma) const {
        const auto& l = link(i, j);
        SpscQuery q{l.distance_km, node(i).alpha, l.lambda, sigma, l.gain, l.noise};
        return spsc_model(q, policy_.search.model, policy_.field.calibration);
    }

private:
    Network net_;
    SecurityPolicy policy_;
    std::vector<LinkInfo> links_;
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<int>> in_;
    std::vector<int> served_;
    std::vector<int> unserved_;
    std::size_t edge_count_ = 0;
};

inline FeasibleGraph build_feasible_graph(const Network& net, const SecurityPolicy& policy) {
    return FeasibleGraph(net, policy);
}

} // namespace sagsin
