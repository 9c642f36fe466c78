// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sagsin/error.hpp"
#include "sagsin/feasible.hpp"
#include "sagsin/graph.hpp"

namespace sagsin {

using FlowKey = std::pair<Edge, int>;  // (edge, user)

struct Allocation {
    std::map<FlowKey, double> bandwidth_hz;
    std::vector<double> tx_psd;   // W/Hz per node index
    std::vector<double> jam_psd;  // W/Hz per node index
    std::map<Edge, double> gamma; // bits/s/Hz at tx_psd
    double min_throughput_bps = 0.0;
};

struct PowerSplit {
    std::vector<double> rho;
    std::vector<double> sigma;
};

// Largest single-link jamming requirement among i's outgoing tree edges.
inline std::vector<double> node_jamming_requirement(const RoutingGraph& g, const FeasibleGraph& fg) {
    std::vector<double> tau(static_cast<std::size_t>(fg.size()), 0.0);
    for (const auto& e : g.edges) {
        auto& t = tau[static_cast<std::size_t>(e.from)];
        t = std::max(t, fg.link(e.from, e.to).required_sigma);
    }
    return tau;
}

inline PowerSplit optimal_power_split(const RoutingGraph& g, const FeasibleGraph& fg) {
    const auto n = static_cast<std::size_t>(fg.size());
    PowerSplit s{std::vector<double>(n), std::vector<double>(n, 0.0)};
    const auto tau = node_jamming_requirement(g, fg);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& node = fg.network().nodes[i];
        const double pmax = node.p_max_psd();
        if (tau[i] > node.jamming_budget_psd() * (1.0 + 1e-9)) {
            fail(ErrorCode::InfeasibleLink, "node " + std::to_string(node.id) + " needs jamming " +
                                                std::to_string(tau[i]) + " W/Hz beyond its budget");
        }
        s.sigma[i] = tau[i];
        s.rho[i] = pmax - tau[i];
    }
    return s;
}

inline std::map<Edge, double> link_gammas(const RoutingGraph& g, const FeasibleGraph& fg, std::span<const double> rho) {
    std::map<Edge, double> out;
    for (const auto& e : g.edges) out[e] = fg.spectral_efficiency(e.from, e.to, rho[static_cast<std::size_t>(e.from)]);
    return out;
}

inline std::vector<double> node_bandwidths(const Network& net) {
    std::vector<double> b;
    b.reserve(net.size());
    for (const auto& n : net.nodes) b.push_back(n.bandwidth_hz);
    return b;
}

// Per transmitting node: sum over its flows of h_u / gamma.
inline std::map<int, double> node_loads(const RoutingGraph& g, const std::map<Edge, double>& gammas) {
    std::map<int, double> load;
    for (const auto& [u, path] : g.user_paths) {
        const double h = static_cast<double>(path.size());
        for (const auto& e : path) {
            const double gamma = gammas.at(e);
            require(gamma > 0.0, ErrorCode::ZeroRate,
                    "edge " + std::to_string(e.from) + "->" + std::to_string(e.to) + " has zero rate");
            load[e.from] += h / gamma;
        }
    }
    return load;
}

inline std::map<FlowKey, double> optimal_bandwidth(const RoutingGraph& g, const std::map<Edge, double>& gammas,
                                                   std::span<const double> bandwidth) {
    const auto load = node_loads(g, gammas);
    std::map<FlowKey, double> beta;
    for (const auto& [u, path] : g.user_paths) {
        const double h = static_cast<double>(path.size());
        for (const auto& e : path) {
            beta[{e, u}] = bandwidth[static_cast<std::size_t>(e.from)] * (h / gammas.at(e)) / load.at(e.from);
        }
    }
    return beta;
}

inline double min_throughput(const RoutingGraph& g, const std::map<Edge, double>& gammas,
                             std::span<const double> bandwidth) {
    const auto load = node_loads(g, gammas);
    if (load.empty()) return 0.0;
    double t = kInf;
    for (const auto& [i, s] : load) t = std::min(t, bandwidth[static_cast<std::size_t>(i)] / s);
    return t;
}

inline Allocation allocate(const RoutingGraph& g, const FeasibleGraph& fg) {
    const auto split = optimal_power_split(g, fg);
    Allocation a;
    a.tx_psd = split.rho;
    a.jam_psd = split.sigma;
    a.gamma = link_gammas(g, fg, a.tx_psd);
    const auto bw = node_bandwidths(fg.network());
    a.bandwidth_hz = optimal_bandwidth(g, a.gamma, bw);
    a.min_throughput_bps = min_throughput(g, a.gamma, bw);
    return a;
}

struct KktViolation {
    std::string kind;
    int node = -1;
    double magnitude = 0.0;
};

inline std::vector<KktViolation> kkt_verify(const Allocation& a, const RoutingGraph& g, const FeasibleGraph& fg,
                                            double tol) {
    std::vector<KktViolation> out;
    const auto tau = node_jamming_requirement(g, fg);
    std::map<int, double> used;
    std::map<int, std::pair<double, double>> rate_span;  // min, max of beta*gamma/h per node
    for (const auto& [u, path] : g.user_paths) {
        const double h = static_cast<double>(path.size());
        for (const auto& e : path) {
            const double beta = a.bandwidth_hz.count({e, u}) ? a.bandwidth_hz.at({e, u}) : 0.0;
            if (beta < 0.0) out.push_back({"negative_bandwidth", e.from, -beta});
            used[e.from] += beta;
            const double gamma = fg.spectral_efficiency(e.from, e.to, a.tx_psd[static_cast<std::size_t>(e.from)]);
            const double r = beta * gamma / h;
            auto [it, fresh] = rate_span.try_emplace(e.from, r, r);
            if (!fresh) {
                it->second.first = std::min(it->second.first, r);
                it->second.second = std::max(it->second.second, r);
            }
        }
    }
    for (const auto& [i, total] : used) {
        const double b = fg.node(i).bandwidth_hz;
        const double gap = std::abs(total - b) / b;
        if (gap > tol) out.push_back({"bandwidth_saturation", i, gap});
    }
    for (const auto& [i, span] : rate_span) {
        const double gap = span.second > 0.0 ? (span.second - span.first) / span.second : 0.0;
        if (gap > tol) out.push_back({"throughput_equalization", i, gap});
    }
    for (int i = 0; i < fg.size(); ++i) {
        const auto& node = fg.node(i);
        const auto k = static_cast<std::size_t>(i);
        const double pmax = node.p_max_psd();
        const double total_gap = std::abs(a.tx_psd[k] + a.jam_psd[k] - pmax) / pmax;
        if (total_gap > tol) out.push_back({"power_budget", i, total_gap});
        if (a.tx_psd[k] < node.p_min_psd() * (1.0 - tol)) {
            out.push_back({"power_floor", i, (node.p_min_psd() - a.tx_psd[k]) / pmax});
        }
        const double jam_gap = std::abs(a.jam_psd[k] - tau[k]) / pmax;
        if (jam_gap > tol) out.push_back({"jamming_level", i, jam_gap});
    }
    const double target = fg.policy().tau;
    for (const auto& e : g.edges) {
        const double p = fg.spsc(e.from, e.to, a.jam_psd[static_cast<std::size_t>(e.from)]);
        if (p < target - tol) out.push_back({"spsc", e.from, target - p});
    }
    return out;
}

} // namespace sagsin
