// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "sagsin/error.hpp"
#include "sagsin/feasible.hpp"
#include "sagsin/rng.hpp"
#include "sagsin/routing.hpp"

namespace sagsin {

namespace detail {

// Spectral efficiency of a link if it were its transmitter's farthest one.
inline double standalone_gamma(const FeasibleGraph& fg, int i, int j) {
    return fg.spectral_efficiency(i, j, fg.node(i).p_max_psd() - fg.link(i, j).required_sigma);
}

// Extends a per-user shortest path into the tree under the first-parent
// rule: nodes already in the tree keep their parent.
inline std::vector<int> commit_first_parent(const TreeState& state, const std::vector<int>& path) {
    std::map<int, int> parent;
    for (std::size_t k = 1; k < path.size(); ++k) {
        const int v = path[k];
        if (!state.contains(v) && !parent.count(v)) parent[v] = path[k - 1];
    }
    std::vector<int> out;
    int v = path.back();
    while (true) {
        out.push_back(v);
        if (state.contains(v)) break;
        v = parent.at(v);
    }
    std::reverse(out.begin(), out.end());
    auto head = state.path_to(out.front());
    head.insert(head.end(), out.begin() + 1, out.end());
    return head;
}

} // namespace detail

enum class BruteForceMode { Auto, Exact, Sampled };

struct BruteForceOptions {
    BruteForceMode mode = BruteForceMode::Auto;
    int trials = 5000;
    std::uint64_t seed = 1;
    std::size_t max_search_nodes = 10'000'000;
};

namespace detail {

class ExactSearch {
public:
    ExactSearch(const FeasibleGraph& fg, std::size_t limit) : fg_(fg), state_(fg), limit_(limit) {}

    void run() {
        users_ = fg_.served_users();
        descend(0);
    }

    bool found() const { return !best_paths_.empty() || users_.empty(); }
    const std::map<int, std::vector<int>>& best() const { return best_paths_; }

private:
    void tick() {
        if (++visited_ > limit_) {
            fail(ErrorCode::CombinatorialBlowup,
                 "exact enumeration exceeds " + std::to_string(limit_) + " search nodes; use sampled mode");
        }
    }

    void descend(std::size_t k) {
        tick();
        if (k == users_.size()) {
            const double t = state_.throughput();
            if (t > best_t_) {
                best_t_ = t;
                best_paths_ = state_.paths();
            }
            return;
        }
        const int u = users_[k];
        std::vector<int> suffix{u};
        std::vector<char> on_suffix(static_cast<std::size_t>(fg_.size()), 0);
        on_suffix[static_cast<std::size_t>(u)] = 1;
        branch(k, suffix, on_suffix);
    }

    // Grow the new branch backwards from the user until it meets the tree.
    void branch(std::size_t k, std::vector<int>& suffix, std::vector<char>& on_suffix) {
        tick();
        const int head = suffix.back();
        for (int p : fg_.in(head)) {
            if (on_suffix[static_cast<std::size_t>(p)]) continue;
            if (state_.contains(p)) {
                auto path = state_.path_to(p);
                path.insert(path.end(), suffix.rbegin(), suffix.rend());
                const int u = users_[k];
                state_.add_user(u, path);
                // Throughput only falls as users are added, so a partial tree
                // no better than the incumbent cannot lead anywhere better.
                if (state_.throughput() > best_t_) descend(k + 1);
                state_.remove_user(u);
            } else {
                suffix.push_back(p);
                on_suffix[static_cast<std::size_t>(p)] = 1;
                branch(k, suffix, on_suffix);
                on_suffix[static_cast<std::size_t>(p)] = 0;
                suffix.pop_back();
            }
        }
    }

    const FeasibleGraph& fg_;
    TreeState state_;
    std::size_t limit_;
    std::size_t visited_ = 0;
    std::vector<int> users_;
    double best_t_ = -1.0;
    std::map<int, std::vector<int>> best_paths_;
};

inline TreeState build_from_paths(const FeasibleGraph& fg, const std::map<int, std::vector<int>>& paths) {
    TreeState s(fg);
    for (const auto& [u, p] : paths) s.add_user(u, p);
    return s;
}

} // namespace detail

inline RoutingSolution bruteforce_exact(const FeasibleGraph& fg, std::size_t max_search_nodes = 10'000'000) {
    detail::ExactSearch search(fg, max_search_nodes);
    search.run();
    auto state = detail::build_from_paths(fg, search.best());
    return finish_solution(fg, state, "bruteforce");
}

inline constexpr double kSampledJitter = 0.5;  // log-normal spread of sampled edge costs

// Best of `trials` random feasible trees. Each tree joins users in id order
// under the first-parent rule along shortest paths whose edge costs are
// 1/gamma scaled by an independent log-normal factor.
inline RoutingSolution bruteforce_sampled(const FeasibleGraph& fg, int trials, std::uint64_t seed) {
    require(trials >= 1, ErrorCode::InvalidArgument, "trials must be positive");
    const auto n = static_cast<std::size_t>(fg.size());
    std::vector<double> inv_gamma(n * n, 0.0);
    for (int i = 0; i < fg.size(); ++i)
        for (int j : fg.out(i))
            inv_gamma[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] = 1.0 / detail::standalone_gamma(fg, i, j);
    double best_t = -1.0;
    std::map<int, std::vector<int>> best;
    for (int t = 0; t < trials; ++t) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(t), 0x6266);
        std::lognormal_distribution<double> jitter(0.0, kSampledJitter);
        TreeState state(fg);
        for (int u : fg.served_users()) {
            auto cost = [&](int i, int j) {
                return inv_gamma[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] * jitter(rng);
            };
            auto p = shortest_path(fg, fg.root(), u, cost, zero_heuristic());
            state.add_user(u, detail::commit_first_parent(state, *p));
        }
        const double value = state.throughput();
        if (value > best_t) {
            best_t = value;
            best = state.paths();
        }
    }
    auto state = detail::build_from_paths(fg, best);
    return finish_solution(fg, state, "bruteforce");
}

inline RoutingSolution bruteforce_route(const FeasibleGraph& fg, const BruteForceOptions& opt = {}) {
    if (opt.mode == BruteForceMode::Sampled) return bruteforce_sampled(fg, opt.trials, opt.seed);
    try {
        return bruteforce_exact(fg, opt.max_search_nodes);
    } catch (const Error& e) {
        if (opt.mode == BruteForceMode::Exact || e.code() != ErrorCode::CombinatorialBlowup) throw;
    }
    return bruteforce_sampled(fg, opt.trials, opt.seed);
}

struct GeneticOptions {
    int generations = 5000;
    int population = 50;
    int elites = 6;
    double mutation_rate = 0.05;
    std::uint64_t seed = 1;
    std::optional<std::vector<char>> initial_genome;  // seeds every individual when set
};

namespace detail {

inline std::uint64_t genome_hash(const std::vector<char>& g) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : g) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace detail

// Outer search over relay subsets; inner random feasible tree on the subset.
inline RoutingSolution genetic_route(const FeasibleGraph& fg, const GeneticOptions& opt = {}) {
    require(opt.population > opt.elites && opt.elites >= 1, ErrorCode::InvalidArgument,
            "population must exceed elites >= 1");
    require(opt.mutation_rate >= 0.0 && opt.mutation_rate <= 1.0, ErrorCode::InvalidArgument,
            "mutation rate must lie in [0, 1]");
    std::vector<int> relays;
    for (int i = 0; i < fg.size(); ++i)
        if (i != fg.root() && fg.node(i).can_relay()) relays.push_back(i);
    using Genome = std::vector<char>;

    struct Scored {
        Genome genome;
        double fitness = 0.0;
        std::map<int, std::vector<int>> paths;
    };
    std::map<Genome, Scored> memo;
    auto evaluate = [&](const Genome& g) -> const Scored& {
        if (auto it = memo.find(g); it != memo.end()) return it->second;
        std::vector<char> blocked(static_cast<std::size_t>(fg.size()), 0);
        for (std::size_t k = 0; k < relays.size(); ++k) blocked[static_cast<std::size_t>(relays[k])] = !g[k];
        Rng rng = make_stream(opt.seed, detail::genome_hash(g), 0x6761);
        TreeState state(fg);
        bool ok = true;
        for (int u : fg.served_users()) {
            auto p = random_shortest_path(fg, u, rng, &blocked);
            if (!p) {
                ok = false;
                break;
            }
            state.add_user(u, detail::commit_first_parent(state, *p));
        }
        Scored s{g, ok ? state.throughput() : 0.0, ok ? state.paths() : std::map<int, std::vector<int>>{}};
        return memo.emplace(g, std::move(s)).first->second;
    };

    Rng rng = make_stream(opt.seed, 0, 0x6761);
    std::bernoulli_distribution coin(0.5);
    std::bernoulli_distribution mutate(opt.mutation_rate);
    std::uniform_int_distribution<int> pick(0, opt.population - 1);
    std::vector<Genome> pop;
    for (int k = 0; k < opt.population; ++k) {
        if (opt.initial_genome) {
            require(opt.initial_genome->size() == relays.size(), ErrorCode::InvalidArgument,
                    "initial genome length must equal the relay count");
            pop.push_back(*opt.initial_genome);
        } else {
            Genome g(relays.size());
            for (auto& bit : g) bit = coin(rng);
            if (k == 0) std::fill(g.begin(), g.end(), 1);
            pop.push_back(std::move(g));
        }
    }
    auto ranked = [&](const std::vector<Genome>& p) {
        std::vector<std::pair<double, int>> order;
        for (int k = 0; k < static_cast<int>(p.size()); ++k) order.push_back({-evaluate(p[static_cast<std::size_t>(k)]).fitness, k});
        std::sort(order.begin(), order.end());
        return order;
    };

    std::vector<double> trace;
    auto order = ranked(pop);
    trace.push_back(-order.front().first);
    for (int gen = 0; gen < opt.generations; ++gen) {
        std::vector<Genome> next;
        for (int e = 0; e < opt.elites; ++e) next.push_back(pop[static_cast<std::size_t>(order[static_cast<std::size_t>(e)].second)]);
        auto tournament = [&]() -> const Genome& {
            const int a = pick(rng), b = pick(rng);
            const auto& ga = pop[static_cast<std::size_t>(a)];
            const auto& gb = pop[static_cast<std::size_t>(b)];
            return evaluate(ga).fitness >= evaluate(gb).fitness ? ga : gb;
        };
        while (static_cast<int>(next.size()) < opt.population) {
            const Genome& x = tournament();
            const Genome& y = tournament();
            Genome child(relays.size());
            for (std::size_t k = 0; k < child.size(); ++k) {
                child[k] = coin(rng) ? x[k] : y[k];
                if (mutate(rng)) child[k] = !child[k];
            }
            next.push_back(std::move(child));
        }
        pop = std::move(next);
        order = ranked(pop);
        trace.push_back(-order.front().first);
    }
    const auto& best = evaluate(pop[static_cast<std::size_t>(order.front().second)]);
    auto state = detail::build_from_paths(fg, best.paths);
    return finish_solution(fg, state, "genetic", std::move(trace));
}

enum class AstarMetric { Distance, Hop, InverseSe };

inline std::string to_string(AstarMetric m) {
    switch (m) {
    case AstarMetric::Distance: return "astar_distance";
    case AstarMetric::Hop: return "astar_hop";
    case AstarMetric::InverseSe: return "astar_inverse_se";
    }
    return "astar";
}

namespace detail {

inline std::optional<std::vector<int>> metric_path(const FeasibleGraph& fg, int source, int target,
                                                   AstarMetric metric, const std::vector<char>* blocked) {
    switch (metric) {
    case AstarMetric::Distance: {
        const auto& goal = fg.node(target).position;
        return shortest_path(
            fg, source, target, [&](int v, int w) { return fg.link(v, w).distance_km; },
            [&](int v) { return v == target ? 0.0 : chord_km(fg.node(v).position, goal); }, blocked);
    }
    case AstarMetric::Hop:
        return shortest_path(
            fg, source, target, [](int, int) { return 1.0; }, zero_heuristic(), blocked);
    case AstarMetric::InverseSe:
        return shortest_path(
            fg, source, target, [&](int v, int w) { return 1.0 / standalone_gamma(fg, v, w); }, zero_heuristic(),
            blocked);
    }
    return std::nullopt;
}

} // namespace detail

inline RoutingSolution astar_route(const FeasibleGraph& fg, AstarMetric metric) {
    TreeState state(fg);
    for (int u : fg.served_users()) {
        auto p = detail::metric_path(fg, fg.root(), u, metric, nullptr);
        require(p.has_value(), ErrorCode::Unreachable, "user unreachable");
        state.add_user(u, detail::commit_first_parent(state, *p));
    }
    return finish_solution(fg, state, to_string(metric));
}

// Users in id order; each takes the branch (from any tree node, under any of
// the three link metrics) that leaves the highest system min-throughput.
inline RoutingSolution greedy_route(const FeasibleGraph& fg) {
    TreeState state(fg);
    const auto n = static_cast<std::size_t>(fg.size());
    for (int u : fg.served_users()) {
        std::vector<char> blocked(n, 0);
        std::vector<int> anchors;
        for (int v = 0; v < fg.size(); ++v) {
            if (state.contains(v)) {
                blocked[static_cast<std::size_t>(v)] = 1;
                if (fg.node(v).can_relay()) anchors.push_back(v);
            }
        }
        std::vector<std::vector<int>> options;
        for (int a : anchors) {
            for (auto metric : {AstarMetric::Hop, AstarMetric::Distance, AstarMetric::InverseSe}) {
                auto p = detail::metric_path(fg, a, u, metric, &blocked);
                if (!p) continue;
                auto full = state.path_to(a);
                full.insert(full.end(), p->begin() + 1, p->end());
                if (std::find(options.begin(), options.end(), full) == options.end()) options.push_back(std::move(full));
            }
        }
        require(!options.empty(), ErrorCode::Unreachable, "user unreachable");
        double best_t = -1.0;
        std::size_t best = 0;
        for (std::size_t k = 0; k < options.size(); ++k) {
            state.add_user(u, options[k]);
            const double t = state.throughput();
            state.remove_user(u);
            if (t > best_t) {
                best_t = t;
                best = k;
            }
        }
        state.add_user(u, options[best]);
    }
    return finish_solution(fg, state, "greedy");
}

} // namespace sagsin
