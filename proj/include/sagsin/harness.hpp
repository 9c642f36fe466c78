// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sagsin/baselines.hpp"
#include "sagsin/error.hpp"
#include "sagsin/feasible.hpp"
#include "sagsin/json_io.hpp"
#include "sagsin/parallel.hpp"
#include "sagsin/routing.hpp"
#include "sagsin/secrecy.hpp"
#include "sagsin/testbed.hpp"

namespace sagsin {

// ---- optimizer dispatch ----

struct MethodOptions {
    McrrOptions mcrr;
    BruteForceOptions bruteforce{BruteForceMode::Sampled, 5000, 1, 10'000'000};
    GeneticOptions genetic;
};

inline const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> m{"bruteforce", "mcrr",     "genetic",         "greedy",
                                            "astar_distance", "astar_hop", "astar_inverse_se"};
    return m;
}

inline RoutingSolution run_method(const std::string& method, const FeasibleGraph& fg, MethodOptions opt,
                                  std::uint64_t seed) {
    if (method == "mcrr") {
        opt.mcrr.seed = seed;
        return mcrr(fg, opt.mcrr);
    }
    if (method == "bruteforce") {
        opt.bruteforce.seed = seed;
        return bruteforce_route(fg, opt.bruteforce);
    }
    if (method == "genetic") {
        opt.genetic.seed = seed;
        return genetic_route(fg, opt.genetic);
    }
    if (method == "greedy") return greedy_route(fg);
    if (method == "astar_distance") return astar_route(fg, AstarMetric::Distance);
    if (method == "astar_hop") return astar_route(fg, AstarMetric::Hop);
    if (method == "astar_inverse_se") return astar_route(fg, AstarMetric::InverseSe);
    fail(ErrorCode::InvalidArgument, "unknown method '" + method + "'");
}

inline void from_json(const Json& j, MethodOptions& o) {
    if (j.contains("mcrr")) {
        const auto& m = j.at("mcrr");
        o.mcrr.candidates = m.value("candidates", o.mcrr.candidates);
        o.mcrr.epsilon = m.value("epsilon", o.mcrr.epsilon);
        o.mcrr.max_rounds = m.value("max_rounds", o.mcrr.max_rounds);
    }
    if (j.contains("bruteforce")) {
        const auto& b = j.at("bruteforce");
        const auto mode = b.value("mode", std::string("sampled"));
        o.bruteforce.mode = mode == "exact" ? BruteForceMode::Exact
                            : mode == "auto" ? BruteForceMode::Auto
                                             : BruteForceMode::Sampled;
        o.bruteforce.trials = b.value("trials", o.bruteforce.trials);
    }
    if (j.contains("genetic")) {
        const auto& g = j.at("genetic");
        o.genetic.generations = g.value("generations", o.genetic.generations);
        o.genetic.population = g.value("population", o.genetic.population);
        o.genetic.elites = g.value("elites", o.genetic.elites);
        o.genetic.mutation_rate = g.value("mutation_rate", o.genetic.mutation_rate);
    }
}

// ---- solution documents ----

inline Json psd_dbm_json(double w_per_hz) {
    return w_per_hz > 0.0 ? Json(watt_to_dbm(w_per_hz)) : Json(nullptr);
}

inline Json allocation_json(const Allocation& a, const RoutingGraph& g, const Network& net) {
    Json nodes = Json::array();
    for (int i : g.nodes) {
        const auto k = static_cast<std::size_t>(i);
        nodes.push_back({{"id", net.nodes[k].id}, {"rho_dbm", psd_dbm_json(a.tx_psd[k])}, {"sigma_dbm", psd_dbm_json(a.jam_psd[k])}});
    }
    Json bw = Json::array();
    for (const auto& [key, beta] : a.bandwidth_hz) {
        bw.push_back({{"from", net.nodes[static_cast<std::size_t>(key.first.from)].id},
                      {"to", net.nodes[static_cast<std::size_t>(key.first.to)].id},
                      {"user", net.nodes[static_cast<std::size_t>(key.second)].id},
                      {"bandwidth_hz", beta}});
    }
    return {{"nodes", nodes}, {"bandwidth", bw}, {"min_throughput_bps", a.min_throughput_bps}};
}

inline Json solution_json(const RoutingSolution& s, const Network& net) {
    auto id = [&](int i) { return net.nodes[static_cast<std::size_t>(i)].id; };
    Json edges = Json::array();
    for (const auto& e : s.graph.edges) edges.push_back({{"from", id(e.from)}, {"to", id(e.to)}});
    Json paths = Json::array();
    for (const auto& [u, path] : s.graph.user_paths) {
        Json ids = Json::array({id(path.front().from)});
        for (const auto& e : path) ids.push_back(id(e.to));
        paths.push_back({{"user", id(u)}, {"nodes", ids}});
    }
    Json unserved = Json::array();
    for (int u : s.unserved) unserved.push_back(id(u));
    return {{"version", 1},
            {"method", s.method},
            {"root", s.graph.root >= 0 ? Json(id(s.graph.root)) : Json(nullptr)},
            {"min_throughput_bps", s.min_throughput_bps},
            {"unserved", unserved},
            {"edges", edges},
            {"user_paths", paths},
            {"allocation", allocation_json(s.allocation, s.graph, net)},
            {"trace", s.trace}};
}

// Rebuilds the routing graph of a solution document against `net` (ids to indices).
inline RoutingGraph graph_from_solution_json(const Json& doc, const Network& net) {
    std::map<int, int> index;
    for (std::size_t i = 0; i < net.nodes.size(); ++i) index[net.nodes[i].id] = static_cast<int>(i);
    auto at = [&](int id) {
        auto it = index.find(id);
        require(it != index.end(), ErrorCode::ParseError, "solution references unknown node id " + std::to_string(id));
        return it->second;
    };
    RoutingGraph g;
    g.root = doc.at("root").is_null() ? -1 : at(doc.at("root").get<int>());
    if (g.root >= 0) g.nodes.insert(g.root);
    for (const auto& e : doc.at("edges")) {
        Edge edge{at(e.at("from").get<int>()), at(e.at("to").get<int>())};
        g.edges.insert(edge);
        g.nodes.insert(edge.from);
        g.nodes.insert(edge.to);
    }
    for (const auto& p : doc.at("user_paths")) {
        const auto ids = p.at("nodes").get<std::vector<int>>();
        auto& path = g.user_paths[at(p.at("user").get<int>())];
        for (std::size_t k = 0; k + 1 < ids.size(); ++k) path.push_back({at(ids[k]), at(ids[k + 1])});
    }
    return g;
}

struct SolutionCheck {
    std::vector<TreeViolation> tree;
    std::vector<Edge> infeasible_edges;  // longer than the transmitter's D_max
    bool ok() const { return tree.empty() && infeasible_edges.empty(); }
};

inline SolutionCheck check_solution(const RoutingGraph& g, const FeasibleGraph& fg) {
    SolutionCheck c;
    c.tree = validate_spanning_tree(g);
    for (const auto& e : g.edges) {
        const bool in_range = e.from >= 0 && e.to >= 0 && e.from < fg.size() && e.to < fg.size();
        if (!in_range || !fg.node(e.from).can_relay() || e.to == fg.root() ||
            fg.link(e.from, e.to).distance_km > fg.link(e.from, e.to).max_distance_km) {
            c.infeasible_edges.push_back(e);
        }
    }
    return c;
}

// Nodes as Points, tree edges as LineStrings; the longest user path (km)
// and the bottleneck node are flagged.
inline Json export_geojson(const RoutingSolution& s, const FeasibleGraph& fg) {
    const auto& net = fg.network();
    auto id = [&](int i) { return net.nodes[static_cast<std::size_t>(i)].id; };
    auto coords = [&](int i) {
        const auto& p = net.nodes[static_cast<std::size_t>(i)].position;
        return Json::array({p.longitude_deg, p.latitude_deg, p.altitude_km * 1000.0});
    };
    std::map<int, double> load;
    std::map<Edge, double> edge_bw;
    std::map<Edge, std::vector<int>> edge_users;
    for (const auto& [key, beta] : s.allocation.bandwidth_hz) {
        edge_bw[key.first] += beta;
        edge_users[key.first].push_back(id(key.second));
    }
    for (const auto& [u, path] : s.graph.user_paths)
        for (const auto& e : path) load[e.from] += static_cast<double>(path.size()) / s.allocation.gamma.at(e);
    int bottleneck = -1;
    double worst = kInf;
    std::map<int, double> rate;
    for (const auto& [i, l] : load) {
        rate[i] = fg.node(i).bandwidth_hz / l;
        if (rate[i] < worst) {
            worst = rate[i];
            bottleneck = i;
        }
    }
    int longest_user = -1;
    double longest_km = -1.0;
    for (const auto& [u, path] : s.graph.user_paths) {
        double km = 0.0;
        for (const auto& e : path) km += fg.link(e.from, e.to).distance_km;
        if (km > longest_km) {
            longest_km = km;
            longest_user = u;
        }
    }
    std::set<Edge> longest;
    if (longest_user >= 0)
        for (const auto& e : s.graph.user_paths.at(longest_user)) longest.insert(e);

    Json features = Json::array();
    for (int i : s.graph.nodes) {
        const auto k = static_cast<std::size_t>(i);
        const auto& n = net.nodes[k];
        Json props{{"id", n.id},
                   {"layer", n.layer},
                   {"role", n.role == NodeRole::User ? "user" : "relay"},
                   {"rho_dbm", s.allocation.tx_psd.empty() ? Json(nullptr) : psd_dbm_json(s.allocation.tx_psd[k])},
                   {"sigma_dbm", s.allocation.jam_psd.empty() ? Json(nullptr) : psd_dbm_json(s.allocation.jam_psd[k])},
                   {"root", i == s.graph.root},
                   {"bottleneck", i == bottleneck}};
        if (rate.count(i)) {
            props["node_rate_bps"] = rate[i];
            props["throughput_share"] = worst / rate[i];
        }
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "Point"}, {"coordinates", coords(i)}}},
                            {"properties", props}});
    }
    for (const auto& e : s.graph.edges) {
        Json props{{"from", id(e.from)},
                   {"to", id(e.to)},
                   {"bandwidth_hz", edge_bw.count(e) ? edge_bw[e] : 0.0},
                   {"gamma", s.allocation.gamma.count(e) ? s.allocation.gamma.at(e) : 0.0},
                   {"users", edge_users.count(e) ? Json(edge_users[e]) : Json::array()},
                   {"distance_km", fg.link(e.from, e.to).distance_km},
                   {"longest_path", longest.count(e) > 0}};
        features.push_back(
            {{"type", "Feature"},
             {"geometry", {{"type", "LineString"}, {"coordinates", Json::array({coords(e.from), coords(e.to)})}}},
             {"properties", props}});
    }
    return {{"type", "FeatureCollection"},
            {"properties", {{"method", s.method}, {"min_throughput_bps", s.min_throughput_bps}}},
            {"features", features}};
}

// ---- sweeps ----

enum class ExperimentKind {
    SpscVsDensity,
    SpscVsDistance,
    JammingVsDistance,
    ThroughputVsTau,
    ThroughputVsDensity,
    ThroughputVsPmin,
    TestbedDemo,
};

inline ExperimentKind parse_experiment(const std::string& s) {
    static const std::map<std::string, ExperimentKind> m{
        {"spsc_vs_density", ExperimentKind::SpscVsDensity},
        {"spsc_vs_distance", ExperimentKind::SpscVsDistance},
        {"jamming_vs_distance", ExperimentKind::JammingVsDistance},
        {"throughput_vs_tau", ExperimentKind::ThroughputVsTau},
        {"throughput_vs_density", ExperimentKind::ThroughputVsDensity},
        {"throughput_vs_pmin", ExperimentKind::ThroughputVsPmin},
        {"testbed_demo", ExperimentKind::TestbedDemo}};
    auto it = m.find(s);
    require(it != m.end(), ErrorCode::InvalidArgument, "unknown experiment kind '" + s + "'");
    return it->second;
}

inline bool is_spsc_experiment(ExperimentKind k) {
    return k == ExperimentKind::SpscVsDensity || k == ExperimentKind::SpscVsDistance ||
           k == ExperimentKind::JammingVsDistance;
}

struct SweepSpec {
    std::string kind_name = "throughput_vs_tau";
    ExperimentKind kind = ExperimentKind::ThroughputVsTau;
    std::vector<double> grid;
    std::vector<std::uint64_t> seeds{1};
    std::size_t trials = 20000;
    std::string output;
    // SPSC experiments: the link under test.
    SpscQuery link;
    FadingModel fading;
    std::vector<double> secondary;  // distances (density sweep) or densities (distance sweeps)
    double tau = 0.9999;
    // Throughput experiments.
    ScenarioConfig scenario = desk_scale_config();
    std::vector<std::string> methods{"bruteforce", "mcrr", "astar_distance", "astar_hop", "astar_inverse_se"};
    MethodOptions options;
    std::optional<LayerKind> density_layer;  // all layers when unset
    std::string nodes_file;

    void validate() const {
        require(!grid.empty(), ErrorCode::InvalidArgument, "sweep grid is empty");
        require(!seeds.empty(), ErrorCode::InvalidArgument, "sweep needs at least one seed");
        if (is_spsc_experiment(kind)) {
            require(trials >= 1000, ErrorCode::InsufficientTrials, "SPSC sweeps need at least 1e3 trials");
            require(!secondary.empty(), ErrorCode::InvalidArgument, "SPSC sweeps need a secondary grid");
        }
        if (kind == ExperimentKind::TestbedDemo)
            require(!nodes_file.empty(), ErrorCode::InvalidArgument, "testbed_demo needs nodes_file");
    }
};

// Ground-to-ground link budget from the layer defaults.
inline SpscQuery default_link_query() {
    const LayerDefaultsTable t;
    const auto a = make_node(0, LayerKind::Ground, NodeRole::Relay, {0, 0, 0}, t);
    return {100.0, a.alpha, 1e-5, 0.0, link_gain(a, a), noise_psd(a, LayerKind::Ground)};
}

inline void from_json(const Json& j, SweepSpec& s) {
    s.kind_name = j.at("kind").get<std::string>();
    s.kind = parse_experiment(s.kind_name);
    s.grid = j.at("grid").get<std::vector<double>>();
    if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    s.trials = j.value("trials", s.trials);
    s.output = j.value("output", s.output);
    s.link = default_link_query();
    if (j.contains("link")) {
        const auto& l = j.at("link");
        s.link.alpha = l.value("alpha", s.link.alpha);
        s.link.sigma = l.value("sigma", s.link.sigma);
        s.link.gain_linear = l.value("gain_linear", s.link.gain_linear);
        s.link.noise_psd = l.value("noise_psd", s.link.noise_psd);
    }
    if (j.contains("fading")) s.fading = j.at("fading").get<FadingModel>();
    if (j.contains("secondary")) s.secondary = j.at("secondary").get<std::vector<double>>();
    s.tau = j.value("tau", s.tau);
    if (j.contains("scenario")) from_json(j.at("scenario"), s.scenario);
    if (j.contains("methods")) s.methods = j.at("methods").get<std::vector<std::string>>();
    from_json(j, s.options);
    if (j.contains("density_layer")) s.density_layer = parse_layer(j.at("density_layer").get<std::string>());
    s.nodes_file = j.value("nodes_file", s.nodes_file);
    s.validate();
}

struct SweepRow {
    std::string kind;
    double grid_value = 0.0;
    std::uint64_t seed = 0;
    std::string method;
    double aux = 0.0;  // secondary grid value, or unserved-user count for routing
    double value = 0.0;
    double std_error = 0.0;
    double wall_time_s = 0.0;
};

inline constexpr const char* kSweepHeader = "kind,grid_value,seed,method,aux,value,std_error,wall_time_s";

inline std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << kSweepHeader << "\n";
    for (const auto& r : rows) {
        os << r.kind << ',' << format_number(r.grid_value) << ',' << r.seed << ',' << r.method << ','
           << format_number(r.aux) << ',' << format_number(r.value) << ',' << format_number(r.std_error) << ','
           << format_number(r.wall_time_s) << "\n";
    }
    return os.str();
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::vector<SweepRow> spsc_cell(const SweepSpec& s, double grid_value, std::uint64_t seed) {
    std::vector<SweepRow> rows;
    for (double other : s.secondary) {
        SpscQuery q = s.link;
        if (s.kind == ExperimentKind::SpscVsDensity) {
            q.lambda_eve = grid_value;
            q.distance_km = other;
        } else {
            q.distance_km = grid_value;
            q.lambda_eve = other;
        }
        const double radius = default_region_radius(q.distance_km);
        const auto cal = default_eve_field().calibration;
        if (s.kind == ExperimentKind::JammingVsDistance) {
            const auto t0 = std::chrono::steady_clock::now();
            const double mc = min_jamming_monte_carlo(q, s.fading, s.trials, radius, seed, s.tau);
            const double mc_time = seconds_since(t0);
            const double cf = min_jamming(q, s.tau, SpscModel::ClosedForm, cal);
            const double cb = min_jamming(q, s.tau, SpscModel::Calibrated, cal);
            rows.push_back({s.kind_name, grid_value, seed, "monte_carlo", other, watt_to_dbm(mc), 0.0, mc_time});
            rows.push_back({s.kind_name, grid_value, seed, "closed_form", other, watt_to_dbm(cf), 0.0, 0.0});
            rows.push_back({s.kind_name, grid_value, seed, "calibrated", other, watt_to_dbm(cb), 0.0, 0.0});
        } else {
            const auto t0 = std::chrono::steady_clock::now();
            const auto mc = spsc_monte_carlo(q, s.fading, s.trials, radius, seed);
            const double mc_time = seconds_since(t0);
            rows.push_back({s.kind_name, grid_value, seed, "monte_carlo", other, mc.probability, mc.std_error, mc_time});
            rows.push_back({s.kind_name, grid_value, seed, "closed_form", other, spsc_closed_form(q), 0.0, 0.0});
            rows.push_back({s.kind_name, grid_value, seed, "calibrated", other, spsc_calibrated(q, cal), 0.0, 0.0});
        }
    }
    return rows;
}

inline Network sweep_network(const SweepSpec& s, ScenarioConfig& cfg, std::uint64_t seed) {
    if (s.kind == ExperimentKind::TestbedDemo) {
        return network_from_nodes(load_nodes(s.nodes_file, cfg.defaults()).nodes);
    }
    cfg.seed = seed;
    return random_scenario(cfg);
}

inline std::vector<SweepRow> routing_cell(const SweepSpec& s, double grid_value, std::uint64_t seed) {
    ScenarioConfig cfg = s.scenario;
    switch (s.kind) {
    case ExperimentKind::ThroughputVsTau: cfg.tau = 1.0 - grid_value; break;
    case ExperimentKind::ThroughputVsDensity:
        for (auto k : kAllLayers)
            if (!s.density_layer || *s.density_layer == k) cfg.eve_field.density_per_layer[k] *= grid_value;
        break;
    case ExperimentKind::ThroughputVsPmin: cfg.p_min_ratio = grid_value; break;
    case ExperimentKind::TestbedDemo: cfg.tau = grid_value; break;
    default: break;
    }
    // The scenario geometry depends on the seed only, never on the grid value.
    const Network net = sweep_network(s, cfg, seed);
    const FeasibleGraph fg(net, cfg.policy());
    std::vector<SweepRow> rows;
    for (const auto& m : s.methods) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto sol = run_method(m, fg, s.options, seed);
        rows.push_back({s.kind_name, grid_value, seed, m, static_cast<double>(sol.unserved.size()),
                        sol.min_throughput_bps, 0.0, seconds_since(t0)});
        if (s.kind == ExperimentKind::TestbedDemo && !s.output.empty()) {
            const std::string stem = s.output.substr(0, s.output.rfind('.'));
            std::ostringstream name;
            name << stem << "_" << m << "_tau" << format_number(grid_value) << "_seed" << seed;
            write_text_file(name.str() + ".geojson", export_geojson(sol, fg).dump(1) + "\n");
            write_text_file(name.str() + ".json", solution_json(sol, net).dump(1) + "\n");
        }
    }
    return rows;
}

} // namespace detail

inline std::vector<SweepRow> run_sweep(const SweepSpec& s) {
    s.validate();
    struct Cell {
        double grid_value;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (double g : s.grid)
        for (auto seed : s.seeds) cells.push_back({g, seed});
    std::vector<std::vector<SweepRow>> results(cells.size());
    parallel_for(cells.size(), [&](std::size_t k) {
        const auto& c = cells[k];
        try {
            results[k] = is_spsc_experiment(s.kind) ? detail::spsc_cell(s, c.grid_value, c.seed)
                                                    : detail::routing_cell(s, c.grid_value, c.seed);
        } catch (const Error& e) {
            throw Error(e.code(), "grid value " + format_number(c.grid_value) + ", seed " +
                                      std::to_string(c.seed) + ": " + e.what());
        }
    });
    std::vector<SweepRow> rows;
    for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
    if (!s.output.empty()) write_text_file(s.output, sweep_csv(rows));
    return rows;
}

} // namespace sagsin
