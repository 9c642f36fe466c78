// SPDX-License-Identifier: Apache-2.0
// Command-line driver: calibrate, sweep, route, validate.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sagsin/sagsin.hpp"

namespace {

using namespace sagsin;

struct CommonArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool config_required) {
    auto* c = cmd->add_option("--config", a.config, "JSON configuration file");
    if (config_required) c->required();
    cmd->add_option("--seed", a.seed, "Base seed");
    cmd->add_option("--trials", a.trials, "Monte-Carlo trials");
    cmd->add_option("--out", a.out, "Output path (stdout when omitted)");
}

Json load_config(const CommonArgs& a) { return a.config.empty() ? Json::object() : read_json_file(a.config); }

void emit(const CommonArgs& a, const std::string& text) {
    if (a.out.empty()) std::cout << text;
    else write_text_file(a.out, text);
}

std::string stem_of(const std::string& path) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.rfind('.');
    return dot != std::string::npos && (slash == std::string::npos || dot > slash) ? path.substr(0, dot) : path;
}

int cmd_calibrate(const CommonArgs& a) {
    const Json cfg = load_config(a);
    SpscQuery ref = default_link_query();
    ref.alpha = cfg.value("alpha", ref.alpha);
    const auto bands = cfg.value("bands_km", std::vector<double>{50, 100, 200, 400});
    const auto lambdas =
        cfg.value("lambda_grid", std::vector<double>{1e-7, 3e-7, 1e-6, 3e-6, 1e-5, 3e-5, 1e-4});
    const FadingModel fading = cfg.contains("fading") ? cfg.at("fading").get<FadingModel>() : FadingModel{};
    const std::size_t trials = a.trials.value_or(cfg.value("trials", std::size_t{20000}));
    const std::uint64_t seed = a.seed.value_or(cfg.value("seed", std::uint64_t{1}));
    const Calibration cal = calibrate(ref, fading, bands, lambdas, trials, seed);
    emit(a, Json(cal).dump(2) + "\n");
    return 0;
}

int cmd_sweep(const CommonArgs& a) {
    Json cfg = load_config(a);
    if (a.seed) cfg["seeds"] = std::vector<std::uint64_t>{*a.seed};
    if (a.trials) cfg["trials"] = *a.trials;
    if (!a.out.empty()) cfg["output"] = a.out;
    const SweepSpec spec = cfg.get<SweepSpec>();
    const auto rows = run_sweep(spec);
    if (spec.output.empty()) std::cout << sweep_csv(rows);
    return 0;
}

struct RouteSetup {
    Network network;
    ScenarioConfig scenario;
};

RouteSetup route_setup(const Json& cfg, std::optional<std::uint64_t> seed) {
    RouteSetup s{{}, desk_scale_config()};
    if (cfg.contains("scenario")) from_json(cfg.at("scenario"), s.scenario);
    if (seed) s.scenario.seed = *seed;
    s.scenario.validate();
    if (cfg.contains("nodes_file")) {
        const auto report = load_nodes(cfg.at("nodes_file").get<std::string>(), s.scenario.defaults());
        for (const auto& e : report.errors) std::cerr << Json{{"warning", "skipped_row"}, {"detail", e}}.dump() << "\n";
        std::optional<int> root;
        if (cfg.contains("root_id")) root = cfg.at("root_id").get<int>();
        s.network = network_from_nodes(report.nodes, root);
    } else {
        s.network = random_scenario(s.scenario);
    }
    return s;
}

int cmd_route(const CommonArgs& a) {
    const Json cfg = load_config(a);
    const auto setup = route_setup(cfg, a.seed);
    MethodOptions opt;
    from_json(cfg, opt);
    if (a.trials) opt.bruteforce.trials = static_cast<int>(*a.trials);
    const FeasibleGraph fg(setup.network, setup.scenario.policy());
    const auto method = cfg.value("method", std::string("mcrr"));
    const auto sol = run_method(method, fg, opt, setup.scenario.seed);
    const std::string doc = solution_json(sol, setup.network).dump(2) + "\n";
    if (a.out.empty()) {
        std::cout << doc;
    } else {
        write_text_file(a.out, doc);
        write_text_file(stem_of(a.out) + ".geojson", export_geojson(sol, fg).dump(2) + "\n");
    }
    return 0;
}

int cmd_validate(const CommonArgs& a, const std::string& solution_path) {
    const Json cfg = load_config(a);
    const auto setup = route_setup(cfg, a.seed);
    const FeasibleGraph fg(setup.network, setup.scenario.policy());
    const Json doc = read_json_file(solution_path);
    RoutingGraph g;
    try {
        g = graph_from_solution_json(doc, setup.network);
    } catch (const Json::exception& e) {
        fail(ErrorCode::ParseError, solution_path + ": " + e.what());
    }
    const auto check = check_solution(g, fg);
    auto id = [&](int i) { return i >= 0 && i < fg.size() ? setup.network.nodes[static_cast<std::size_t>(i)].id : i; };
    Json violations = Json::array();
    for (const auto& v : check.tree)
        violations.push_back({{"kind", v.kind}, {"node", id(v.node)}, {"detail", v.detail}});
    for (const auto& e : check.infeasible_edges)
        violations.push_back({{"kind", "edge_exceeds_max_distance"}, {"from", id(e.from)}, {"to", id(e.to)}});
    const Json report{{"ok", check.ok()}, {"edges", g.edges.size()}, {"violations", violations}};
    emit(a, report.dump(2) + "\n");
    if (!check.ok()) {
        std::cerr << Json{{"error", "InvalidSolution"}, {"message", std::to_string(violations.size()) + " violation(s)"}}.dump()
                  << "\n";
        return 3;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Secure relay routing planner for space-air-ground-sea networks"};
    app.require_subcommand(1);
    CommonArgs args;
    std::string solution_path;
    auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit per-band SPSC calibration against Monte-Carlo");
    add_common(calibrate_cmd, args, false);
    auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment sweep and write CSV");
    add_common(sweep_cmd, args, true);
    auto* route_cmd = app.add_subcommand("route", "Route one scenario and write solution JSON + GeoJSON");
    add_common(route_cmd, args, false);
    auto* validate_cmd = app.add_subcommand("validate", "Check a solution against a scenario");
    add_common(validate_cmd, args, false);
    validate_cmd->add_option("solution", solution_path, "Solution JSON to check")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << Json{{"error", "UsageError"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    }

    try {
        if (*calibrate_cmd) return cmd_calibrate(args);
        if (*sweep_cmd) return cmd_sweep(args);
        if (*route_cmd) return cmd_route(args);
        if (*validate_cmd) return cmd_validate(args, solution_path);
    } catch (const Error& e) {
        std::cerr << Json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const Json::exception& e) {
        std::cerr << Json{{"error", "ParseError"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << Json{{"error", "InternalError"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
