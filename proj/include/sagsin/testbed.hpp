// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sagsin/channel.hpp"
#include "sagsin/default_calibration.hpp"
#include "sagsin/error.hpp"
#include "sagsin/feasible.hpp"
#include "sagsin/json_io.hpp"
#include "sagsin/rng.hpp"
#include "sagsin/secrecy.hpp"

namespace sagsin {

// Per-layer physical parameters in table units (GHz, MHz, dBm, dBi, dB/K).
struct LayerDefaults {
    double carrier_ghz = 0.0;
    double bandwidth_mhz = 0.0;
    double tx_power_dbm = 0.0;
    PerLayer<double> tx_gain_dbi;
    PerLayer<double> rx_gain_dbi;
    PerLayer<double> gain_to_noise_temp_dbk;
    double alpha = 2.8;
    double altitude_km = 0.0;
    bool operator==(const LayerDefaults&) const = default;
};

inline PerLayer<double> toward_space_or_rest(double space, double rest) {
    PerLayer<double> v;
    v[LayerKind::Space] = space;
    v[LayerKind::Air] = rest;
    v[LayerKind::Ground] = rest;
    v[LayerKind::Sea] = rest;
    return v;
}

inline LayerDefaults table_defaults(LayerKind k) {
    if (k == LayerKind::Space) {
        return {20.0, 400.0, 21.5, toward_space_or_rest(38.5, 38.5), toward_space_or_rest(38.5, 38.5),
                toward_space_or_rest(13.0, 13.0), 2.4, 550.0};
    }
    LayerDefaults d{14.0, 250.0, 30.0, toward_space_or_rest(43.2, 25.0), toward_space_or_rest(39.7, 25.0),
                    toward_space_or_rest(1.2, 15.9), 2.8, 0.0};
    if (k == LayerKind::Sea) d.alpha = 2.7;
    if (k == LayerKind::Air) {
        d.alpha = 2.6;
        d.altitude_km = 20.0;
        d.gain_to_noise_temp_dbk = toward_space_or_rest(1.5, 16.2);
    }
    return d;
}

struct LayerDefaultsTable {
    PerLayer<LayerDefaults> layers{{table_defaults(LayerKind::Space), table_defaults(LayerKind::Air),
                                    table_defaults(LayerKind::Ground), table_defaults(LayerKind::Sea)}};
    double p_min_ratio = 0.8;
};

inline double ratio_to_db(double ratio) { return ratio > 0.0 ? linear_to_db(ratio) : -300.0; }

inline NodeSpec make_node(int id, LayerKind layer, NodeRole role, GeoPosition pos, const LayerDefaultsTable& t) {
    const auto& d = t.layers[layer];
    NodeSpec n;
    n.id = id;
    n.layer = layer;
    n.role = role;
    n.position = pos;
    n.p_max_dbm = d.tx_power_dbm;
    n.p_min_dbm = d.tx_power_dbm + ratio_to_db(t.p_min_ratio);
    n.bandwidth_hz = d.bandwidth_mhz * 1e6;
    n.tx_gain_dbi = d.tx_gain_dbi;
    n.rx_gain_dbi = d.rx_gain_dbi;
    n.gain_to_noise_temp_dbk = d.gain_to_noise_temp_dbk;
    n.alpha = d.alpha;
    return n;
}

inline EveField default_eve_field() {
    EveField f;
    f.density_per_layer[LayerKind::Space] = 1e-3;
    f.density_per_layer[LayerKind::Air] = 2e-3;
    f.density_per_layer[LayerKind::Ground] = 3e-4;
    f.density_per_layer[LayerKind::Sea] = 1e-4;
    f.calibration = Json::parse(kDefaultCalibrationJson).get<Calibration>();
    return f;
}

struct LayerCounts {
    int ground = 150;
    int maritime = 150;
    int haps = 12;
    int leo = 10;
    int users = 60;
    bool operator==(const LayerCounts&) const = default;
};

struct BoundingBox {
    double lat_min = -30.0;
    double lat_max = -10.0;
    double lon_min = 30.0;
    double lon_max = 60.0;
    bool operator==(const BoundingBox&) const = default;

    GeoPosition center() const { return {0.5 * (lat_min + lat_max), 0.5 * (lon_min + lon_max), 0.0}; }
    bool contains(const GeoPosition& p) const {
        return p.latitude_deg >= lat_min && p.latitude_deg <= lat_max && p.longitude_deg >= lon_min &&
               p.longitude_deg <= lon_max;
    }
};

struct ScenarioConfig {
    LayerCounts counts;
    BoundingBox box;
    EveField eve_field = default_eve_field();
    double tau = 0.9999;
    double p_min_ratio = 0.8;
    PerLayer<double> bandwidth_hz{{400e6, 250e6, 250e6, 250e6}};
    std::uint64_t seed = 1;
    SpscModel spsc_model = SpscModel::Calibrated;
    double distance_tol_km = 0.1;
    double max_search_km = 20000.0;
    bool operator==(const ScenarioConfig&) const = default;

    void validate() const {
        require(counts.ground >= 0 && counts.maritime >= 0 && counts.haps >= 0 && counts.leo >= 0 && counts.users >= 0,
                ErrorCode::InvalidArgument, "layer counts must be non-negative");
        require(p_min_ratio >= 0.0 && p_min_ratio <= 1.0, ErrorCode::InvalidArgument, "p_min_ratio must lie in [0, 1]");
        require(tau > 0.0 && tau < 1.0, ErrorCode::InvalidArgument, "tau must lie in (0, 1)");
        require(box.lat_min < box.lat_max && box.lon_min < box.lon_max, ErrorCode::InvalidArgument,
                "bounding box is empty");
        eve_field.validate();
    }

    LayerDefaultsTable defaults() const {
        LayerDefaultsTable t;
        t.p_min_ratio = p_min_ratio;
        for (auto k : kAllLayers) t.layers[k].bandwidth_mhz = bandwidth_hz[k] / 1e6;
        return t;
    }

    SecurityPolicy policy() const { return {eve_field, tau, {distance_tol_km, max_search_km, spsc_model}}; }
};

// Thirty relays and ten users, the harness default.
inline ScenarioConfig desk_scale_config() {
    ScenarioConfig c;
    c.counts = {12, 12, 3, 3, 10};
    return c;
}

// Ground relay nearest to `center`, else any relay; -1 when there is none.
inline int choose_root(const std::vector<NodeSpec>& nodes, const GeoPosition& center) {
    int best = -1;
    bool best_ground = false;
    double best_d = kInf;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].can_relay()) continue;
        const bool ground = nodes[i].layer == LayerKind::Ground;
        GeoPosition c = center;
        c.altitude_km = nodes[i].position.altitude_km;
        const double d = chord_km(nodes[i].position, c);
        if ((ground && !best_ground) || (ground == best_ground && d < best_d)) {
            best = static_cast<int>(i);
            best_ground = ground;
            best_d = d;
        }
    }
    return best;
}

// Root moved to index 0; ids renumbered to indices.
inline Network assemble_network(std::vector<NodeSpec> nodes, int root, bool renumber) {
    Network net;
    if (root > 0) std::rotate(nodes.begin(), nodes.begin() + root, nodes.begin() + root + 1);
    if (renumber)
        for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].id = static_cast<int>(i);
    net.nodes = std::move(nodes);
    net.root = root >= 0 ? 0 : -1;
    return net;
}

inline Network random_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const auto table = cfg.defaults();
    Rng rng = make_stream(cfg.seed, 0, 0x7363);
    std::uniform_real_distribution<double> lat(cfg.box.lat_min, cfg.box.lat_max);
    std::uniform_real_distribution<double> lon(cfg.box.lon_min, cfg.box.lon_max);
    std::vector<NodeSpec> nodes;
    auto place = [&](int count, LayerKind layer, NodeRole role) {
        for (int k = 0; k < count; ++k) {
            GeoPosition p{lat(rng), lon(rng), role == NodeRole::User ? 0.0 : table.layers[layer].altitude_km};
            nodes.push_back(make_node(static_cast<int>(nodes.size()), layer, role, p, table));
        }
    };
    place(cfg.counts.ground, LayerKind::Ground, NodeRole::Relay);
    place(cfg.counts.maritime, LayerKind::Sea, NodeRole::Relay);
    place(cfg.counts.haps, LayerKind::Air, NodeRole::Relay);
    place(cfg.counts.leo, LayerKind::Space, NodeRole::Relay);
    place(cfg.counts.users, LayerKind::Ground, NodeRole::User);
    const int root = choose_root(nodes, cfg.box.center());
    return assemble_network(std::move(nodes), root, true);
}

struct LoadReport {
    std::vector<NodeSpec> nodes;
    std::vector<std::string> errors;  // "row N: reason"
};

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    const auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline void apply_override(NodeSpec& n, const std::string& key, double value) {
    auto layered = [&](const std::string& prefix, PerLayer<double>& target) {
        if (key.rfind(prefix, 0) != 0) return false;
        target[parse_layer(key.substr(prefix.size()))] = value;
        return true;
    };
    if (key == "p_max_dbm") n.p_max_dbm = value;
    else if (key == "p_min_dbm") n.p_min_dbm = value;
    else if (key == "bandwidth_hz") n.bandwidth_hz = value;
    else if (key == "alpha") n.alpha = value;
    else if (layered("tx_gain_", n.tx_gain_dbi) || layered("rx_gain_", n.rx_gain_dbi) ||
             layered("gt_", n.gain_to_noise_temp_dbk)) {
    } else {
        fail(ErrorCode::ParseError, "unknown column '" + key + "'");
    }
}

inline NodeSpec node_from_record(const Json& r, const LayerDefaultsTable& t) {
    const auto tag = r.at("layer").get<std::string>();
    const bool user = r.value("role", tag == "user" ? std::string("user") : std::string("relay")) == "user";
    GeoPosition pos{r.at("lat").get<double>(), r.at("lon").get<double>(), r.value("alt_km", 0.0)};
    NodeSpec n = make_node(r.at("id").get<int>(), parse_layer(tag), user ? NodeRole::User : NodeRole::Relay, pos, t);
    for (const char* key : {"p_max_dbm", "p_min_dbm", "bandwidth_hz", "alpha"})
        if (r.contains(key)) apply_override(n, key, r.at(key).get<double>());
    if (r.contains("tx_gain_dbi")) per_layer_from_json(r.at("tx_gain_dbi"), n.tx_gain_dbi);
    if (r.contains("rx_gain_dbi")) per_layer_from_json(r.at("rx_gain_dbi"), n.rx_gain_dbi);
    if (r.contains("gain_to_noise_temp_dbk")) per_layer_from_json(r.at("gain_to_noise_temp_dbk"), n.gain_to_noise_temp_dbk);
    n.validate();
    return n;
}

} // namespace detail

inline LoadReport parse_nodes(const std::string& text, const LayerDefaultsTable& defaults) {
    LoadReport report;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) fail(ErrorCode::EmptyDataset, "node file is empty");
    if (text[first] == '[') {
        Json doc;
        try {
            doc = Json::parse(text);
        } catch (const Json::exception& e) {
            fail(ErrorCode::ParseError, e.what());
        }
        for (std::size_t k = 0; k < doc.size(); ++k) {
            try {
                report.nodes.push_back(detail::node_from_record(doc[k], defaults));
            } catch (const std::exception& e) {
                report.errors.push_back("row " + std::to_string(k + 1) + ": " + e.what());
            }
        }
    } else {
        std::stringstream in(text);
        std::string line;
        std::getline(in, line);
        const auto header = detail::split_csv(line);
        for (const char* col : {"id", "layer", "lat", "lon", "alt_km"}) {
            require(std::find(header.begin(), header.end(), col) != header.end(), ErrorCode::ParseError,
                    std::string("CSV header lacks column '") + col + "'");
        }
        int row = 1;
        while (std::getline(in, line)) {
            ++row;
            if (detail::trim(line).empty()) continue;
            try {
                const auto cells = detail::split_csv(line);
                require(cells.size() == header.size(), ErrorCode::ParseError, "expected " +
                        std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
                Json rec = Json::object();
                Json overrides = Json::object();
                for (std::size_t c = 0; c < header.size(); ++c) {
                    const auto& key = header[c];
                    if (cells[c].empty()) continue;
                    if (key == "layer" || key == "role") rec[key] = cells[c];
                    else if (key == "id") rec[key] = std::stoi(cells[c]);
                    else if (key == "lat" || key == "lon" || key == "alt_km") rec[key] = std::stod(cells[c]);
                    else overrides[key] = std::stod(cells[c]);
                }
                NodeSpec n = detail::node_from_record(rec, defaults);
                for (auto& [key, value] : overrides.items()) detail::apply_override(n, key, value.get<double>());
                n.validate();
                report.nodes.push_back(n);
            } catch (const std::exception& e) {
                report.errors.push_back("row " + std::to_string(row) + ": " + e.what());
            }
        }
    }
    if (report.nodes.empty()) {
        if (!report.errors.empty()) {
            std::string msg = "no valid rows";
            for (const auto& e : report.errors) msg += "; " + e;
            fail(ErrorCode::ParseError, msg);
        }
        fail(ErrorCode::EmptyDataset, "no node rows");
    }
    return report;
}

inline LoadReport load_nodes(const std::string& path, const LayerDefaultsTable& defaults = {}) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::IoError, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_nodes(ss.str(), defaults);
}

inline std::string nodes_to_json(const std::vector<NodeSpec>& nodes) { return Json(nodes).dump(2) + "\n"; }

inline void save_nodes(const std::string& path, const std::vector<NodeSpec>& nodes) {
    write_text_file(path, nodes_to_json(nodes));
}

// Snapshot nodes as a routable network; root defaults to the ground relay
// nearest the centroid.
inline Network network_from_nodes(std::vector<NodeSpec> nodes, std::optional<int> root_id = std::nullopt) {
    int root = -1;
    if (root_id) {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i].id == *root_id) root = static_cast<int>(i);
        require(root >= 0, ErrorCode::InvalidArgument, "root id " + std::to_string(*root_id) + " not found");
    } else {
        double lat = 0, lon = 0;
        for (const auto& n : nodes) {
            lat += n.position.latitude_deg;
            lon += n.position.longitude_deg;
        }
        const double k = static_cast<double>(nodes.size());
        root = choose_root(nodes, {lat / k, lon / k, 0.0});
    }
    return assemble_network(std::move(nodes), root, false);
}

inline void to_json(Json& j, const EveField& f) {
    j = Json{{"density_per_layer", per_layer_json(f.density_per_layer)},
             {"hotspots", f.hotspots},
             {"calibration", f.calibration}};
}

inline void from_json(const Json& j, EveField& f) {
    f = default_eve_field();
    if (j.contains("density_per_layer")) per_layer_from_json(j.at("density_per_layer"), f.density_per_layer);
    if (j.contains("density_scale")) {
        const double s = j.at("density_scale").get<double>();
        for (auto k : kAllLayers) f.density_per_layer[k] *= s;
    }
    if (j.contains("hotspots")) f.hotspots = j.at("hotspots").get<std::vector<Hotspot>>();
    if (j.contains("calibration")) f.calibration = j.at("calibration").get<Calibration>();
}

inline void to_json(Json& j, const ScenarioConfig& c) {
    j = Json{{"counts",
              {{"ground", c.counts.ground},
               {"maritime", c.counts.maritime},
               {"haps", c.counts.haps},
               {"leo", c.counts.leo},
               {"users", c.counts.users}}},
             {"box",
              {{"lat_min", c.box.lat_min}, {"lat_max", c.box.lat_max}, {"lon_min", c.box.lon_min}, {"lon_max", c.box.lon_max}}},
             {"eve_field", c.eve_field},
             {"tau", c.tau},
             {"p_min_ratio", c.p_min_ratio},
             {"bandwidth_hz", per_layer_json(c.bandwidth_hz)},
             {"seed", c.seed},
             {"spsc_model", c.spsc_model},
             {"distance_tol_km", c.distance_tol_km},
             {"max_search_km", c.max_search_km}};
}

// Missing keys keep their defaults, so partial configs are accepted.
inline void from_json(const Json& j, ScenarioConfig& c) {
    if (j.contains("counts")) {
        const auto& k = j.at("counts");
        c.counts.ground = k.value("ground", c.counts.ground);
        c.counts.maritime = k.value("maritime", c.counts.maritime);
        c.counts.haps = k.value("haps", c.counts.haps);
        c.counts.leo = k.value("leo", c.counts.leo);
        c.counts.users = k.value("users", c.counts.users);
    }
    if (j.contains("box")) {
        const auto& b = j.at("box");
        c.box.lat_min = b.value("lat_min", c.box.lat_min);
        c.box.lat_max = b.value("lat_max", c.box.lat_max);
        c.box.lon_min = b.value("lon_min", c.box.lon_min);
        c.box.lon_max = b.value("lon_max", c.box.lon_max);
    }
    if (j.contains("eve_field")) c.eve_field = j.at("eve_field").get<EveField>();
    c.tau = j.value("tau", c.tau);
    c.p_min_ratio = j.value("p_min_ratio", c.p_min_ratio);
    if (j.contains("bandwidth_hz")) per_layer_from_json(j.at("bandwidth_hz"), c.bandwidth_hz);
    c.seed = j.value("seed", c.seed);
    if (j.contains("spsc_model")) c.spsc_model = j.at("spsc_model").get<SpscModel>();
    c.distance_tol_km = j.value("distance_tol_km", c.distance_tol_km);
    c.max_search_km = j.value("max_search_km", c.max_search_km);
    c.validate();
}

} // namespace sagsin
