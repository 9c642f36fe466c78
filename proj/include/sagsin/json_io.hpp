// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sagsin/channel.hpp"
#include "sagsin/error.hpp"
#include "sagsin/secrecy.hpp"

namespace sagsin {

using Json = nlohmann::json;

inline constexpr int kCalibrationVersion = 1;

inline void to_json(Json& j, LayerKind k) { j = std::string(to_string(k)); }
inline void from_json(const Json& j, LayerKind& k) { k = parse_layer(j.get<std::string>()); }

inline void to_json(Json& j, const GeoPosition& p) {
    j = Json{{"lat", p.latitude_deg}, {"lon", p.longitude_deg}, {"alt_km", p.altitude_km}};
}
inline void from_json(const Json& j, GeoPosition& p) {
    p.latitude_deg = j.at("lat").get<double>();
    p.longitude_deg = j.at("lon").get<double>();
    p.altitude_km = j.value("alt_km", 0.0);
}

inline Json per_layer_json(const PerLayer<double>& v) {
    Json j = Json::object();
    for (auto k : kAllLayers) j[std::string(to_string(k))] = v[k];
    return j;
}

inline void per_layer_from_json(const Json& j, PerLayer<double>& v) {
    for (auto& [key, value] : j.items()) v[parse_layer(key)] = value.get<double>();
}

inline void to_json(Json& j, const CalibrationBand& b) { j = Json{{"band_km", b.band_km}, {"a", b.a}, {"p", b.p}}; }
inline void from_json(const Json& j, CalibrationBand& b) {
    b.band_km = j.at("band_km").get<double>();
    b.a = j.at("a").get<double>();
    b.p = j.at("p").get<double>();
}

inline void to_json(Json& j, const Calibration& c) {
    j = Json{{"version", kCalibrationVersion}, {"extrapolate", c.extrapolate()}, {"bands", c.bands()}};
}
inline void from_json(const Json& j, Calibration& c) {
    const int version = j.value("version", kCalibrationVersion);
    require(version == kCalibrationVersion, ErrorCode::ParseError,
            "unsupported calibration version " + std::to_string(version));
    c = Calibration(j.at("bands").get<std::vector<CalibrationBand>>(), j.value("extrapolate", true));
}

inline void to_json(Json& j, const Hotspot& h) {
    j = Json{{"center", h.center}, {"radius_km", h.radius_km}, {"density_multiplier", h.density_multiplier}};
}
inline void from_json(const Json& j, Hotspot& h) {
    h.center = j.at("center").get<GeoPosition>();
    h.radius_km = j.at("radius_km").get<double>();
    h.density_multiplier = j.at("density_multiplier").get<double>();
}

inline void to_json(Json& j, const FadingModel& f) {
    switch (f.kind) {
    case FadingModel::Kind::Rayleigh: j = Json{{"kind", "rayleigh"}}; break;
    case FadingModel::Kind::Rician: j = Json{{"kind", "rician"}, {"k_db", f.k_db}}; break;
    case FadingModel::Kind::ShadowedRician: j = Json{{"kind", "shadowed_rician"}, {"k_db", f.k_db}, {"m", f.m}}; break;
    }
}
inline void from_json(const Json& j, FadingModel& f) {
    const auto kind = j.value("kind", std::string("rayleigh"));
    if (kind == "rayleigh") f = FadingModel::rayleigh();
    else if (kind == "rician") f = FadingModel::rician(j.at("k_db").get<double>());
    else if (kind == "shadowed_rician") f = FadingModel::shadowed_rician(j.at("k_db").get<double>(), j.at("m").get<double>());
    else fail(ErrorCode::ParseError, "unknown fading kind '" + kind + "'");
}

inline void to_json(Json& j, SpscModel m) { j = m == SpscModel::Calibrated ? "calibrated" : "closed_form"; }
inline void from_json(const Json& j, SpscModel& m) {
    const auto s = j.get<std::string>();
    if (s == "calibrated") m = SpscModel::Calibrated;
    else if (s == "closed_form") m = SpscModel::ClosedForm;
    else fail(ErrorCode::ParseError, "unknown spsc model '" + s + "'");
}

inline void to_json(Json& j, const NodeSpec& n) {
    j = Json{{"id", n.id},
             {"layer", n.layer},
             {"role", n.role == NodeRole::User ? "user" : "relay"},
             {"lat", n.position.latitude_deg},
             {"lon", n.position.longitude_deg},
             {"alt_km", n.position.altitude_km},
             {"p_max_dbm", n.p_max_dbm},
             {"p_min_dbm", n.p_min_dbm},
             {"bandwidth_hz", n.bandwidth_hz},
             {"tx_gain_dbi", per_layer_json(n.tx_gain_dbi)},
             {"rx_gain_dbi", per_layer_json(n.rx_gain_dbi)},
             {"gain_to_noise_temp_dbk", per_layer_json(n.gain_to_noise_temp_dbk)},
             {"alpha", n.alpha}};
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::IoError, "cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        fail(ErrorCode::ParseError, path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::IoError, "cannot write " + path);
    out << text;
    require(static_cast<bool>(out), ErrorCode::IoError, "write failed for " + path);
}

inline Calibration load_calibration(const std::string& path) { return read_json_file(path).get<Calibration>(); }

inline void save_calibration(const std::string& path, const Calibration& c) {
    write_text_file(path, Json(c).dump(2) + "\n");
}

} // namespace sagsin
