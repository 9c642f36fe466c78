// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sagsin/error.hpp"
#include "sagsin/parallel.hpp"
#include "sagsin/rng.hpp"
#include "sagsin/units.hpp"

namespace sagsin {

enum class LayerKind : std::uint8_t { Space = 0, Air = 1, Ground = 2, Sea = 3 };

inline constexpr std::array<LayerKind, 4> kAllLayers{LayerKind::Space, LayerKind::Air, LayerKind::Ground,
                                                     LayerKind::Sea};

template <class T>
struct PerLayer {
    std::array<T, 4> values{};

    T& operator[](LayerKind k) { return values[static_cast<std::size_t>(k)]; }
    const T& operator[](LayerKind k) const { return values[static_cast<std::size_t>(k)]; }
    bool operator==(const PerLayer&) const = default;
};

constexpr std::string_view to_string(LayerKind k) {
    switch (k) {
    case LayerKind::Space: return "space";
    case LayerKind::Air: return "air";
    case LayerKind::Ground: return "ground";
    case LayerKind::Sea: return "sea";
    }
    return "?";
}

inline LayerKind parse_layer(std::string_view tag) {
    std::string t(tag);
    for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "space" || t == "leo" || t == "satellite") return LayerKind::Space;
    if (t == "air" || t == "hap" || t == "haps") return LayerKind::Air;
    if (t == "ground" || t == "bs" || t == "user") return LayerKind::Ground;
    if (t == "sea" || t == "maritime" || t == "ship") return LayerKind::Sea;
    fail(ErrorCode::ParseError, "unknown layer tag '" + std::string(tag) + "'");
}

struct GeoPosition {
    double latitude_deg = 0.0;
    double longitude_deg = 0.0;
    double altitude_km = 0.0;

    bool operator==(const GeoPosition&) const = default;

    void validate() const {
        require(std::isfinite(latitude_deg) && latitude_deg >= -90.0 && latitude_deg <= 90.0,
                ErrorCode::InvalidArgument, "latitude out of [-90, 90]");
        require(std::isfinite(longitude_deg) && longitude_deg >= -180.0 && longitude_deg <= 180.0,
                ErrorCode::InvalidArgument, "longitude out of [-180, 180]");
        require(std::isfinite(altitude_km) && altitude_km >= -0.5, ErrorCode::InvalidArgument,
                "altitude below -0.5 km");
    }
};

using Vec3 = std::array<double, 3>;

inline Vec3 geodetic_to_cartesian(const GeoPosition& p) {
    const double r = kEarthRadiusKm + p.altitude_km;
    const double lat = p.latitude_deg * kPi / 180.0;
    const double lon = p.longitude_deg * kPi / 180.0;
    return {r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon), r * std::sin(lat)};
}

inline double chord_km(const GeoPosition& a, const GeoPosition& b) {
    const Vec3 u = geodetic_to_cartesian(a);
    const Vec3 v = geodetic_to_cartesian(b);
    const double dx = u[0] - v[0], dy = u[1] - v[1], dz = u[2] - v[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

enum class NodeRole : std::uint8_t { Relay, User };

struct NodeSpec {
    int id = 0;
    LayerKind layer = LayerKind::Ground;
    NodeRole role = NodeRole::Relay;
    GeoPosition position;
    double p_max_dbm = 30.0;       // transmit power; spread evenly over bandwidth_hz
    double p_min_dbm = 30.0;
    double bandwidth_hz = 250e6;
    PerLayer<double> tx_gain_dbi;  // indexed by the peer's layer
    PerLayer<double> rx_gain_dbi;
    PerLayer<double> gain_to_noise_temp_dbk;
    double alpha = 2.8;

    bool operator==(const NodeSpec&) const = default;

    bool can_relay() const { return role == NodeRole::Relay; }
    double p_max_psd() const { return dbm_to_watt(p_max_dbm) / bandwidth_hz; }
    double p_min_psd() const { return dbm_to_watt(p_min_dbm) / bandwidth_hz; }
    double jamming_budget_psd() const { return std::max(0.0, p_max_psd() - p_min_psd()); }

    void validate() const {
        position.validate();
        require(p_min_dbm <= p_max_dbm, ErrorCode::InvalidArgument, "p_min_dbm exceeds p_max_dbm");
        require(alpha > 2.0 && std::isfinite(alpha), ErrorCode::InvalidArgument, "alpha must exceed 2");
        require(bandwidth_hz > 0.0, ErrorCode::InvalidArgument, "bandwidth must be positive");
        for (auto k : kAllLayers) {
            require(std::isfinite(tx_gain_dbi[k]) && std::isfinite(rx_gain_dbi[k]) &&
                        std::isfinite(gain_to_noise_temp_dbk[k]),
                    ErrorCode::InvalidArgument, "gains must be finite");
        }
    }
};

inline double link_distance(const GeoPosition& a, const GeoPosition& b) {
    const double d = chord_km(a, b);
    require(d > 0.0, ErrorCode::ZeroDistance, "coincident positions");
    return d;
}

inline double link_distance(const NodeSpec& a, const NodeSpec& b) { return link_distance(a.position, b.position); }

struct LinkBudget {
    double distance_km = 1.0;
    double gain_linear = 1.0;
    double noise_psd = 1.0;
    double alpha = 2.8;
};

// Receiver noise when listening to a transmitter in layer `from`.
inline double noise_psd(const NodeSpec& rx, LayerKind from) {
    const double temperature = db_to_linear(rx.rx_gain_dbi[from] - rx.gain_to_noise_temp_dbk[from]);
    return kBoltzmann * temperature;
}

inline double link_gain(const NodeSpec& tx, const NodeSpec& rx) {
    return db_to_linear(tx.tx_gain_dbi[rx.layer] + rx.rx_gain_dbi[tx.layer]);
}

inline LinkBudget link_budget(const NodeSpec& tx, const NodeSpec& rx, double distance_km) {
    return {distance_km, link_gain(tx, rx), noise_psd(rx, tx.layer), tx.alpha};
}

inline LinkBudget link_budget(const NodeSpec& tx, const NodeSpec& rx) {
    return link_budget(tx, rx, link_distance(tx, rx));
}

inline double snr_legitimate(double rho, const LinkBudget& b, double fading_power) {
    return rho * b.gain_linear * fading_power * path_gain(b.distance_km, b.alpha) / b.noise_psd;
}

inline double snr_wiretap(double rho, double sigma, double gain_linear, double eve_distance_km, double alpha,
                          double noise_psd, double eve_fading_power) {
    const double received = gain_linear * eve_fading_power * path_gain(eve_distance_km, alpha);
    return rho * received / (sigma * received + noise_psd);
}

inline double spectral_efficiency(double rho, const LinkBudget& b) { return std::log2(1.0 + snr_legitimate(rho, b, 1.0)); }

struct ErgodicFit {
    double scale = 0.0;
    double mse = 0.0;
    std::vector<double> snr_db;
    std::vector<double> monte_carlo;
    std::vector<double> closed_form;
    std::vector<double> std_error;
};

// Rayleigh ergodic SE versus scale * log2(1 + snr), least squares in scale.
inline ErgodicFit ergodic_se_fit(std::span<const double> snr_grid_db, std::size_t trials, std::uint64_t seed = 1) {
    require(trials >= 10000, ErrorCode::InsufficientTrials, "ergodic_se_fit needs at least 1e4 trials");
    require(!snr_grid_db.empty(), ErrorCode::InvalidArgument, "empty SNR grid");
    ErgodicFit fit;
    const std::size_t n = snr_grid_db.size();
    fit.snr_db.assign(snr_grid_db.begin(), snr_grid_db.end());
    fit.monte_carlo.resize(n);
    fit.closed_form.resize(n);
    fit.std_error.resize(n);
    parallel_for(n, [&](std::size_t k) {
        const double snr = db_to_linear(snr_grid_db[k]);
        Rng rng = make_stream(seed, k);
        std::exponential_distribution<double> fading(1.0);
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            const double v = std::log2(1.0 + snr * fading(rng));
            sum += v;
            sum_sq += v * v;
        }
        const double mean = sum / static_cast<double>(trials);
        const double var = std::max(0.0, sum_sq / static_cast<double>(trials) - mean * mean);
        fit.monte_carlo[k] = mean;
        fit.std_error[k] = std::sqrt(var / static_cast<double>(trials));
        fit.closed_form[k] = std::log2(1.0 + snr);
    });
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        num += fit.monte_carlo[k] * fit.closed_form[k];
        den += fit.closed_form[k] * fit.closed_form[k];
    }
    require(den > 0.0, ErrorCode::DegenerateFit, "all-zero closed form on grid");
    fit.scale = num / den;
    double err = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = fit.monte_carlo[k] - fit.scale * fit.closed_form[k];
        err += r * r;
    }
    fit.mse = err / static_cast<double>(n);
    return fit;
}

} // namespace sagsin
