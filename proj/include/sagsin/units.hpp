// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <numbers>

namespace sagsin {

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K
inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Pathloss is referenced to 1 m, so d^alpha is evaluated in metres.
inline constexpr double kPathlossReferenceKm = 1e-3;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

inline double path_gain(double distance_km, double alpha) {
    return std::pow(distance_km / kPathlossReferenceKm, -alpha);
}

} // namespace sagsin
