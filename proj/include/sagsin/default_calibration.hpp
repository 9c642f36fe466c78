// SPDX-License-Identifier: Apache-2.0
#pragma once

// Mirrors data/calibration_default.json; a test keeps the two identical.
namespace sagsin {

inline constexpr const char* kDefaultCalibrationJson = R"json({
  "version": 1,
  "extrapolate": true,
  "bands": [
    {"band_km": 50, "a": 0.224, "p": 0.806},
    {"band_km": 100, "a": 0.170, "p": 0.805},
    {"band_km": 200, "a": 0.133, "p": 0.807},
    {"band_km": 400, "a": 0.102, "p": 0.807}
  ]
}
)json";

} // namespace sagsin
