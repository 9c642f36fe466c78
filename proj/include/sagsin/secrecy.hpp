// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sagsin/channel.hpp"
#include "sagsin/error.hpp"
#include "sagsin/parallel.hpp"
#include "sagsin/rng.hpp"
#include "sagsin/units.hpp"

namespace sagsin {

struct Hotspot {
    GeoPosition center;
    double radius_km = 0.0;
    double density_multiplier = 1.0;
    bool operator==(const Hotspot&) const = default;
};

struct CalibrationBand {
    double band_km = 0.0;
    double a = 1.0;
    double p = 1.0;
    bool operator==(const CalibrationBand&) const = default;
};

// Distance-banded (a, p) pairs with linear interpolation between bands.
class Calibration {
public:
    Calibration() = default;
    explicit Calibration(std::vector<CalibrationBand> bands, bool extrapolate = true)
        : bands_(std::move(bands)), extrapolate_(extrapolate) {
        std::sort(bands_.begin(), bands_.end(),
                  [](const CalibrationBand& x, const CalibrationBand& y) { return x.band_km < y.band_km; });
        for (const auto& b : bands_) {
            require(b.band_km > 0.0 && b.a > 0.0 && b.p > 0.0 && b.p < 2.0, ErrorCode::InvalidArgument,
                    "calibration band needs band_km > 0, a > 0, p in (0, 2)");
        }
    }

    const std::vector<CalibrationBand>& bands() const { return bands_; }
    bool extrapolate() const { return extrapolate_; }
    bool empty() const { return bands_.empty(); }
    bool operator==(const Calibration&) const = default;

    CalibrationBand at(double distance_km) const {
        require(!bands_.empty(), ErrorCode::MissingCalibration, "no calibration bands");
        const auto& lo = bands_.front();
        const auto& hi = bands_.back();
        if (distance_km <= lo.band_km || distance_km >= hi.band_km) {
            const bool exact = distance_km == lo.band_km || distance_km == hi.band_km;
            if (!exact && !extrapolate_) {
                fail(ErrorCode::MissingCalibration,
                     "distance " + std::to_string(distance_km) + " km outside calibrated bands");
            }
            auto b = distance_km <= lo.band_km ? lo : hi;
            b.band_km = distance_km;
            return b;
        }
        auto it = std::upper_bound(bands_.begin(), bands_.end(), distance_km,
                                   [](double d, const CalibrationBand& b) { return d < b.band_km; });
        const auto& right = *it;
        const auto& left = *(it - 1);
        const double w = (distance_km - left.band_km) / (right.band_km - left.band_km);
        return {distance_km, left.a + w * (right.a - left.a), left.p + w * (right.p - left.p)};
    }

private:
    std::vector<CalibrationBand> bands_;
    bool extrapolate_ = true;
};

struct EveField {
    PerLayer<double> density_per_layer;  // km^-2
    std::vector<Hotspot> hotspots;
    Calibration calibration;

    bool operator==(const EveField&) const = default;

    void validate() const {
        for (auto k : kAllLayers) {
            require(density_per_layer[k] > 0.0, ErrorCode::InvalidArgument, "eve densities must be positive");
        }
        for (const auto& h : hotspots) {
            h.center.validate();
            require(h.radius_km >= 0.0 && h.density_multiplier >= 1.0, ErrorCode::InvalidArgument,
                    "hotspot needs radius >= 0 and multiplier >= 1");
        }
    }

    // Base density of the transmitter's layer, raised by any hotspot that
    // overlaps the disk of radius `distance_km` around the transmitter.
    double effective_density(const NodeSpec& tx, double distance_km) const {
        double multiplier = 1.0;
        for (const auto& h : hotspots) {
            GeoPosition lifted = h.center;
            lifted.altitude_km = tx.position.altitude_km;
            if (chord_km(tx.position, lifted) <= distance_km + h.radius_km) {
                multiplier = std::max(multiplier, h.density_multiplier);
            }
        }
        return density_per_layer[tx.layer] * multiplier;
    }
};

struct FadingModel {
    enum class Kind { Rayleigh, Rician, ShadowedRician };
    Kind kind = Kind::Rayleigh;
    double k_db = 0.0;
    double m = 1.0;

    static FadingModel rayleigh() { return {}; }
    static FadingModel rician(double k_db) { return {Kind::Rician, k_db, 1.0}; }
    static FadingModel shadowed_rician(double k_db, double m) {
        require(m >= 0.5, ErrorCode::InvalidArgument, "shadowed-Rician shape m must be >= 0.5");
        return {Kind::ShadowedRician, k_db, m};
    }

    // Unit-mean channel power sample.
    double sample(Rng& rng) const {
        if (kind == Kind::Rayleigh) return std::exponential_distribution<double>(1.0)(rng);
        const double k = db_to_linear(k_db);
        const double spread = std::sqrt(0.5 / (k + 1.0));
        std::normal_distribution<double> normal(0.0, 1.0);
        double los = std::sqrt(k / (k + 1.0));
        if (kind == Kind::ShadowedRician) {
            const double omega = k / (k + 1.0);
            los = std::sqrt(std::gamma_distribution<double>(m, omega / m)(rng));
        }
        const double re = los + spread * normal(rng);
        const double im = spread * normal(rng);
        return re * re + im * im;
    }
};

struct SpscQuery {
    double distance_km = 1.0;
    double alpha = 2.8;
    double lambda_eve = 1e-5;
    double sigma = 0.0;
    double gain_linear = 1.0;
    double noise_psd = 1.0;

    void validate() const {
        require(alpha > 2.0, ErrorCode::FreeSpaceDivergence, "SPSC diverges for alpha <= 2");
        require(distance_km > 0.0, ErrorCode::ZeroDistance, "SPSC distance must be positive");
        require(lambda_eve > 0.0 && sigma >= 0.0 && gain_linear > 0.0 && noise_psd > 0.0,
                ErrorCode::InvalidArgument, "SPSC query needs lambda > 0, sigma >= 0, gain > 0, noise > 0");
    }
};

enum class SpscModel { ClosedForm, Calibrated };

inline double kappa(double lambda, double alpha) { return lambda * (2.0 * kPi / alpha) * std::tgamma(2.0 / alpha); }

// sigma * G / (n0 d^alpha): jamming-to-noise ratio seen by an Eve at the
// legitimate distance with unit fading.
inline double jamming_ratio(const SpscQuery& q) {
    return q.sigma * q.gain_linear * path_gain(q.distance_km, q.alpha) / q.noise_psd;
}

inline double spsc_bracket(const SpscQuery& q) {
    const double a = q.alpha;
    return std::tgamma(1.0 - 2.0 / a) - (2.0 * jamming_ratio(q) / a) * std::tgamma(2.0 - 2.0 / a);
}

inline double spsc_with_kappa(const SpscQuery& q, double kappa_eff) {
    q.validate();
    const double exponent = -kappa_eff * spsc_bracket(q) * q.distance_km * q.distance_km;
    return std::clamp(std::exp(exponent), 0.0, 1.0);
}

inline double spsc_closed_form(const SpscQuery& q) {
    q.validate();
    return spsc_with_kappa(q, kappa(q.lambda_eve, q.alpha));
}

inline double calibrated_kappa(const SpscQuery& q, const Calibration& cal) {
    const auto band = cal.at(q.distance_km);
    return band.a * std::pow(kappa(q.lambda_eve, q.alpha), band.p);
}

inline double spsc_calibrated(const SpscQuery& q, const Calibration& cal) {
    q.validate();
    return spsc_with_kappa(q, calibrated_kappa(q, cal));
}

inline double spsc_calibrated(const SpscQuery& q, const EveField& field) { return spsc_calibrated(q, field.calibration); }

inline double spsc_model(const SpscQuery& q, SpscModel model, const Calibration& cal) {
    return model == SpscModel::Calibrated ? spsc_calibrated(q, cal) : spsc_closed_form(q);
}

inline double default_region_radius(double distance_km) { return std::max(10.0 * distance_km, 2000.0); }

struct MonteCarloEstimate {
    double probability = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
};

namespace detail {

inline constexpr std::size_t kTrialBlock = 4096;

inline void check_monte_carlo(const SpscQuery& q, std::size_t trials, double region_radius_km) {
    q.validate();
    require(trials >= 1000, ErrorCode::InsufficientTrials, "Monte-Carlo SPSC needs at least 1e3 trials");
    require(region_radius_km >= 10.0 * q.distance_km, ErrorCode::InvalidRegion,
            "Eve region radius must be at least 10x the link distance");
}

// Per-unit-power SINR y/(sigma y + 1), safe for y = inf.
inline double unit_sinr(double y, double sigma) { return 1.0 / (sigma + 1.0 / y); }

template <class PerBlock>
void for_each_block(std::size_t trials, PerBlock&& fn) {
    const std::size_t blocks = (trials + kTrialBlock - 1) / kTrialBlock;
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t begin = b * kTrialBlock;
        fn(b, begin, std::min(trials, begin + kTrialBlock));
    });
}

} // namespace detail

inline MonteCarloEstimate spsc_monte_carlo(const SpscQuery& q, const FadingModel& fading, std::size_t trials,
                                           double region_radius_km, std::uint64_t seed) {
    detail::check_monte_carlo(q, trials, region_radius_km);
    const double legit_scale = q.gain_linear * path_gain(q.distance_km, q.alpha) / q.noise_psd;
    const double eve_scale = q.gain_linear / q.noise_psd;
    const double mean_eves = q.lambda_eve * kPi * region_radius_km * region_radius_km;
    const std::size_t blocks = (trials + detail::kTrialBlock - 1) / detail::kTrialBlock;
    std::vector<std::size_t> successes(blocks, 0);
    detail::for_each_block(trials, [&](std::size_t b, std::size_t begin, std::size_t end) {
        Rng rng = make_stream(seed, b);
        std::poisson_distribution<long long> eve_count(mean_eves);
        std::size_t ok = 0;
        for (std::size_t t = begin; t < end; ++t) {
            const double legit = legit_scale * fading.sample(rng);
            const long long n = mean_eves > 0.0 ? eve_count(rng) : 0;
            bool secure = true;
            for (long long e = 0; e < n && secure; ++e) {
                const double r = region_radius_km * std::sqrt(uniform01(rng));
                const double y = eve_scale * fading.sample(rng) * path_gain(r, q.alpha);
                if (!(legit > detail::unit_sinr(y, q.sigma))) secure = false;
            }
            ok += secure ? 1 : 0;
        }
        successes[b] = ok;
    });
    std::size_t total = 0;
    for (auto s : successes) total += s;
    const double p = static_cast<double>(total) / static_cast<double>(trials);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials)), trials};
}

// Per-trial legitimate SNR and strongest Eve SNR (both per unit transmit
// power, jamming excluded). Success at jamming level sigma is
// legit > y / (sigma y + 1), so one draw serves every sigma.
struct WiretapSamples {
    std::vector<double> legit;
    std::vector<double> strongest_eve;  // 0 when no Eve was drawn

    double spsc(double sigma) const {
        std::size_t ok = 0;
        for (std::size_t t = 0; t < legit.size(); ++t) {
            if (strongest_eve[t] == 0.0 || legit[t] > detail::unit_sinr(strongest_eve[t], sigma)) ++ok;
        }
        return static_cast<double>(ok) / static_cast<double>(legit.size());
    }
};

inline WiretapSamples draw_wiretap_samples(const SpscQuery& q, const FadingModel& fading, std::size_t trials,
                                           double region_radius_km, std::uint64_t seed) {
    detail::check_monte_carlo(q, trials, region_radius_km);
    const double legit_scale = q.gain_linear * path_gain(q.distance_km, q.alpha) / q.noise_psd;
    const double eve_scale = q.gain_linear / q.noise_psd;
    const double mean_eves = q.lambda_eve * kPi * region_radius_km * region_radius_km;
    WiretapSamples out;
    out.legit.resize(trials);
    out.strongest_eve.resize(trials);
    detail::for_each_block(trials, [&](std::size_t b, std::size_t begin, std::size_t end) {
        Rng rng = make_stream(seed, b, 1);
        std::poisson_distribution<long long> eve_count(mean_eves);
        for (std::size_t t = begin; t < end; ++t) {
            out.legit[t] = legit_scale * fading.sample(rng);
            const long long n = mean_eves > 0.0 ? eve_count(rng) : 0;
            double strongest = 0.0;
            for (long long e = 0; e < n; ++e) {
                const double r = region_radius_km * std::sqrt(uniform01(rng));
                strongest = std::max(strongest, eve_scale * fading.sample(rng) * path_gain(r, q.alpha));
            }
            out.strongest_eve[t] = strongest;
        }
    });
    return out;
}

// Smallest jamming PSD whose Monte-Carlo SPSC reaches tau; geometric
// bisection to `rel_tol`. Returns +inf when no finite jamming suffices.
inline double min_jamming_monte_carlo(const SpscQuery& q, const FadingModel& fading, std::size_t trials,
                                      double region_radius_km, std::uint64_t seed, double tau,
                                      double rel_tol = 1e-3) {
    require(tau > 0.0 && tau < 1.0, ErrorCode::InvalidArgument, "tau must lie in (0, 1)");
    const auto samples = draw_wiretap_samples(q, fading, trials, region_radius_km, seed);
    if (samples.spsc(0.0) >= tau) return 0.0;
    // Jamming that makes the Eve-side ratio one at the legitimate distance.
    double hi = q.noise_psd / (q.gain_linear * path_gain(q.distance_km, q.alpha));
    int grow = 0;
    while (samples.spsc(hi) < tau) {
        hi *= 10.0;
        if (++grow > 60) return kInf;
    }
    double lo = hi / 10.0;
    if (grow == 0) {
        while (lo > 0.0 && samples.spsc(lo) >= tau) {
            hi = lo;
            lo /= 10.0;
        }
    }
    while (hi / lo - 1.0 > rel_tol) {
        const double mid = std::sqrt(lo * hi);
        (samples.spsc(mid) >= tau ? hi : lo) = mid;
    }
    return hi;
}

// Jamming PSD at which the exponential SPSC form with effective kappa
// equals tau; zero when tau is met without jamming.
inline double min_jamming_for_kappa(const SpscQuery& q, double kappa_eff, double tau) {
    require(tau > 0.0 && tau < 1.0, ErrorCode::InvalidArgument, "tau must lie in (0, 1)");
    q.validate();
    const double a = q.alpha;
    const double d2 = q.distance_km * q.distance_km;
    const double base = a / (2.0 * (1.0 - 2.0 / a));
    const double ratio = base * (1.0 + std::log(tau) / (kappa_eff * d2 * std::tgamma(1.0 - 2.0 / a)));
    const double unit = q.noise_psd / (q.gain_linear * path_gain(q.distance_km, a));
    return std::max(0.0, ratio * unit);
}

inline double min_jamming_closed_form(double distance_km, double alpha, double lambda_eve, double gain_linear,
                                      double noise_psd, double tau) {
    SpscQuery q{distance_km, alpha, lambda_eve, 0.0, gain_linear, noise_psd};
    return min_jamming_for_kappa(q, kappa(lambda_eve, alpha), tau);
}

inline double min_jamming_calibrated(double distance_km, double alpha, double lambda_eve, double gain_linear,
                                     double noise_psd, double tau, const Calibration& cal) {
    SpscQuery q{distance_km, alpha, lambda_eve, 0.0, gain_linear, noise_psd};
    return min_jamming_for_kappa(q, calibrated_kappa(q, cal), tau);
}

inline double min_jamming(const SpscQuery& q, double tau, SpscModel model, const Calibration& cal) {
    const double k = model == SpscModel::Calibrated ? calibrated_kappa(q, cal) : kappa(q.lambda_eve, q.alpha);
    return min_jamming_for_kappa(q, k, tau);
}

struct DistanceSearch {
    double tol_km = 0.1;
    double max_km = 20000.0;
    SpscModel model = SpscModel::Calibrated;
};

// Farthest distance at which a transmitter spending its whole jamming
// budget still meets tau toward a receiver with the given gain and noise.
inline double max_link_distance(const NodeSpec& tx, double gain_linear, double noise_psd, const EveField& field,
                                double tau, const DistanceSearch& search = {}) {
    require(tau > 0.0 && tau < 1.0, ErrorCode::InvalidArgument, "tau must lie in (0, 1)");
    auto secure_at = [&](double d) {
        SpscQuery q{d, tx.alpha, field.effective_density(tx, d), tx.jamming_budget_psd(), gain_linear, noise_psd};
        return spsc_model(q, search.model, field.calibration) >= tau;
    };
    if (secure_at(search.max_km)) return kInf;
    double lo = 0.0, hi = search.max_km;
    while (hi - lo > search.tol_km) {
        const double mid = 0.5 * (lo + hi);
        (secure_at(mid) ? lo : hi) = mid;
    }
    return lo;
}

inline double max_link_distance(const NodeSpec& tx, const NodeSpec& rx, const EveField& field, double tau,
                                const DistanceSearch& search = {}) {
    return max_link_distance(tx, link_gain(tx, rx), noise_psd(rx, tx.layer), field, tau, search);
}

// Upper bound on exact-minus-closed-form SPSC. Above alpha = 4 it uses the
// second moment of the Eve interference functional; at or below 4 the
// truncated-plane estimate evaluated at alpha = 4 with region radius R.
inline double jensen_gap_bound(const SpscQuery& q, double region_radius_km) {
    q.validate();
    const double a = q.alpha;
    const double d = q.distance_km;
    const double lam = q.lambda_eve;
    const double beta = jamming_ratio(q);
    if (a > 4.0) {
        const double scale = (2.0 * kPi / a) * std::tgamma(2.0 / a) * d * d;
        const double moment =
            scale * scale * (std::tgamma(1.0 - 4.0 / a) - (4.0 * beta / a) * std::tgamma(2.0 - 4.0 / a));
        return 0.5 * lam * lam * std::max(0.0, moment);
    }
    require(region_radius_km > 0.0, ErrorCode::InvalidRegion, "region radius must be positive");
    const double residual = beta < 1.0 ? 1.0 - beta : 1.0;
    const double inv_c = std::pow(d, 4.0) * residual;
    const double var = kPi * kPi * kPi * inv_c * std::log(region_radius_km) - std::pow(kPi, 4) * inv_c / 4.0;
    return 0.5 * lam * lam * std::max(0.0, var);
}

struct CalibrationCell {
    double lambda_eve = 0.0;
    double probability = 0.0;
};

// Least squares of ln(-ln P) - ln(bracket d^2) = ln a + p ln kappa over cells.
inline CalibrationBand fit_calibration_band(const SpscQuery& at_distance, std::span<const CalibrationCell> cells) {
    const double bracket = spsc_bracket(at_distance);
    require(bracket > 0.0, ErrorCode::DegenerateFit, "jamming removes the exponent; nothing to fit");
    const double offset = std::log(bracket * at_distance.distance_km * at_distance.distance_km);
    std::vector<double> xs, ys;
    for (const auto& c : cells) {
        if (!(c.probability > 0.0) || c.probability >= 1.0 - 1e-6) continue;
        xs.push_back(std::log(kappa(c.lambda_eve, at_distance.alpha)));
        ys.push_back(std::log(-std::log(c.probability)) - offset);
    }
    require(xs.size() >= 3, ErrorCode::DegenerateFit,
            "fewer than 3 usable cells at " + std::to_string(at_distance.distance_km) + " km");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sx += xs[k];
        sy += ys[k];
        sxx += xs[k] * xs[k];
        sxy += xs[k] * ys[k];
    }
    const double det = n * sxx - sx * sx;
    require(std::abs(det) > 1e-12, ErrorCode::DegenerateFit, "lambda grid too narrow to fit");
    const double p = (n * sxy - sx * sy) / det;
    const double ln_a = (sy - p * sx) / n;
    return {at_distance.distance_km, std::exp(ln_a), p};
}

inline Calibration calibrate(const SpscQuery& reference, const FadingModel& fading,
                             std::span<const double> distance_bands_km, std::span<const double> lambda_grid,
                             std::size_t trials, std::uint64_t seed) {
    require(trials >= 10000, ErrorCode::InsufficientTrials, "calibration needs at least 1e4 trials per cell");
    std::vector<CalibrationBand> bands;
    for (std::size_t b = 0; b < distance_bands_km.size(); ++b) {
        SpscQuery q = reference;
        q.distance_km = distance_bands_km[b];
        std::vector<CalibrationCell> cells;
        for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
            q.lambda_eve = lambda_grid[k];
            const auto est = spsc_monte_carlo(q, fading, trials, default_region_radius(q.distance_km),
                                              seed + 1000003ull * b + k);
            cells.push_back({lambda_grid[k], est.probability});
        }
        bands.push_back(fit_calibration_band(q, cells));
    }
    return Calibration(std::move(bands));
}

} // namespace sagsin
