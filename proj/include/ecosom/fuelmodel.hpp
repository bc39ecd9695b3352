#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecosom/features.hpp"
#include "ecosom/telemetry.hpp"

namespace ecosom {

/// Gear selection: a 1-based gear index, or std::nullopt when the speed/rpm
/// ratio matches no gear (driver on the clutch).
using Gear = std::optional<int>;

struct VehicleParams {
    /// Overall drive ratios (engine revs per wheel rev, final drive included),
    /// strictly decreasing with gear number so speed-per-rpm strictly rises.
    std::vector<double> gear_ratios;
    double wheel_radius_m = 0.0;
    double mass_kg = 0.0;
    double idle_rpm = 0.0;
    double idle_flow_lph = 0.0;            // fuel flow at idle, L/h
    double willans_slope_lph_per_kw = 0.0; // affine fuel-vs-power slope
    double drag_area_coeff = 0.0;          // 0.5·rho·Cd·A, N per (m/s)²
    double rolling_coeff = 0.0;            // Crr
    double fuel_density_gpl = 0.0;         // g/L
    double rpm_match_tolerance = 0.0;      // relative, for gear inference

    /// Representative compact-diesel defaults (the instrumented sedan's exact
    /// calibration is not published).
    static VehicleParams defaults();

    /// km/h per engine rpm in the given 1-based gear.
    double speed_per_rpm(int gear) const;

    void validate() const;  // throws std::invalid_argument on bad parameters
};

/// CO2 mass produced per unit fuel mass under stoichiometric combustion of
/// C12H23, computed from molar masses (C 12.011, H 1.008, O 15.999).
double co2_fuel_mass_ratio();

/// Matches the sample's speed/rpm ratio against each gear within
/// rpm_match_tolerance; the closest match wins, no match means clutch.
/// Throws on vs < 0 or erpm <= 0.
Gear infer_gear(double vs_kmh, double erpm, const VehicleParams& params);

/// Willans-line surrogate fuel flow in L/h:
///   clutch or standstill            -> idle_flow
///   engaged, power < 0, rpm > idle  -> 0 (injection cutoff)
///   otherwise                       -> idle_flow + slope · max(0, power kW)
/// where power is the longitudinal demand from acceleration, rolling and
/// aerodynamic terms.
double fuel_flow(const TelemetrySample& sample, Gear gear, const VehicleParams& params);

/// (mean flow L/h) / (mean speed km/h) · 100; throws on zero mean speed.
double window_consumption(std::span<const double> flows_lph, std::span<const double> speeds_kmh);

/// Grams of CO2 per km for a consumption in L/100km; linear in consumption.
double co2_per_km(double l_per_100km, const VehicleParams& params);

/// Optional externally-simulated channels to validate against the session's
/// measured ones.
struct ReferenceChannels {
    std::vector<double> erpm;
    std::vector<double> vs_kmh;
};

struct FuelTrace {
    std::vector<Gear> gear;         // per sample
    std::vector<double> flow_lph;   // per sample
    std::optional<double> rpm_rel_err;    // mean relative error vs reference
    std::optional<double> speed_rel_err;

    double total_liters(double rate_hz) const;
};

/// Per-sample gear inference and fuel flow over a resampled session. When
/// reference channels are supplied their mean relative errors against the
/// session's measured rpm/speed are reported.
FuelTrace simulate_session(const TelemetrySession& session, const VehicleParams& params,
                           const ReferenceChannels* reference = nullptr);

/// Fills each window's fuel_l_per_100km from the trace via window_consumption.
void attach_fuel_labels(std::span<FeatureWindow> windows, const TelemetrySession& session,
                        const FuelTrace& trace, std::size_t window_size);

VehicleParams load_vehicle_params(const std::string& path);  // JSON key-value file
void save_vehicle_params(const std::string& path, const VehicleParams& params);

}  // namespace ecosom
