#include "ecosom/fuelmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace ecosom {

namespace {

constexpr double kGravity = 9.80665;      // m/s²
constexpr double kStandstillKmh = 0.5;    // below this the engine is treated as idling

// stoichiometric combustion of C12H23: 4 C12H23 + 71 O2 -> 48 CO2 + 46 H2O
constexpr double kMolarC = 12.011;
constexpr double kMolarH = 1.008;
constexpr double kMolarO = 15.999;
constexpr double kMolarFuel = 12.0 * kMolarC + 23.0 * kMolarH;
constexpr double kMolarCo2 = kMolarC + 2.0 * kMolarO;
constexpr double kCo2PerFuelMass = (48.0 * kMolarCo2) / (4.0 * kMolarFuel);

}  // namespace

double co2_fuel_mass_ratio() { return kCo2PerFuelMass; }

VehicleParams VehicleParams::defaults() {
    VehicleParams p;
    // compact diesel sedan, overall ratios = gearbox x final drive
    p.gear_ratios = {14.43, 7.93, 5.11, 3.75, 2.94, 2.40};
    p.wheel_radius_m = 0.30;
    p.mass_kg = 1280.0;
    p.idle_rpm = 850.0;
    p.idle_flow_lph = 0.70;
    p.willans_slope_lph_per_kw = 0.251;  // ~210 g/kWh at 835 g/L
    p.drag_area_coeff = 0.44;            // 0.5 * 1.20 kg/m3 * Cd 0.35 * A 2.1 m2
    p.rolling_coeff = 0.011;
    p.fuel_density_gpl = 835.0;
    p.rpm_match_tolerance = 0.04;
    return p;
}

double VehicleParams::speed_per_rpm(int gear) const {
    const auto idx = static_cast<std::size_t>(gear - 1);
    if (gear < 1 || idx >= gear_ratios.size())
        throw std::out_of_range("speed_per_rpm: gear out of range");
    // wheel circumference per engine rev, expressed in km/h per rpm
    return 2.0 * std::numbers::pi * wheel_radius_m / gear_ratios[idx] * 60.0 / 1000.0;
}

void VehicleParams::validate() const {
    if (gear_ratios.empty()) throw std::invalid_argument("vehicle: no gear ratios");
    for (std::size_t i = 1; i < gear_ratios.size(); ++i)
        if (gear_ratios[i] >= gear_ratios[i - 1])
            throw std::invalid_argument("vehicle: gear ratios must strictly decrease");
    for (double v : {wheel_radius_m, mass_kg, idle_rpm, idle_flow_lph, willans_slope_lph_per_kw,
                     drag_area_coeff, rolling_coeff, fuel_density_gpl, rpm_match_tolerance})
        if (v <= 0) throw std::invalid_argument("vehicle: all physical parameters must be positive");
}

Gear infer_gear(double vs_kmh, double erpm, const VehicleParams& params) {
    if (vs_kmh < 0) throw std::invalid_argument("infer_gear: negative speed");
    if (erpm <= 0) throw std::invalid_argument("infer_gear: rpm must be positive");
    const double observed = vs_kmh / erpm;
    int best_gear = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (int g = 1; g <= static_cast<int>(params.gear_ratios.size()); ++g) {
        const double expected = params.speed_per_rpm(g);
        const double err = std::abs(observed - expected) / expected;
        if (err < best_err) {
            best_err = err;
            best_gear = g;
        }
    }
    if (best_err <= params.rpm_match_tolerance) return best_gear;
    return std::nullopt;
}

double fuel_flow(const TelemetrySample& sample, Gear gear, const VehicleParams& params) {
    if (!gear || sample.vs < kStandstillKmh) return params.idle_flow_lph;

    const double v_ms = sample.vs / 3.6;
    const double force = params.mass_kg * sample.xacc + params.drag_area_coeff * v_ms * v_ms +
                         params.rolling_coeff * params.mass_kg * kGravity;
    const double power_kw = force * v_ms / 1000.0;

    if (power_kw < 0.0 && sample.erpm > params.idle_rpm) return 0.0;  // injection cutoff
    return params.idle_flow_lph + params.willans_slope_lph_per_kw * std::max(0.0, power_kw);
}

double window_consumption(std::span<const double> flows_lph,
                          std::span<const double> speeds_kmh) {
    if (flows_lph.empty() || flows_lph.size() != speeds_kmh.size())
        throw std::invalid_argument("window_consumption: bad input lengths");
    double flow_sum = 0, speed_sum = 0;
    for (std::size_t i = 0; i < flows_lph.size(); ++i) {
        flow_sum += flows_lph[i];
        speed_sum += speeds_kmh[i];
    }
    const double mean_speed = speed_sum / static_cast<double>(speeds_kmh.size());
    if (mean_speed <= 0) throw std::invalid_argument("window_consumption: zero mean speed");
    const double mean_flow = flow_sum / static_cast<double>(flows_lph.size());
    return mean_flow / mean_speed * 100.0;
}

double co2_per_km(double l_per_100km, const VehicleParams& params) {
    if (l_per_100km < 0) throw std::invalid_argument("co2_per_km: negative consumption");
    const double fuel_g_per_km = l_per_100km / 100.0 * params.fuel_density_gpl;
    return fuel_g_per_km * kCo2PerFuelMass;
}

double FuelTrace::total_liters(double rate_hz) const {
    if (rate_hz <= 0) throw std::invalid_argument("total_liters: bad rate");
    double sum = 0;
    for (double f : flow_lph) sum += f;
    return sum / 3600.0 / rate_hz;
}

FuelTrace simulate_session(const TelemetrySession& session, const VehicleParams& params,
                           const ReferenceChannels* reference) {
    params.validate();
    if (session.rate_hz <= 0)
        throw std::invalid_argument("simulate_session: session must be resampled first");

    FuelTrace trace;
    trace.gear.reserve(session.samples.size());
    trace.flow_lph.reserve(session.samples.size());
    for (const auto& s : session.samples) {
        const Gear g = s.erpm > 0 ? infer_gear(s.vs, s.erpm, params) : std::nullopt;
        trace.gear.push_back(g);
        trace.flow_lph.push_back(fuel_flow(s, g, params));
    }

    if (reference) {
        if (reference->erpm.size() != session.samples.size() ||
            reference->vs_kmh.size() != session.samples.size())
            throw std::invalid_argument("simulate_session: reference length mismatch");
        double rpm_err = 0, speed_err = 0;
        std::size_t rpm_n = 0, speed_n = 0;
        for (std::size_t i = 0; i < session.samples.size(); ++i) {
            const auto& s = session.samples[i];
            if (s.erpm > 1.0) {
                rpm_err += std::abs(reference->erpm[i] - s.erpm) / s.erpm;
                ++rpm_n;
            }
            if (s.vs > 1.0) {
                speed_err += std::abs(reference->vs_kmh[i] - s.vs) / s.vs;
                ++speed_n;
            }
        }
        if (rpm_n) trace.rpm_rel_err = rpm_err / static_cast<double>(rpm_n);
        if (speed_n) trace.speed_rel_err = speed_err / static_cast<double>(speed_n);
    }
    return trace;
}

void attach_fuel_labels(std::span<FeatureWindow> windows, const TelemetrySession& session,
                        const FuelTrace& trace, std::size_t window_size) {
    if (trace.flow_lph.size() != session.samples.size())
        throw std::invalid_argument("attach_fuel_labels: trace/session mismatch");
    std::vector<double> speeds(window_size);
    for (auto& w : windows) {
        if (w.start_index + window_size > session.samples.size())
            throw std::invalid_argument("attach_fuel_labels: window exceeds session");
        for (std::size_t i = 0; i < window_size; ++i)
            speeds[i] = session.samples[w.start_index + i].vs;
        w.fuel_l_per_100km = window_consumption(
            std::span(trace.flow_lph).subspan(w.start_index, window_size), speeds);
    }
}

VehicleParams load_vehicle_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vehicle params file: " + path);
    nlohmann::json j;
    in >> j;
    VehicleParams p = VehicleParams::defaults();
    if (j.contains("gear_ratios")) p.gear_ratios = j["gear_ratios"].get<std::vector<double>>();
    auto get = [&](const char* key, double& field) {
        if (j.contains(key)) field = j[key].get<double>();
    };
    get("wheel_radius_m", p.wheel_radius_m);
    get("mass_kg", p.mass_kg);
    get("idle_rpm", p.idle_rpm);
    get("idle_flow_lph", p.idle_flow_lph);
    get("willans_slope_lph_per_kw", p.willans_slope_lph_per_kw);
    get("drag_area_coeff", p.drag_area_coeff);
    get("rolling_coeff", p.rolling_coeff);
    get("fuel_density_gpl", p.fuel_density_gpl);
    get("rpm_match_tolerance", p.rpm_match_tolerance);
    p.validate();
    return p;
}

void save_vehicle_params(const std::string& path, const VehicleParams& p) {
    nlohmann::json j{{"gear_ratios", p.gear_ratios},
                     {"wheel_radius_m", p.wheel_radius_m},
                     {"mass_kg", p.mass_kg},
                     {"idle_rpm", p.idle_rpm},
                     {"idle_flow_lph", p.idle_flow_lph},
                     {"willans_slope_lph_per_kw", p.willans_slope_lph_per_kw},
                     {"drag_area_coeff", p.drag_area_coeff},
                     {"rolling_coeff", p.rolling_coeff},
                     {"fuel_density_gpl", p.fuel_density_gpl},
                     {"rpm_match_tolerance", p.rpm_match_tolerance}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write vehicle params file: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace ecosom
