#include <stdexcept>
#include <cmath>
#include <random>

#include "doctest.h"
#include "ecosom/fuelmodel.hpp"
#include "support/synthetic.hpp"

using namespace ecosom;
using namespace ecosom::testsupport;

TEST_CASE("vehicle defaults validate and speed-per-rpm rises with gear") {
    const auto p = VehicleParams::defaults();
    p.validate();
    for (std::size_t g = 1; g < p.gear_ratios.size(); ++g)
        CHECK(p.speed_per_rpm(static_cast<int>(g) + 1) > p.speed_per_rpm(static_cast<int>(g)));
}

TEST_CASE("infer_gear exact match, clutch fallback, scale invariance") {
    const auto p = VehicleParams::defaults();
    const double erpm = 2500.0;

    const double vs3 = erpm * p.speed_per_rpm(3);
    CHECK(infer_gear(vs3, erpm, p) == Gear{3});

    // midway between gears 3 and 4 (ratios differ by ~36%) is outside 4% of both
    const double vs_mid = erpm * 0.5 * (p.speed_per_rpm(3) + p.speed_per_rpm(4));
    CHECK(infer_gear(vs_mid, erpm, p) == std::nullopt);

    CHECK(infer_gear(2.0 * vs3, 2.0 * erpm, p) == Gear{3});
    CHECK_THROWS_AS(infer_gear(-1.0, erpm, p), std::invalid_argument);
    CHECK_THROWS_AS(infer_gear(50.0, 0.0, p), std::invalid_argument);
}

TEST_CASE("infer_gear is non-decreasing in speed at fixed rpm") {
    const auto p = VehicleParams::defaults();
    int last = 0;
    for (double vs = 1.0; vs < 180.0; vs += 0.25) {
        const Gear g = infer_gear(vs, 2200.0, p);
        if (g) {
            CHECK(*g >= last);
            last = *g;
        }
    }
    CHECK(last == static_cast<int>(p.gear_ratios.size()));
}

TEST_CASE("fuel_flow idle, cutoff, and monotone power response") {
    const auto p = VehicleParams::defaults();

    TelemetrySample stationary;
    stationary.vs = 0.0;
    stationary.erpm = p.idle_rpm;
    CHECK(fuel_flow(stationary, std::nullopt, p) == p.idle_flow_lph);
    CHECK(fuel_flow(stationary, Gear{1}, p) == p.idle_flow_lph);  // standstill

    TelemetrySample decel;
    decel.vs = 80.0;
    decel.erpm = 3000.0;
    decel.xacc = -1.5;  // strong overrun: demanded power is negative
    CHECK(fuel_flow(decel, Gear{3}, p) == 0.0);

    // clutch at speed: engine idles
    CHECK(fuel_flow(decel, std::nullopt, p) == p.idle_flow_lph);

    // flow strictly increases with demanded positive power
    double previous = 0.0;
    for (double a = 0.0; a <= 2.0; a += 0.25) {
        TelemetrySample s;
        s.vs = 90.0;
        s.erpm = 2500.0;
        s.xacc = a;
        const double flow = fuel_flow(s, Gear{4}, p);
        CHECK(flow > previous);
        previous = flow;
    }
}

TEST_CASE("fuel_flow is never negative") {
    const auto p = VehicleParams::defaults();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> vs(0.0, 160.0), acc(-3.0, 3.0), rpm(700.0, 4500.0);
    for (int i = 0; i < 2000; ++i) {
        TelemetrySample s;
        s.vs = vs(rng);
        s.erpm = rpm(rng);
        s.xacc = acc(rng);
        const Gear g = infer_gear(s.vs, s.erpm, p);
        CHECK(fuel_flow(s, g, p) >= 0.0);
    }
}

TEST_CASE("window_consumption unit arithmetic") {
    const std::vector<double> flows(16, 5.0);
    const std::vector<double> v100(16, 100.0);
    CHECK(window_consumption(flows, v100) == doctest::Approx(5.0));

    const std::vector<double> v200(16, 200.0);
    CHECK(window_consumption(flows, v200) == doctest::Approx(2.5));

    const std::vector<double> stopped(16, 0.0);
    CHECK_THROWS_AS(window_consumption(flows, stopped), std::invalid_argument);
}

TEST_CASE("window_consumption approximates the integral ratio at low speed variation") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.04, 0.04);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> flows(256), speeds(256);
        for (std::size_t i = 0; i < 256; ++i) {
            speeds[i] = 90.0 * (1.0 + u(rng));  // <10% variation
            flows[i] = 4.0 + u(rng);
        }
        // oracle: trapezoid-integrated liters / km over the window at 32 Hz
        const double dt_h = 1.0 / 32.0 / 3600.0;
        double liters = 0, km = 0;
        for (std::size_t i = 1; i < 256; ++i) {
            liters += 0.5 * (flows[i] + flows[i - 1]) * dt_h;
            km += 0.5 * (speeds[i] + speeds[i - 1]) * dt_h;
        }
        const double exact = liters / km * 100.0;
        const double approx = window_consumption(flows, speeds);
        CHECK(std::abs(approx - exact) / exact < 0.02);
    }
}

TEST_CASE("co2_per_km: stoichiometric constant, linearity, paper ratios") {
    const auto p = VehicleParams::defaults();
    // 48 CO2 molecules per 4 fuel molecules, from molar masses
    CHECK(co2_fuel_mass_ratio() == doctest::Approx(3.1564).epsilon(1e-4));

    CHECK(co2_per_km(0.0, p) == 0.0);

    // implementer's stoichiometric oracle: 4.46 L/100km at 835 g/L
    const double d1 = co2_per_km(4.46, p);
    const double d11 = co2_per_km(2.61, p);
    CHECK(d1 == doctest::Approx(117.6).epsilon(0.002));
    CHECK(d11 == doctest::Approx(68.8).epsilon(0.002));

    // the relative reduction is density- and stoichiometry-independent
    const double reduction = 100.0 * (d1 - d11) / d1;
    CHECK(reduction == doctest::Approx(100.0 * (4.46 - 2.61) / 4.46).epsilon(1e-12));
    CHECK(reduction == doctest::Approx(41.5).epsilon(0.005));

    // linear in consumption
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.1, 20.0);
    for (int i = 0; i < 100; ++i) {
        const double c = u(rng), a = u(rng) / 5.0;
        CHECK(co2_per_km(a * c, p) == doctest::Approx(a * co2_per_km(c, p)).epsilon(1e-12));
    }
}

TEST_CASE("simulate_session: steady cruise gives constant flow") {
    const auto p = VehicleParams::defaults();
    const auto session = make_style_session("d", smooth_style(), 60.0, 32.0, p);
    const auto trace = simulate_session(session, p);
    REQUIRE(trace.flow_lph.size() == session.samples.size());
    // smooth style: nearly constant speed -> moderate flow swing, no cutoff
    double lo = 1e9, hi = 0;
    for (double f : trace.flow_lph) {
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    CHECK(lo > 0.0);
    CHECK((hi - lo) / hi < 0.5);
    for (const auto& g : trace.gear) CHECK(g == Gear{5});
}

TEST_CASE("session liters match the trapezoid oracle") {
    const auto p = VehicleParams::defaults();
    const auto session = make_style_session("d", medium_style(), 120.0, 32.0, p);
    const auto trace = simulate_session(session, p);
    double trapezoid = 0;
    for (std::size_t i = 1; i < trace.flow_lph.size(); ++i)
        trapezoid += 0.5 * (trace.flow_lph[i] + trace.flow_lph[i - 1]) / 32.0 / 3600.0;
    const double total = trace.total_liters(32.0);
    // the flow steps at the cutoff transitions, so the two quadratures differ
    // by a per-crossing sliver
    CHECK(total == doctest::Approx(trapezoid).epsilon(0.01));
}

TEST_CASE("aggressive style burns at least 20% more per km than smooth") {
    const auto p = VehicleParams::defaults();
    const auto smooth = make_style_session("s", smooth_style(), 300.0, 32.0, p);
    const auto aggressive = make_style_session("a", aggressive_style(), 300.0, 32.0, p);
    const auto ts = simulate_session(smooth, p);
    const auto ta = simulate_session(aggressive, p);

    auto consumption = [](const TelemetrySession& s, const FuelTrace& t) {
        std::vector<double> speeds;
        for (const auto& x : s.samples) speeds.push_back(x.vs);
        return window_consumption(t.flow_lph, speeds);
    };
    const double cs = consumption(smooth, ts);
    const double ca = consumption(aggressive, ta);
    CHECK(ca >= 1.2 * cs);
}

TEST_CASE("session fuel totals are additive over concatenation") {
    const auto p = VehicleParams::defaults();
    const auto a = make_style_session("d", smooth_style(), 60.0, 32.0, p);
    auto b = make_style_session("d", aggressive_style(), 60.0, 32.0, p);

    TelemetrySession joined = a;
    for (auto s : b.samples) {
        s.t += 60.0;
        joined.samples.push_back(s);
    }
    const double whole = simulate_session(joined, p).total_liters(32.0);
    const double parts =
        simulate_session(a, p).total_liters(32.0) + simulate_session(b, p).total_liters(32.0);
    CHECK(whole == doctest::Approx(parts).epsilon(1e-9));
}

TEST_CASE("simulate_session reports reference-channel errors") {
    const auto p = VehicleParams::defaults();
    const auto session = make_style_session("d", smooth_style(), 30.0, 32.0, p);
    ReferenceChannels ref;
    for (const auto& s : session.samples) {
        ref.erpm.push_back(s.erpm * 1.02);   // 2% high
        ref.vs_kmh.push_back(s.vs * 0.996);  // 0.4% low
    }
    const auto trace = simulate_session(session, p, &ref);
    REQUIRE(trace.rpm_rel_err.has_value());
    REQUIRE(trace.speed_rel_err.has_value());
    CHECK(*trace.rpm_rel_err == doctest::Approx(0.02).epsilon(1e-9));
    CHECK(*trace.speed_rel_err == doctest::Approx(0.004).epsilon(1e-9));
}

TEST_CASE("attach_fuel_labels fills per-window consumption") {
    const auto p = VehicleParams::defaults();
    const auto session = make_style_session("d", medium_style(), 120.0, 32.0, p);
    const auto trace = simulate_session(session, p);
    auto windows = make_windows(session, 256, 128);
    REQUIRE(!windows.empty());
    attach_fuel_labels(windows, session, trace, 256);
    for (const auto& w : windows) {
        REQUIRE(w.fuel_l_per_100km.has_value());
        CHECK(*w.fuel_l_per_100km > 0.0);
        CHECK(*w.fuel_l_per_100km < 30.0);
    }
}

TEST_CASE("vehicle params JSON round-trip") {
    auto p = VehicleParams::defaults();
    p.mass_kg = 1357.0;
    p.gear_ratios = {12.0, 7.0, 5.0, 3.4};
    const std::string path = "vehicle_test.json";
    save_vehicle_params(path, p);
    const auto back = load_vehicle_params(path);
    CHECK(back.mass_kg == p.mass_kg);
    CHECK(back.gear_ratios == p.gear_ratios);
    CHECK(back.idle_flow_lph == p.idle_flow_lph);
    std::remove(path.c_str());
}
