#include "ecosom/advisor.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace ecosom {

const std::map<std::string, std::string>& advice_table(int scheme) {
    static const std::map<std::string, std::string> three{
        {"Very low", "Keep driving style"},
        {"Low", "Lower RPM/Switch to a higher gear"},
        {"Medium-High", "Lower RPM/Keep gas steady/Lower PGP"},
    };
    static const std::map<std::string, std::string> five{
        {"Very low", "Keep driving style"},
        {"Low", "Lower RPM/Switch to a higher gear"},
        {"Medium", "Lower RPM/Operate gas softly"},
        {"High", "Lower PGP/Lower RPM"},
        {"Very high", "Lower PGP/Keep gas steady"},
    };
    if (scheme == 3) return three;
    if (scheme == 5) return five;
    throw std::invalid_argument("advice_table: scheme must be 3 or 5");
}

std::string advise(const std::string& label, int scheme) {
    const auto& table = advice_table(scheme);
    const auto it = table.find(label);
    if (it == table.end())
        throw std::invalid_argument("advise: label '" + label + "' unknown to the " +
                                    std::to_string(scheme) + "-cluster scheme");
    return it->second;
}

ClassifyResult classify_window(const SomModel& model, const ClusterMap& clusters,
                               const FeatureVector& v) {
    auto arr = v.to_array();
    std::vector<double> raw(arr.begin(), arr.end());
    bool clamped = false;
    const auto x = model.scaler.empty() ? raw : model.scaler.normalize_clamped(raw, &clamped);
    const std::size_t bmu = find_bmu(model, x).index;
    const auto& cluster = clusters.cluster_of_neuron(bmu);
    return {cluster.label, cluster.id, bmu, clamped};
}

IntervalEvaluation evaluate_interval(const ClusterMap& clusters, const SomModel& model,
                                     std::span<const FeatureWindow> windows) {
    if (windows.empty()) throw std::invalid_argument("evaluate_interval: empty interval");
    IntervalEvaluation ev;
    ev.distribution = driver_distribution(clusters, model, windows);

    // dominant label: max share, ties toward the higher-consumption cluster
    double best_pct = -1.0;
    double best_avg = -1.0;
    for (const auto& c : clusters.clusters) {
        const double pct = ev.distribution.at(c.label);
        if (pct > best_pct || (pct == best_pct && c.fuel_avg > best_avg)) {
            best_pct = pct;
            best_avg = c.fuel_avg;
            ev.dominant = c.label;
        }
    }
    return ev;
}

double expected_reduction(const std::string& label, const ClusterMap& clusters) {
    const Cluster* current = clusters.find_label(label);
    if (!current) throw std::invalid_argument("expected_reduction: unknown label '" + label + "'");
    const Cluster* target = nullptr;  // adjacent lower-consumption cluster
    for (const auto& c : clusters.clusters) {
        if (c.fuel_avg < current->fuel_avg && (!target || c.fuel_avg > target->fuel_avg))
            target = &c;
    }
    if (!target) return 0.0;
    return 100.0 * (current->fuel_avg - target->fuel_avg) / current->fuel_avg;
}

SessionReport session_report(const TelemetrySession& session, const SomModel& model,
                             const ClusterMap& clusters, const VehicleParams& vehicle,
                             const AdvisorConfig& config) {
    if (session.rate_hz <= 0)
        throw std::invalid_argument("session_report: session must be resampled first");
    const int scheme = static_cast<int>(clusters.clusters.size());

    auto windows = make_windows(session, config.window_size, config.shift);
    const auto trace = simulate_session(session, vehicle);
    attach_fuel_labels(windows, session, trace, config.window_size);

    std::vector<FeatureWindow> qualifying;
    for (auto& w : windows)
        if (w.mean_speed >= config.min_mean_speed_kmh) qualifying.push_back(w);

    SessionReport report;
    if (qualifying.empty()) {
        report.status = "no interval qualifies: session mean speed stays below " +
                        std::to_string(config.min_mean_speed_kmh) + " km/h";
        return report;
    }

    auto build_report = [&](std::span<const FeatureWindow> ws, double t0, double t1,
                            IndexRange samples) {
        IntervalReport r;
        r.driver_id = session.driver_id;
        r.t0 = t0;
        r.t1 = t1;
        const auto ev = evaluate_interval(clusters, model, ws);
        r.distribution = ev.distribution;
        r.dominant = ev.dominant;
        r.advice = advise(ev.dominant, scheme);
        r.expected_reduction_pct = expected_reduction(ev.dominant, clusters);
        std::vector<double> flows, speeds;
        for (std::size_t i = samples.begin; i < samples.end; ++i) {
            flows.push_back(trace.flow_lph[i]);
            speeds.push_back(session.samples[i].vs);
        }
        r.l100km = window_consumption(flows, speeds);
        r.co2_gpkm = co2_per_km(r.l100km, vehicle);
        for (const auto& w : ws) {
            auto arr = w.vector.to_array();
            std::vector<double> raw(arr.begin(), arr.end());
            bool clamped = false;
            if (!model.scaler.empty()) model.scaler.normalize_clamped(raw, &clamped);
            r.clamped_any = r.clamped_any || clamped;
        }
        return r;
    };

    const double t_start = session.samples.front().t;
    std::map<std::size_t, std::vector<FeatureWindow>> by_interval;
    for (const auto& w : qualifying) {
        const double t = t_start + static_cast<double>(w.start_index) / session.rate_hz;
        by_interval[static_cast<std::size_t>(std::floor((t - t_start) / config.interval_s))]
            .push_back(w);
    }
    for (const auto& [k, ws] : by_interval) {
        const double t0 = t_start + static_cast<double>(k) * config.interval_s;
        IndexRange span{ws.front().start_index, ws.back().start_index + config.window_size};
        report.intervals.push_back(build_report(ws, t0, t0 + config.interval_s, span));
    }

    IndexRange whole{qualifying.front().start_index,
                     qualifying.back().start_index + config.window_size};
    report.rollup = build_report(qualifying, t_start,
                                 t_start + static_cast<double>(session.samples.size() - 1) /
                                               session.rate_hz,
                                 whole);
    report.status = "ok";
    return report;
}

void write_report_jsonl(std::ostream& out, const SessionReport& report) {
    auto to_json = [](const IntervalReport& r) {
        nlohmann::ordered_json j;
        j["driver"] = r.driver_id;
        j["t0"] = r.t0;
        j["t1"] = r.t1;
        j["dist"] = r.distribution;
        j["dominant"] = r.dominant;
        j["advice"] = r.advice;
        j["expected_reduction_pct"] = r.expected_reduction_pct;
        j["l100km"] = r.l100km;
        j["co2_gpkm"] = r.co2_gpkm;
        if (r.clamped_any) j["clamped"] = true;
        return j;
    };
    for (const auto& r : report.intervals) out << to_json(r).dump() << '\n';
    if (report.rollup) {
        auto j = to_json(*report.rollup);
        j["rollup"] = true;
        out << j.dump() << '\n';
    }
    if (!report.status.empty() && report.status != "ok")
        out << nlohmann::ordered_json{{"status", report.status}}.dump() << '\n';
}

}  // namespace ecosom
