#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecosom/fuelmodel.hpp"
#include "ecosom/somanalysis.hpp"
#include "ecosom/somcore.hpp"

namespace ecosom {

/// Advice text per cluster label; exact table strings, keyed by scheme (3 or 5).
const std::map<std::string, std::string>& advice_table(int scheme);

/// Throws on a label unknown to the scheme.
std::string advise(const std::string& label, int scheme);

struct ClassifyResult {
    std::string label;
    int cluster_id = 0;
    std::size_t bmu = 0;
    bool clamped = false;  // input fell outside the training range
};

/// Label of the BMU's cluster; out-of-range features are clamped into the
/// normalized range before the BMU search and the clamp is flagged.
ClassifyResult classify_window(const SomModel& model, const ClusterMap& clusters,
                               const FeatureVector& v);

struct IntervalEvaluation {
    std::map<std::string, double> distribution;  // label -> percent
    std::string dominant;
};

/// Label percentages over the given windows; dominant is the maximum share,
/// ties broken toward the higher-consumption label. Throws on empty input.
IntervalEvaluation evaluate_interval(const ClusterMap& clusters, const SomModel& model,
                                     std::span<const FeatureWindow> windows);

/// 100·(avg_current - avg_target)/avg_current against the adjacent
/// lower-consumption cluster; 0 for the lowest cluster.
double expected_reduction(const std::string& label, const ClusterMap& clusters);

struct AdvisorConfig {
    double interval_s = 100.0;
    double min_mean_speed_kmh = 60.0;
    std::size_t window_size = 256;
    std::size_t shift = 128;
};

struct IntervalReport {
    std::string driver_id;
    double t0 = 0.0;
    double t1 = 0.0;
    std::map<std::string, double> distribution;
    std::string dominant;
    std::string advice;
    double expected_reduction_pct = 0.0;
    double l100km = 0.0;
    double co2_gpkm = 0.0;
    bool clamped_any = false;
};

struct SessionReport {
    std::vector<IntervalReport> intervals;
    std::optional<IntervalReport> rollup;  // whole-session aggregate
    std::string status;                    // explanatory when no interval qualifies
};

/// One report per interval_s stretch whose windows pass the speed filter,
/// plus a whole-session rollup with fuel and CO2 summaries.
SessionReport session_report(const TelemetrySession& session, const SomModel& model,
                             const ClusterMap& clusters, const VehicleParams& vehicle,
                             const AdvisorConfig& config = {});

/// JSON lines, one object per interval:
///   {driver, t0, t1, dist:{label:pct}, dominant, advice,
///    expected_reduction_pct, l100km, co2_gpkm}
void write_report_jsonl(std::ostream& out, const SessionReport& report);

}  // namespace ecosom
