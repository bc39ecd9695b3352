#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ecosom {

/// One telemetry record. Times are seconds from session start; channels keep
/// their bus units (km/h, percent, rev/min, raw pressure counts, m/s², deg).
struct TelemetrySample {
    double t = 0.0;
    double vs = 0.0;    // vehicle speed, km/h
    double pgp = 0.0;   // percent gas pedal, 0..100
    double erpm = 0.0;  // engine speed, rev/min
    double gp = 0.0;    // gas-pedal pressure, sensor units
    double bp = 0.0;    // brake-pedal pressure, sensor units
    double xacc = 0.0;  // longitudinal acceleration, m/s²
    double swa = 0.0;   // steering wheel angle, deg (carried, unused downstream)
};

/// Time-ordered samples for one driver/session. rate_hz is 0 until the
/// session has been resampled onto a uniform clock.
struct TelemetrySession {
    std::string driver_id;
    std::string session_id;
    double rate_hz = 0.0;
    std::vector<TelemetrySample> samples;
};

/// Half-open sample index range [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Parses the documented CSV schema
///   t_s, vs_kmh, pgp_pct, erpm, gp_raw, bp_raw, xacc_ms2, swa_deg, driver_id, session_id
/// (header mandatory, extra columns ignored) and groups rows into sessions by
/// (driver_id, session_id) in first-appearance order. Throws std::runtime_error
/// naming the offending row/column for malformed rows, missing mandatory
/// columns, or non-monotonic timestamps within a session.
std::vector<TelemetrySession> parse_sessions(std::istream& source);

/// Single-session convenience wrapper; throws if the stream holds anything
/// other than exactly one session.
TelemetrySession parse_session(std::istream& source);

void write_session_csv(std::ostream& out, const TelemetrySession& session);

/// Resamples every channel onto the uniform clock t0 + k/target_hz by linear
/// interpolation. Output spacing is exactly 1/target_hz and the output span
/// trails the input span by less than one output period. Throws on sessions
/// with fewer than two samples or target_hz <= 0.
TelemetrySession resample(const TelemetrySession& session, double target_hz);

struct SignSplit {
    std::vector<double> pos;  // max(0, x)
    std::vector<double> neg;  // min(0, x)
};

/// Splits a series into its positive and negative parts; pos + neg == input.
SignSplit split_xacc(std::span<const double> xacc);

/// Maximal contiguous runs of feature-grid windows whose mean speed meets the
/// threshold, reported as sample ranges. The window grid matches feature
/// extraction (window_s seconds, 50% shift) so filtering and feature windows
/// align 1:1.
std::vector<IndexRange> filter_highspeed_segments(const TelemetrySession& session,
                                                  double min_mean_speed_kmh,
                                                  double window_s);

}  // namespace ecosom
