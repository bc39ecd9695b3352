#include "ecosom/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ecosom {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim surrounding whitespace
        auto b = field.find_first_not_of(" \t\r");
        auto e = field.find_last_not_of(" \t\r");
        fields.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_number(const std::string& s, std::size_t row, const std::string& col) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing garbage");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("malformed row " + std::to_string(row) + ": column '" + col +
                                 "' value '" + s + "' is not a number");
    }
}

constexpr const char* kNumericColumns[] = {"t_s",    "vs_kmh", "pgp_pct", "erpm",
                                           "gp_raw", "bp_raw", "xacc_ms2", "swa_deg"};

}  // namespace

std::vector<TelemetrySession> parse_sessions(std::istream& source) {
    std::string line;
    if (!std::getline(source, line)) throw std::runtime_error("empty telemetry stream");
    auto header = split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;

    for (const char* name : kNumericColumns)
        if (!col.count(name)) throw std::runtime_error(std::string("missing mandatory column '") + name + "'");
    for (const char* name : {"driver_id", "session_id"})
        if (!col.count(name)) throw std::runtime_error(std::string("missing mandatory column '") + name + "'");

    std::vector<TelemetrySession> sessions;
    std::map<std::pair<std::string, std::string>, std::size_t> index;

    std::size_t row = 1;  // header was row 0
    while (std::getline(source, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            ++row;
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() < header.size())
            throw std::runtime_error("malformed row " + std::to_string(row) + ": expected " +
                                     std::to_string(header.size()) + " fields, got " +
                                     std::to_string(fields.size()));

        TelemetrySample s;
        s.t = parse_number(fields[col["t_s"]], row, "t_s");
        s.vs = parse_number(fields[col["vs_kmh"]], row, "vs_kmh");
        s.pgp = parse_number(fields[col["pgp_pct"]], row, "pgp_pct");
        s.erpm = parse_number(fields[col["erpm"]], row, "erpm");
        s.gp = parse_number(fields[col["gp_raw"]], row, "gp_raw");
        s.bp = parse_number(fields[col["bp_raw"]], row, "bp_raw");
        s.xacc = parse_number(fields[col["xacc_ms2"]], row, "xacc_ms2");
        s.swa = parse_number(fields[col["swa_deg"]], row, "swa_deg");
        if (s.vs < 0 || s.erpm < 0 || s.pgp < 0 || s.pgp > 100 || s.gp < 0 || s.bp < 0)
            throw std::runtime_error("malformed row " + std::to_string(row) +
                                     ": channel value out of range");

        auto key = std::make_pair(fields[col["driver_id"]], fields[col["session_id"]]);
        auto it = index.find(key);
        if (it == index.end()) {
            index.emplace(key, sessions.size());
            TelemetrySession sess;
            sess.driver_id = key.first;
            sess.session_id = key.second;
            sessions.push_back(std::move(sess));
            it = index.find(key);
        }
        auto& sess = sessions[it->second];
        if (!sess.samples.empty() && s.t <= sess.samples.back().t)
            throw std::runtime_error("non-monotonic timestamps at row " + std::to_string(row) +
                                     " (session '" + key.second + "')");
        sess.samples.push_back(s);
        ++row;
    }
    if (sessions.empty()) throw std::runtime_error("telemetry stream has no data rows");
    return sessions;
}

TelemetrySession parse_session(std::istream& source) {
    auto sessions = parse_sessions(source);
    if (sessions.size() != 1)
        throw std::runtime_error("expected a single session, found " +
                                 std::to_string(sessions.size()));
    return std::move(sessions.front());
}

void write_session_csv(std::ostream& out, const TelemetrySession& session) {
    out << "t_s,vs_kmh,pgp_pct,erpm,gp_raw,bp_raw,xacc_ms2,swa_deg,driver_id,session_id\n";
    char buf[512];
    for (const auto& s : session.samples) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s,%s\n",
                      s.t, s.vs, s.pgp, s.erpm, s.gp, s.bp, s.xacc, s.swa,
                      session.driver_id.c_str(), session.session_id.c_str());
        out << buf;
    }
}

TelemetrySession resample(const TelemetrySession& session, double target_hz) {
    if (target_hz <= 0) throw std::invalid_argument("target_hz must be positive");
    if (session.samples.size() < 2)
        throw std::runtime_error("cannot resample a session with fewer than 2 samples");

    const auto& in = session.samples;
    const double t0 = in.front().t;
    const double span = in.back().t - t0;
    const std::size_t count = static_cast<std::size_t>(std::floor(span * target_hz)) + 1;

    TelemetrySession out;
    out.driver_id = session.driver_id;
    out.session_id = session.session_id;
    out.rate_hz = target_hz;
    out.samples.reserve(count);

    std::size_t hi = 1;  // in[hi-1].t <= t <= in[hi].t
    for (std::size_t k = 0; k < count; ++k) {
        const double t = t0 + static_cast<double>(k) / target_hz;
        while (hi + 1 < in.size() && in[hi].t < t) ++hi;
        const auto& a = in[hi - 1];
        const auto& b = in[hi];
        double u = (t - a.t) / (b.t - a.t);
        // snap to exact nodes so resampling at the native rate is the identity
        if (std::abs(t - a.t) < 1e-9 / target_hz) u = 0.0;
        if (std::abs(t - b.t) < 1e-9 / target_hz) u = 1.0;
        TelemetrySample s;
        s.t = t0 + static_cast<double>(k) / target_hz;
        if (u == 0.0) {
            s = a;
            s.t = t0 + static_cast<double>(k) / target_hz;
        } else if (u == 1.0) {
            s = b;
            s.t = t0 + static_cast<double>(k) / target_hz;
        } else {
            s.vs = a.vs + u * (b.vs - a.vs);
            s.pgp = a.pgp + u * (b.pgp - a.pgp);
            s.erpm = a.erpm + u * (b.erpm - a.erpm);
            s.gp = a.gp + u * (b.gp - a.gp);
            s.bp = a.bp + u * (b.bp - a.bp);
            s.xacc = a.xacc + u * (b.xacc - a.xacc);
            s.swa = a.swa + u * (b.swa - a.swa);
        }
        out.samples.push_back(s);
    }
    return out;
}

SignSplit split_xacc(std::span<const double> xacc) {
    SignSplit r;
    r.pos.reserve(xacc.size());
    r.neg.reserve(xacc.size());
    for (double x : xacc) {
        r.pos.push_back(std::max(0.0, x));
        r.neg.push_back(std::min(0.0, x));
    }
    return r;
}

std::vector<IndexRange> filter_highspeed_segments(const TelemetrySession& session,
                                                  double min_mean_speed_kmh, double window_s) {
    if (min_mean_speed_kmh < 0) throw std::invalid_argument("min_mean_speed must be >= 0");
    if (session.rate_hz <= 0) throw std::invalid_argument("session must be resampled first");

    const std::size_t window = static_cast<std::size_t>(std::lround(window_s * session.rate_hz));
    if (window == 0 || session.samples.size() < window) return {};
    const std::size_t shift = std::max<std::size_t>(1, window / 2);
    const std::size_t n_windows = (session.samples.size() - window) / shift + 1;

    std::vector<IndexRange> ranges;
    bool open = false;
    IndexRange cur{};
    for (std::size_t w = 0; w < n_windows; ++w) {
        const std::size_t start = w * shift;
        double sum = 0;
        for (std::size_t i = start; i < start + window; ++i) sum += session.samples[i].vs;
        const bool ok = sum / static_cast<double>(window) >= min_mean_speed_kmh;
        if (ok && !open) {
            open = true;
            cur.begin = start;
        }
        if (ok) cur.end = start + window;
        if (!ok && open) {
            open = false;
            ranges.push_back(cur);
        }
    }
    if (open) ranges.push_back(cur);
    return ranges;
}

}  // namespace ecosom
