#include "ecosom/features.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ecosom {

MeanVar window_stats(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("window_stats: empty sequence");
    const double n = static_cast<double>(values.size());
    double sum = 0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, ss / n};
}

FeatureVector feature_vector(std::span<const double> pgp, std::span<const double> erpm,
                             std::span<const double> gp, std::span<const double> xacc) {
    if (pgp.empty() || pgp.size() != erpm.size() || pgp.size() != gp.size() ||
        pgp.size() != xacc.size())
        throw std::invalid_argument("feature_vector: channel length mismatch");
    auto pos = split_xacc(xacc).pos;
    return {window_stats(pgp).mean, window_stats(erpm).mean, window_stats(gp).mean,
            window_stats(pos).variance};
}

std::vector<FeatureWindow> make_windows(const TelemetrySession& session, std::size_t window_size,
                                        std::size_t shift) {
    if (window_size == 0 || shift == 0 || shift > window_size)
        throw std::invalid_argument("make_windows: need 0 < shift <= window_size");
    const auto& samples = session.samples;
    std::vector<FeatureWindow> out;
    if (samples.size() < window_size) return out;

    const std::size_t n_windows = (samples.size() - window_size) / shift + 1;
    out.reserve(n_windows);
    std::vector<double> pgp(window_size), erpm(window_size), gp(window_size), xacc(window_size),
        vs(window_size);
    for (std::size_t w = 0; w < n_windows; ++w) {
        const std::size_t start = w * shift;
        for (std::size_t i = 0; i < window_size; ++i) {
            const auto& s = samples[start + i];
            pgp[i] = s.pgp;
            erpm[i] = s.erpm;
            gp[i] = s.gp;
            xacc[i] = s.xacc;
            vs[i] = s.vs;
        }
        FeatureWindow fw;
        fw.driver_id = session.driver_id;
        fw.start_index = start;
        fw.span_s = session.rate_hz > 0 ? static_cast<double>(window_size) / session.rate_hz : 0.0;
        fw.vector = feature_vector(pgp, erpm, gp, xacc);
        fw.mean_speed = window_stats(vs).mean;
        out.push_back(std::move(fw));
    }
    return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    if (x.size() < 3) throw std::invalid_argument("pearson: need at least 3 points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) throw std::invalid_argument("pearson: constant input");
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

double pearson_p_value(double r, std::size_t n) {
    if (n < 3) throw std::invalid_argument("pearson_p_value: need n >= 3");
    if (std::abs(r) > 1) throw std::invalid_argument("pearson_p_value: |r| > 1");
    if (std::abs(r) == 1.0) return 0.0;
    const double df = static_cast<double>(n - 2);
    const double t = r * std::sqrt(df / (1.0 - r * r));
    boost::math::students_t_distribution<double> dist(df);
    return 2.0 * cdf(complement(dist, std::abs(t)));
}

namespace {

struct Candidate {
    std::string name;
    double (*extract)(const TelemetrySample&);
    bool positive_part;  // take max(0, x) before stats
    bool negative_part;  // take min(0, x)
};

const Candidate kCandidates[] = {
    {"vs", [](const TelemetrySample& s) { return s.vs; }, false, false},
    {"pgp", [](const TelemetrySample& s) { return s.pgp; }, false, false},
    {"erpm", [](const TelemetrySample& s) { return s.erpm; }, false, false},
    {"bp", [](const TelemetrySample& s) { return s.bp; }, false, false},
    {"gp", [](const TelemetrySample& s) { return s.gp; }, false, false},
    {"pos_xacc", [](const TelemetrySample& s) { return s.xacc; }, true, false},
    {"neg_xacc", [](const TelemetrySample& s) { return s.xacc; }, false, true},
};

}  // namespace

CorrelationReport rank_features(const TelemetrySession& session,
                                std::span<const FeatureWindow> labeled_windows,
                                std::size_t window_size) {
    if (labeled_windows.size() < 3)
        throw std::invalid_argument("rank_features: need at least 3 labeled windows");

    std::vector<double> fuel;
    fuel.reserve(labeled_windows.size());
    for (const auto& w : labeled_windows) {
        if (!w.fuel_l_per_100km)
            throw std::invalid_argument("rank_features: window without fuel label");
        if (w.start_index + window_size > session.samples.size())
            throw std::invalid_argument("rank_features: window exceeds session length");
        fuel.push_back(*w.fuel_l_per_100km);
    }

    CorrelationReport report;
    std::vector<double> channel(window_size), means(labeled_windows.size()),
        vars(labeled_windows.size());
    for (const auto& cand : kCandidates) {
        for (std::size_t wi = 0; wi < labeled_windows.size(); ++wi) {
            const std::size_t start = labeled_windows[wi].start_index;
            for (std::size_t i = 0; i < window_size; ++i) {
                double v = cand.extract(session.samples[start + i]);
                if (cand.positive_part) v = std::max(0.0, v);
                if (cand.negative_part) v = std::min(0.0, v);
                channel[i] = v;
            }
            auto mv = window_stats(channel);
            means[wi] = mv.mean;
            vars[wi] = mv.variance;
        }
        for (auto [suffix, series] : {std::pair{"mean_", &means}, std::pair{"var_", &vars}}) {
            CorrelationEntry e;
            e.feature = std::string(suffix) + cand.name;
            try {
                e.pcc = pearson(*series, fuel);
                e.p_value = pearson_p_value(e.pcc, series->size());
            } catch (const std::invalid_argument&) {
                e.pcc = 0.0;  // constant candidate: no measurable association
                e.p_value = 1.0;
            }
            report.push_back(std::move(e));
        }
    }
    std::stable_sort(report.begin(), report.end(), [](const auto& a, const auto& b) {
        return std::abs(a.pcc) > std::abs(b.pcc);
    });
    return report;
}

std::vector<double> MinMaxScaler::normalize(std::span<const double> v) const {
    if (v.size() != dim()) throw std::invalid_argument("scaler: dimension mismatch");
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = (v[i] - min[i]) / (max[i] - min[i]) * kNormalizedMax;
    return out;
}

std::vector<double> MinMaxScaler::denormalize(std::span<const double> v) const {
    if (v.size() != dim()) throw std::invalid_argument("scaler: dimension mismatch");
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = v[i] / kNormalizedMax * (max[i] - min[i]) + min[i];
    return out;
}

std::vector<double> MinMaxScaler::normalize_clamped(std::span<const double> v,
                                                    bool* clamped) const {
    auto out = normalize(v);
    bool any = false;
    for (double& x : out) {
        if (x < 0.0) {
            x = 0.0;
            any = true;
        } else if (x > kNormalizedMax) {
            x = kNormalizedMax;
            any = true;
        }
    }
    if (clamped) *clamped = any;
    return out;
}

std::pair<std::vector<std::vector<double>>, MinMaxScaler> normalize_dataset(
    std::span<const std::vector<double>> vectors) {
    if (vectors.size() < 2) throw std::invalid_argument("normalize_dataset: need >= 2 vectors");
    const std::size_t dim = vectors.front().size();
    MinMaxScaler scaler;
    scaler.min.assign(dim, std::numeric_limits<double>::infinity());
    scaler.max.assign(dim, -std::numeric_limits<double>::infinity());
    for (const auto& v : vectors) {
        if (v.size() != dim) throw std::invalid_argument("normalize_dataset: ragged input");
        for (std::size_t i = 0; i < dim; ++i) {
            scaler.min[i] = std::min(scaler.min[i], v[i]);
            scaler.max[i] = std::max(scaler.max[i], v[i]);
        }
    }
    for (std::size_t i = 0; i < dim; ++i)
        if (!(scaler.max[i] > scaler.min[i]))
            throw std::invalid_argument("normalize_dataset: feature column " + std::to_string(i) +
                                        " is constant");
    std::vector<std::vector<double>> out;
    out.reserve(vectors.size());
    for (const auto& v : vectors) out.push_back(scaler.normalize(v));
    return {std::move(out), std::move(scaler)};
}

std::pair<std::vector<std::vector<double>>, MinMaxScaler> normalize_features(
    std::span<const FeatureWindow> windows) {
    std::vector<std::vector<double>> raw;
    raw.reserve(windows.size());
    for (const auto& w : windows) {
        auto a = w.vector.to_array();
        raw.emplace_back(a.begin(), a.end());
    }
    return normalize_dataset(raw);
}

void write_feature_csv(std::ostream& out, std::span<const FeatureWindow> windows) {
    out << "driver_id,start_index,mean_pgp,mean_erpm,mean_gp,var_pos_xacc,mean_speed,fuel_l100km\n";
    char buf[512];
    for (const auto& w : windows) {
        std::snprintf(buf, sizeof buf, "%s,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      w.driver_id.c_str(), w.start_index, w.vector.mean_pgp, w.vector.mean_erpm,
                      w.vector.mean_gp, w.vector.var_pos_xacc, w.mean_speed,
                      w.fuel_l_per_100km.value_or(std::nan("")));
        out << buf;
    }
}

std::vector<FeatureWindow> read_feature_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty feature file");
    std::vector<FeatureWindow> windows;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.size() < 8)
            throw std::runtime_error("feature file row " + std::to_string(row) + ": too few fields");
        FeatureWindow w;
        w.driver_id = f[0];
        try {
            w.start_index = std::stoull(f[1]);
            w.vector.mean_pgp = std::stod(f[2]);
            w.vector.mean_erpm = std::stod(f[3]);
            w.vector.mean_gp = std::stod(f[4]);
            w.vector.var_pos_xacc = std::stod(f[5]);
            w.mean_speed = std::stod(f[6]);
            double fuel = std::stod(f[7]);
            if (!std::isnan(fuel)) w.fuel_l_per_100km = fuel;
        } catch (const std::exception&) {
            throw std::runtime_error("feature file row " + std::to_string(row) +
                                     ": malformed number");
        }
        windows.push_back(std::move(w));
        ++row;
    }
    return windows;
}

}  // namespace ecosom
