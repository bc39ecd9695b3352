#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecosom/telemetry.hpp"

namespace ecosom {

inline constexpr std::size_t kFeatureDim = 4;

/// Headroom target of min-max normalization: the per-feature maximum maps to
/// 255/256 so that round-to-nearest Q0.8 quantization is exact at the top of
/// the range and never saturates.
inline constexpr double kNormalizedMax = 255.0 / 256.0;

/// The 4-D driving-style signature: mean percent gas pedal, mean engine rpm,
/// mean gas-pedal pressure, variance of the positive part of the longitudinal
/// acceleration.
struct FeatureVector {
    double mean_pgp = 0.0;
    double mean_erpm = 0.0;
    double mean_gp = 0.0;
    double var_pos_xacc = 0.0;

    std::array<double, kFeatureDim> to_array() const {
        return {mean_pgp, mean_erpm, mean_gp, var_pos_xacc};
    }
    static FeatureVector from_array(const std::array<double, kFeatureDim>& a) {
        return {a[0], a[1], a[2], a[3]};
    }
};

struct FeatureWindow {
    std::string driver_id;
    std::size_t start_index = 0;  // sample index of the window start
    double span_s = 0.0;
    FeatureVector vector;
    double mean_speed = 0.0;  // km/h, used by the >= 60 km/h filter
    std::optional<double> fuel_l_per_100km;
};

struct MeanVar {
    double mean = 0.0;
    double variance = 0.0;  // population variance (divide by n)
};

/// Arithmetic mean and population variance; throws on an empty sequence.
MeanVar window_stats(std::span<const double> values);

/// Feature vector of one window: channel means plus the variance of the
/// positive part of xacc. All spans must have the same nonzero length.
FeatureVector feature_vector(std::span<const double> pgp, std::span<const double> erpm,
                             std::span<const double> gp, std::span<const double> xacc);

/// Sliding windows over a resampled session. Window count is
/// floor((len - window_size)/shift) + 1 when len >= window_size, else 0.
std::vector<FeatureWindow> make_windows(const TelemetrySession& session,
                                        std::size_t window_size = 256,
                                        std::size_t shift = 128);

/// Pearson correlation coefficient. Throws on length mismatch, n < 3, or a
/// constant input (undefined correlation).
double pearson(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of r under the no-correlation null, via the Student-t
/// transform t = r·sqrt((n-2)/(1-r²)) with n-2 degrees of freedom. |r| = 1
/// returns 0 by convention.
double pearson_p_value(double r, std::size_t n);

struct CorrelationEntry {
    std::string feature;  // e.g. "mean_erpm", "var_pos_xacc"
    double pcc = 0.0;
    double p_value = 1.0;
};

/// Entries sorted by |PCC| descending.
using CorrelationReport = std::vector<CorrelationEntry>;

/// Correlates every candidate window feature (means and variances of VS, PGP,
/// ERPM, BP, GP and of the positive/negative xacc parts) against the windows'
/// fuel labels. Requires >= 3 labeled windows; windows must index into the
/// given resampled session. Candidates that are constant across windows get
/// pcc = 0, p = 1 (no measurable linear association).
CorrelationReport rank_features(const TelemetrySession& session,
                                std::span<const FeatureWindow> labeled_windows,
                                std::size_t window_size = 256);

/// Invertible per-feature min-max map onto [0, 255/256].
struct MinMaxScaler {
    std::vector<double> min;
    std::vector<double> max;

    bool empty() const { return min.empty(); }
    std::size_t dim() const { return min.size(); }

    std::vector<double> normalize(std::span<const double> v) const;
    std::vector<double> denormalize(std::span<const double> v) const;
    /// Like normalize but clamps out-of-range components into [0, 255/256]
    /// and reports whether clamping happened.
    std::vector<double> normalize_clamped(std::span<const double> v, bool* clamped) const;
};

/// Min-max scaling of a dataset; throws if fewer than 2 vectors or any
/// feature column is constant.
std::pair<std::vector<std::vector<double>>, MinMaxScaler> normalize_dataset(
    std::span<const std::vector<double>> vectors);

std::pair<std::vector<std::vector<double>>, MinMaxScaler> normalize_features(
    std::span<const FeatureWindow> windows);

/// Feature-window CSV dump, schema:
///   driver_id, start_index, mean_pgp, mean_erpm, mean_gp, var_pos_xacc, mean_speed, fuel_l100km
void write_feature_csv(std::ostream& out, std::span<const FeatureWindow> windows);
std::vector<FeatureWindow> read_feature_csv(std::istream& in);

}  // namespace ecosom
