#include <stdexcept>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "ecosom/features.hpp"
#include "support/synthetic.hpp"

using namespace ecosom;

namespace {

// independent two-pass reference for mean/variance
std::pair<double, double> two_pass_stats(std::span<const double> v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    return {mean, var / static_cast<double>(v.size())};
}

// textbook covariance/(sigma·sigma) oracle
double pearson_oracle(std::span<const double> x, std::span<const double> y) {
    auto [mx, vx] = two_pass_stats(x);
    auto [my, vy] = two_pass_stats(y);
    double cov = 0;
    for (std::size_t i = 0; i < x.size(); ++i) cov += (x[i] - mx) * (y[i] - my);
    cov /= static_cast<double>(x.size());
    return cov / std::sqrt(vx * vy);
}

// two-sided p by numeric integration (Simpson) of the Student-t density
double t_density(double u, double df) {
    const double c = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) -
                     0.5 * std::log(df * std::numbers::pi);
    return std::exp(c - (df + 1) / 2 * std::log1p(u * u / df));
}

double p_value_oracle(double r, std::size_t n) {
    const double df = static_cast<double>(n - 2);
    const double t = std::abs(r) * std::sqrt(df / (1 - r * r));
    const int steps = 200000;
    const double h = 2 * t / steps;
    double integral = t_density(-t, df) + t_density(t, df);
    for (int i = 1; i < steps; ++i)
        integral += t_density(-t + i * h, df) * (i % 2 ? 4.0 : 2.0);
    integral *= h / 3.0;
    return 1.0 - integral;
}

TelemetrySession constant_session(std::size_t n, double pgp, double erpm, double gp,
                                  double xacc) {
    TelemetrySession s;
    s.driver_id = "d";
    s.session_id = "s";
    s.rate_hz = 32.0;
    for (std::size_t i = 0; i < n; ++i) {
        TelemetrySample x;
        x.t = static_cast<double>(i) / 32.0;
        x.pgp = pgp;
        x.erpm = erpm;
        x.gp = gp;
        x.xacc = xacc;
        x.vs = 80.0;
        s.samples.push_back(x);
    }
    return s;
}

}  // namespace

TEST_CASE("window_stats hand cases") {
    const std::vector<double> c{2, 2, 2, 2};
    auto mv = window_stats(c);
    CHECK(mv.mean == 2.0);
    CHECK(mv.variance == 0.0);

    const std::vector<double> two{0, 2};
    mv = window_stats(two);
    CHECK(mv.mean == 1.0);
    CHECK(mv.variance == 1.0);

    CHECK_THROWS_AS(window_stats({}), std::invalid_argument);
}

TEST_CASE("window_stats matches the two-pass oracle on random windows") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(256);
        for (auto& x : v) x = u(rng);
        const auto mv = window_stats(v);
        const auto [mean, var] = two_pass_stats(v);
        CHECK(mv.mean == doctest::Approx(mean).epsilon(1e-12));
        CHECK(mv.variance == doctest::Approx(var).epsilon(1e-12));
    }
}

TEST_CASE("make_windows count follows the closed form") {
    CHECK(make_windows(constant_session(1024, 50, 2000, 10, 1), 256, 128).size() == 7);
    CHECK(make_windows(constant_session(256, 50, 2000, 10, 1), 256, 128).size() == 1);
    CHECK(make_windows(constant_session(255, 50, 2000, 10, 1), 256, 128).size() == 0);
}

TEST_CASE("make_windows count formula holds for arbitrary shapes") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t len = rng() % 4096;
        const std::size_t size = 1 + rng() % 512;
        const std::size_t shift = 1 + rng() % size;
        const auto windows = make_windows(constant_session(len, 1, 1, 1, 0), size, shift);
        const std::size_t expected = len >= size ? (len - size) / shift + 1 : 0;
        CHECK(windows.size() == expected);
        if (windows.size() >= 2)
            CHECK(windows[1].start_index - windows[0].start_index == shift);
    }
}

TEST_CASE("feature_vector on constant channels") {
    const auto windows = make_windows(constant_session(256, 50, 2000, 10, 1.0), 256, 128);
    REQUIRE(windows.size() == 1);
    const auto& v = windows[0].vector;
    CHECK(v.mean_pgp == doctest::Approx(50.0));
    CHECK(v.mean_erpm == doctest::Approx(2000.0));
    CHECK(v.mean_gp == doctest::Approx(10.0));
    CHECK(v.var_pos_xacc == doctest::Approx(0.0));
}

TEST_CASE("feature_vector xacc alternating +-1 has positive-part variance 0.25") {
    std::vector<double> pgp(256, 1), erpm(256, 1), gp(256, 1), xacc(256);
    for (std::size_t i = 0; i < 256; ++i) xacc[i] = i % 2 ? -1.0 : 1.0;
    // positive part is [1,0,1,0,...]: mean 1/2, variance 1/4
    CHECK(feature_vector(pgp, erpm, gp, xacc).var_pos_xacc == doctest::Approx(0.25));

    std::vector<double> allneg(256, -0.5);
    CHECK(feature_vector(pgp, erpm, gp, allneg).var_pos_xacc == doctest::Approx(0.0));
}

TEST_CASE("feature_vector is order-free") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> pgp(64), erpm(64), gp(64), xacc(64);
    for (std::size_t i = 0; i < 64; ++i) {
        pgp[i] = 50 + u(rng);
        erpm[i] = 2000 + u(rng);
        gp[i] = 10 + u(rng);
        xacc[i] = u(rng);
    }
    const auto before = feature_vector(pgp, erpm, gp, xacc);
    // one permutation applied to all channels jointly
    std::vector<std::size_t> perm(64);
    for (std::size_t i = 0; i < 64; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> p2(64), e2(64), g2(64), x2(64);
    for (std::size_t i = 0; i < 64; ++i) {
        p2[i] = pgp[perm[i]];
        e2[i] = erpm[perm[i]];
        g2[i] = gp[perm[i]];
        x2[i] = xacc[perm[i]];
    }
    const auto after = feature_vector(p2, e2, g2, x2);
    CHECK(after.mean_pgp == doctest::Approx(before.mean_pgp).epsilon(1e-12));
    CHECK(after.mean_erpm == doctest::Approx(before.mean_erpm).epsilon(1e-12));
    CHECK(after.mean_gp == doctest::Approx(before.mean_gp).epsilon(1e-12));
    CHECK(after.var_pos_xacc == doctest::Approx(before.var_pos_xacc).epsilon(1e-12));
}

TEST_CASE("pearson exact linear cases") {
    std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y;
    for (double v : x) y.push_back(2 * v + 1);
    CHECK(pearson(x, y) == doctest::Approx(1.0));
    for (auto& v : y) v = -v;
    CHECK(pearson(x, y) == doctest::Approx(-1.0));
}

TEST_CASE("pearson matches the covariance oracle and is symmetric/affine-invariant") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(128), y(128);
        for (std::size_t i = 0; i < 128; ++i) {
            x[i] = g(rng);
            y[i] = 0.3 * x[i] + g(rng);
        }
        const double r = pearson(x, y);
        CHECK(r == doctest::Approx(pearson_oracle(x, y)).epsilon(1e-12));
        CHECK(r == doctest::Approx(pearson(y, x)).epsilon(1e-12));
        std::vector<double> xa(x);
        for (auto& v : xa) v = 3.5 * v + 11.0;  // positive affine map
        CHECK(pearson(xa, y) == doctest::Approx(r).epsilon(1e-9));
        CHECK(std::abs(r) <= 1.0);
    }
}

TEST_CASE("pearson error paths") {
    std::vector<double> x{1, 2, 3};
    std::vector<double> c{5, 5, 5};
    std::vector<double> shorter{1, 2};
    CHECK_THROWS_AS(pearson(x, shorter), std::invalid_argument);
    CHECK_THROWS_AS(pearson(x, c), std::invalid_argument);
}

TEST_CASE("pearson_p_value limits and oracle agreement") {
    CHECK(pearson_p_value(0.0, 30) == doctest::Approx(1.0));
    CHECK(pearson_p_value(1.0, 30) == 0.0);
    CHECK(pearson_p_value(-1.0, 30) == 0.0);
    CHECK(pearson_p_value(0.5, 100) ==
          doctest::Approx(p_value_oracle(0.5, 100)).epsilon(1e-6));
    CHECK(pearson_p_value(0.2, 50) == doctest::Approx(p_value_oracle(0.2, 50)).epsilon(1e-6));
    CHECK(pearson_p_value(-0.35, 40) ==
          doctest::Approx(p_value_oracle(-0.35, 40)).epsilon(1e-6));
}

TEST_CASE("rank_features puts an exact linear relation on top") {
    // fuel equals the window's mean erpm exactly
    TelemetrySession s;
    s.driver_id = "d";
    s.session_id = "s";
    s.rate_hz = 32.0;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < 2048; ++i) {
        TelemetrySample x;
        x.t = static_cast<double>(i) / 32.0;
        x.vs = 70 + 10 * u(rng);
        x.pgp = 30 + 20 * u(rng);
        x.erpm = 1500 + 2000 * u(rng);
        x.gp = 5 + 5 * u(rng);
        x.bp = u(rng);
        x.xacc = u(rng) - 0.5;
        s.samples.push_back(x);
    }
    auto windows = make_windows(s, 256, 128);
    for (auto& w : windows) w.fuel_l_per_100km = w.vector.mean_erpm;
    const auto report = rank_features(s, windows, 256);
    REQUIRE(!report.empty());
    CHECK(report.front().feature == "mean_erpm");
    CHECK(report.front().pcc == doctest::Approx(1.0));
    CHECK(report.front().p_value == doctest::Approx(0.0));
    // sorted by |pcc| descending
    for (std::size_t i = 1; i < report.size(); ++i)
        CHECK(std::abs(report[i - 1].pcc) >= std::abs(report[i].pcc));
}

TEST_CASE("rank_features: independent fuel decorrelates (fixed seed)") {
    TelemetrySession s;
    s.driver_id = "d";
    s.session_id = "s";
    s.rate_hz = 32.0;
    std::mt19937_64 rng(37);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::size_t n_windows = 10000;
    const std::size_t len = 8 * (n_windows + 1);
    for (std::size_t i = 0; i < len; ++i) {
        TelemetrySample x;
        x.t = static_cast<double>(i) / 32.0;
        x.vs = 80 + g(rng);
        x.pgp = 50 + 5 * g(rng);
        x.erpm = 2500 + 100 * g(rng);
        x.gp = 10 + g(rng);
        x.bp = std::abs(g(rng));
        x.xacc = g(rng);
        s.samples.push_back(x);
    }
    auto windows = make_windows(s, 8, 8);  // disjoint windows: independent stats
    REQUIRE(windows.size() >= n_windows);
    windows.resize(n_windows);
    for (auto& w : windows) w.fuel_l_per_100km = 5.0 + g(rng);  // independent of everything
    const auto report = rank_features(s, windows, 8);
    for (const auto& e : report) {
        CHECK(std::abs(e.pcc) < 0.1);
        CHECK(e.p_value > 0.001);
    }
}

TEST_CASE("rank_features needs 3 labeled windows") {
    const auto s = constant_session(512, 1, 1, 1, 0);
    auto windows = make_windows(s, 256, 128);
    for (auto& w : windows) w.fuel_l_per_100km = 3.0;
    windows.resize(2);
    CHECK_THROWS_AS(rank_features(s, windows, 256), std::invalid_argument);
}

TEST_CASE("normalize_dataset endpoints and round-trip") {
    std::vector<std::vector<double>> vectors{{0.0, 10.0, -5.0, 100.0}, {1.0, 20.0, 5.0, 200.0}};
    auto [normalized, scaler] = normalize_dataset(vectors);
    for (double v : normalized[0]) CHECK(v == doctest::Approx(0.0));
    for (double v : normalized[1]) CHECK(v == doctest::Approx(kNormalizedMax));  // 1 - 1/256

    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v{u(rng), 10 + u(rng), u(rng), 100 + u(rng)};
        const auto back = scaler.denormalize(scaler.normalize(v));
        for (std::size_t i = 0; i < v.size(); ++i)
            CHECK(back[i] == doctest::Approx(v[i]).epsilon(1e-9));
    }
}

TEST_CASE("normalize_dataset maps every training vector into [0, 1)") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::vector<std::vector<double>> vectors;
    for (int i = 0; i < 300; ++i) vectors.push_back({u(rng), u(rng), u(rng), u(rng)});
    auto [normalized, scaler] = normalize_dataset(vectors);
    for (const auto& v : normalized)
        for (double x : v) {
            CHECK(x >= 0.0);
            CHECK(x <= kNormalizedMax);
        }
}

TEST_CASE("normalize_dataset rejects constant columns and tiny datasets") {
    std::vector<std::vector<double>> constant{{1.0, 2.0}, {1.0, 3.0}};
    CHECK_THROWS_AS(normalize_dataset(constant), std::invalid_argument);
    std::vector<std::vector<double>> single{{1.0, 2.0}};
    CHECK_THROWS_AS(normalize_dataset(single), std::invalid_argument);
}

TEST_CASE("feature CSV round-trips") {
    using namespace ecosom::testsupport;
    const auto data = make_blobs(three_blob_specs(), 99);
    std::stringstream buf;
    write_feature_csv(buf, data.windows);
    const auto back = read_feature_csv(buf);
    REQUIRE(back.size() == data.windows.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].vector.mean_pgp == data.windows[i].vector.mean_pgp);
        CHECK(back[i].vector.var_pos_xacc == data.windows[i].vector.var_pos_xacc);
        CHECK(back[i].fuel_l_per_100km == data.windows[i].fuel_l_per_100km);
    }
}
