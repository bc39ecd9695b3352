#include "ecosom/somcore.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ecosom {

std::vector<GridPos> hex_positions(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("hex_positions: empty grid");
    const double row_spacing = std::sqrt(3.0) / 2.0;
    std::vector<GridPos> pos;
    pos.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            pos.push_back({static_cast<double>(c) + 0.5 * static_cast<double>(r % 2),
                           static_cast<double>(r) * row_spacing});
    return pos;
}

double grid_distance_sq(const GridPos& a, const GridPos& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

SomModel init_random(std::span<const std::vector<double>> dataset, std::size_t rows,
                     std::size_t cols, std::uint64_t seed) {
    if (dataset.empty()) throw std::invalid_argument("init_random: empty dataset");
    SomModel model;
    model.n_inputs = dataset.front().size();
    model.grid_rows = rows;
    model.grid_cols = cols;
    model.grid_pos = hex_positions(rows, cols);
    model.schedule.seed = seed;

    std::mt19937_64 rng(seed);
    const std::size_t m = rows * cols;
    model.weights.reserve(m);
    for (std::size_t i = 0; i < m; ++i)
        model.weights.push_back(dataset[rng() % dataset.size()]);
    return model;
}

double euclidean_sq(std::span<const double> x, std::span<const double> m) {
    if (x.size() != m.size()) throw std::invalid_argument("euclidean_sq: dimension mismatch");
    double d = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double diff = x[j] - m[j];
        d += diff * diff;
    }
    return d;
}

BmuResult find_bmu(const SomModel& model, std::span<const double> x) {
    BmuResult best{0, euclidean_sq(x, model.weights[0])};
    for (std::size_t i = 1; i < model.weights.size(); ++i) {
        const double d = euclidean_sq(x, model.weights[i]);
        if (d < best.dist_sq) best = {i, d};
    }
    return best;
}

double neighborhood(const SomModel& model, std::size_t bmu, std::size_t neuron, double sigma) {
    if (sigma <= 0) throw std::invalid_argument("neighborhood: sigma must be positive");
    return std::exp(-grid_distance_sq(model.grid_pos[bmu], model.grid_pos[neuron]) /
                    (2.0 * sigma * sigma));
}

double learning_rate(std::uint64_t n, const TrainSchedule& schedule) {
    return schedule.alpha0 *
           std::exp(-static_cast<double>(n) / static_cast<double>(schedule.iterations));
}

double neighborhood_radius(std::uint64_t n, const TrainSchedule& schedule) {
    const double frac = static_cast<double>(n) / static_cast<double>(schedule.iterations);
    return schedule.sigma0 * std::pow(schedule.sigma_final / schedule.sigma0, frac);
}

void train_step(SomModel& model, std::span<const double> x, std::uint64_t n,
                const TrainSchedule& schedule) {
    const double alpha = learning_rate(n, schedule);
    const double sigma = neighborhood_radius(n, schedule);
    const std::size_t c = find_bmu(model, x).index;
    for (std::size_t i = 0; i < model.weights.size(); ++i) {
        const double pull = alpha * neighborhood(model, c, i, sigma);
        auto& w = model.weights[i];
        for (std::size_t j = 0; j < w.size(); ++j) w[j] += pull * (x[j] - w[j]);
    }
}

SomModel train(std::span<const std::vector<double>> dataset, std::size_t rows, std::size_t cols,
               TrainSchedule schedule) {
    if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
    if (schedule.iterations == TrainSchedule::kAutoIterations)
        schedule.iterations = 200 * dataset.size();
    if (schedule.sigma0 <= 0) schedule.sigma0 = static_cast<double>(std::max(rows, cols)) / 2.0;
    if (schedule.sigma_final <= 0 || schedule.sigma_final > schedule.sigma0)
        throw std::invalid_argument("train: need 0 < sigma_final <= sigma0");
    if (schedule.alpha0 <= 0 || schedule.alpha0 > 1)
        throw std::invalid_argument("train: alpha0 must be in (0,1]");

    SomModel model = init_random(dataset, rows, cols, schedule.seed);
    model.schedule = schedule;

    // continue the same draw stream the initializer started
    std::mt19937_64 rng(schedule.seed);
    for (std::size_t i = 0; i < model.n_neurons(); ++i) rng();

    for (std::uint64_t n = 0; n < schedule.iterations; ++n) {
        const auto& x = dataset[rng() % dataset.size()];
        train_step(model, x, n, schedule);
    }
    return model;
}

double quantization_error(const SomModel& model, std::span<const std::vector<double>> dataset) {
    if (dataset.empty() || model.weights.empty())
        throw std::invalid_argument("quantization_error: empty input");
    double sum = 0;
    for (const auto& x : dataset) sum += std::sqrt(find_bmu(model, x).dist_sq);
    return sum / static_cast<double>(dataset.size());
}

}  // namespace ecosom
