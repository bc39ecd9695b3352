#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ecosom/features.hpp"

namespace ecosom {

struct GridPos {
    double x = 0.0;
    double y = 0.0;
};

/// Training schedule. iterations = kAutoIterations resolves to 200·K at
/// train() time and sigma0 = 0 to max(rows, cols)/2; an explicit 0 runs no
/// training steps and returns the initialized map.
struct TrainSchedule {
    static constexpr std::uint64_t kAutoIterations = ~std::uint64_t{0};

    double alpha0 = 0.5;
    std::uint64_t iterations = kAutoIterations;  // T
    double sigma0 = 0.0;
    double sigma_final = 0.5;
    std::uint64_t seed = 0;
};

/// A trained (or initialized) map: M = rows·cols neurons on a hexagonal grid,
/// each with an N-component weight vector in [0,1). Weights are stored in
/// row-major neuron order; that order also defines accelerator ROM addresses.
struct SomModel {
    std::size_t n_inputs = 0;
    std::size_t grid_rows = 0;
    std::size_t grid_cols = 0;
    std::vector<std::vector<double>> weights;  // M x N
    std::vector<GridPos> grid_pos;             // M
    MinMaxScaler scaler;                       // may be empty
    TrainSchedule schedule;

    std::size_t n_neurons() const { return grid_rows * grid_cols; }
};

/// Hexagonal layout: odd rows offset by half a column, row spacing sqrt(3)/2,
/// unit distance between adjacent neurons. Row-major order.
std::vector<GridPos> hex_positions(std::size_t rows, std::size_t cols);

double grid_distance_sq(const GridPos& a, const GridPos& b);

/// Weights drawn uniformly (with replacement) from the dataset; deterministic
/// given the seed. The generator is std::mt19937_64(seed) and each draw is
/// next() mod K; init_random consumes exactly M draws, and train() then
/// consumes T more from the same stream — this draw sequence is part of the
/// model file contract.
SomModel init_random(std::span<const std::vector<double>> dataset, std::size_t rows,
                     std::size_t cols, std::uint64_t seed);

double euclidean_sq(std::span<const double> x, std::span<const double> m);

struct BmuResult {
    std::size_t index = 0;
    double dist_sq = 0.0;
};

/// Argmin of squared distance over all neurons; ties break to the lowest index.
BmuResult find_bmu(const SomModel& model, std::span<const double> x);

/// Gaussian kernel over grid positions: exp(-|g_c - g_i|² / (2σ²)).
double neighborhood(const SomModel& model, std::size_t bmu, std::size_t neuron, double sigma);

/// alpha0 · exp(-n/T).
double learning_rate(std::uint64_t n, const TrainSchedule& schedule);

/// sigma0 · (sigma_final/sigma0)^(n/T).
double neighborhood_radius(std::uint64_t n, const TrainSchedule& schedule);

/// One sequential update: m_i += alpha(n)·h_ci(n)·(x - m_i) for every neuron.
void train_step(SomModel& model, std::span<const double> x, std::uint64_t n,
                const TrainSchedule& schedule);

/// Full sequential training: random init from the dataset, then T iterations
/// of draw/compete/cooperate/adapt. Deterministic given the seed.
SomModel train(std::span<const std::vector<double>> dataset, std::size_t rows, std::size_t cols,
               TrainSchedule schedule);

/// Mean (non-squared) distance of each sample to its BMU.
double quantization_error(const SomModel& model, std::span<const std::vector<double>> dataset);

}  // namespace ecosom
