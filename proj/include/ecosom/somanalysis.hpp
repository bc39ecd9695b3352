#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ecosom/somcore.hpp"

namespace ecosom {

struct UMatrixEdge {
    std::size_t a = 0;  // a < b, hex-adjacent neurons
    std::size_t b = 0;
    double distance = 0.0;  // Euclidean (non-squared) weight distance
};

struct UMatrix {
    std::vector<double> neuron_value;  // mean of incident edge distances
    std::vector<UMatrixEdge> edges;

    std::size_t n_neurons() const { return neuron_value.size(); }
};

UMatrix u_matrix(const SomModel& model);

/// Per-neuron BMU hit counts; counts sum to the dataset size.
std::vector<std::size_t> hit_histogram(const SomModel& model,
                                       std::span<const std::vector<double>> dataset);

struct Cluster {
    int id = 0;
    std::string label;
    std::vector<std::size_t> members;  // neuron indices, ascending
    double fuel_avg = 0.0;
    double fuel_var = 0.0;
    double fuel_max = 0.0;
    std::size_t window_count = 0;
};

struct ClusterMap {
    double threshold_fraction = 0.0;
    std::vector<int> assignment;   // neuron -> cluster id, complete after border attachment
    std::vector<bool> is_border;   // neurons above the U-matrix threshold
    std::vector<Cluster> clusters;

    const Cluster& cluster_of_neuron(std::size_t neuron) const;
    const Cluster* find_label(const std::string& label) const;
};

/// Neurons with U-value <= threshold_fraction · max(U) seed clusters as
/// connected components under hex adjacency; the remaining (border) neurons
/// are then attached wave by wave to the adjacent cluster with minimal weight
/// distance, so every neuron ends up assigned. Throws if no neuron qualifies.
ClusterMap threshold_clusters(const UMatrix& umatrix, double threshold_fraction);

/// 3-cluster scheme: Very low, Low, Medium-High. 5-cluster: Very low, Low,
/// Medium, High, Very high. Any other count gets generic ordinal labels.
std::vector<std::string> scheme_labels(std::size_t n_clusters);

/// Computes per-cluster fuel statistics {avg, var, max} from the windows'
/// fuel labels (windows are assigned to clusters through their BMU), renumbers
/// clusters by ascending average fuel, and attaches scheme labels. Throws if
/// any cluster receives no window or any window lacks a fuel label.
void label_clusters(ClusterMap& map, const SomModel& model,
                    std::span<const FeatureWindow> labeled_windows);

/// Percent of the windows whose BMU cluster carries each label; covers every
/// label of the map (0 for absent ones) and sums to 100 before rounding.
std::map<std::string, double> driver_distribution(const ClusterMap& map, const SomModel& model,
                                                  std::span<const FeatureWindow> windows);

}  // namespace ecosom
