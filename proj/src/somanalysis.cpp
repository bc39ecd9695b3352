#include "ecosom/somanalysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecosom {

namespace {

constexpr double kAdjacencyTol = 1e-9;

std::vector<std::vector<std::size_t>> hex_adjacency(const std::vector<GridPos>& pos) {
    const std::size_t m = pos.size();
    std::vector<std::vector<std::size_t>> adj(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            if (std::abs(grid_distance_sq(pos[i], pos[j]) - 1.0) < kAdjacencyTol) {
                adj[i].push_back(j);
                adj[j].push_back(i);
            }
    return adj;
}

}  // namespace

UMatrix u_matrix(const SomModel& model) {
    const std::size_t m = model.n_neurons();
    UMatrix u;
    u.neuron_value.assign(m, 0.0);
    std::vector<std::size_t> degree(m, 0);
    const auto adj = hex_adjacency(model.grid_pos);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j : adj[i]) {
            if (j < i) continue;
            const double d = std::sqrt(euclidean_sq(model.weights[i], model.weights[j]));
            u.edges.push_back({i, j, d});
            u.neuron_value[i] += d;
            u.neuron_value[j] += d;
            ++degree[i];
            ++degree[j];
        }
    }
    for (std::size_t i = 0; i < m; ++i)
        if (degree[i] > 0) u.neuron_value[i] /= static_cast<double>(degree[i]);
    return u;
}

std::vector<std::size_t> hit_histogram(const SomModel& model,
                                       std::span<const std::vector<double>> dataset) {
    if (dataset.empty()) throw std::invalid_argument("hit_histogram: empty dataset");
    std::vector<std::size_t> hits(model.n_neurons(), 0);
    for (const auto& x : dataset) ++hits[find_bmu(model, x).index];
    return hits;
}

const Cluster& ClusterMap::cluster_of_neuron(std::size_t neuron) const {
    return clusters.at(static_cast<std::size_t>(assignment.at(neuron)));
}

const Cluster* ClusterMap::find_label(const std::string& label) const {
    for (const auto& c : clusters)
        if (c.label == label) return &c;
    return nullptr;
}

ClusterMap threshold_clusters(const UMatrix& umatrix, double threshold_fraction) {
    if (threshold_fraction <= 0 || threshold_fraction > 1)
        throw std::invalid_argument("threshold_clusters: fraction must be in (0,1]");
    const std::size_t m = umatrix.n_neurons();
    if (m == 0) throw std::invalid_argument("threshold_clusters: empty U-matrix");

    const double umax = *std::max_element(umatrix.neuron_value.begin(), umatrix.neuron_value.end());
    const double cut = threshold_fraction * umax;

    std::vector<std::vector<std::size_t>> adj(m);
    for (const auto& e : umatrix.edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    auto edge_dist = [&](std::size_t a, std::size_t b) {
        for (const auto& e : umatrix.edges)
            if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return e.distance;
        return std::numeric_limits<double>::infinity();
    };

    ClusterMap map;
    map.threshold_fraction = threshold_fraction;
    map.assignment.assign(m, -1);
    map.is_border.assign(m, false);
    for (std::size_t i = 0; i < m; ++i) map.is_border[i] = umatrix.neuron_value[i] > cut;

    // connected components of the eligible (low-U) neurons
    int next_id = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (map.is_border[i] || map.assignment[i] >= 0) continue;
        std::vector<std::size_t> stack{i};
        map.assignment[i] = next_id;
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            for (std::size_t w : adj[v])
                if (!map.is_border[w] && map.assignment[w] < 0) {
                    map.assignment[w] = next_id;
                    stack.push_back(w);
                }
        }
        ++next_id;
    }
    if (next_id == 0)
        throw std::runtime_error("threshold_clusters: no neuron falls below the threshold");

    // attach border neurons wave by wave: each wave assigns every unassigned
    // neuron with an assigned hex neighbor to the nearest (by weight distance)
    // such neighbor's cluster, using the assignments from before the wave
    while (true) {
        std::vector<std::pair<std::size_t, int>> wave;
        for (std::size_t i = 0; i < m; ++i) {
            if (map.assignment[i] >= 0) continue;
            double best = std::numeric_limits<double>::infinity();
            int best_cluster = -1;
            for (std::size_t w : adj[i]) {
                if (map.assignment[w] < 0) continue;
                const double d = edge_dist(i, w);
                if (d < best || (d == best && map.assignment[w] < best_cluster)) {
                    best = d;
                    best_cluster = map.assignment[w];
                }
            }
            if (best_cluster >= 0) wave.emplace_back(i, best_cluster);
        }
        if (wave.empty()) break;
        for (auto [i, c] : wave) map.assignment[i] = c;
    }

    map.clusters.resize(static_cast<std::size_t>(next_id));
    for (int id = 0; id < next_id; ++id) map.clusters[static_cast<std::size_t>(id)].id = id;
    for (std::size_t i = 0; i < m; ++i)
        map.clusters[static_cast<std::size_t>(map.assignment[i])].members.push_back(i);
    return map;
}

std::vector<std::string> scheme_labels(std::size_t n_clusters) {
    if (n_clusters == 3) return {"Very low", "Low", "Medium-High"};
    if (n_clusters == 5) return {"Very low", "Low", "Medium", "High", "Very high"};
    std::vector<std::string> labels;
    for (std::size_t i = 1; i <= n_clusters; ++i) labels.push_back("Cluster " + std::to_string(i));
    return labels;
}

void label_clusters(ClusterMap& map, const SomModel& model,
                    std::span<const FeatureWindow> labeled_windows) {
    const std::size_t k = map.clusters.size();
    std::vector<std::vector<double>> fuel_by_cluster(k);
    for (const auto& w : labeled_windows) {
        if (!w.fuel_l_per_100km)
            throw std::invalid_argument("label_clusters: window without fuel label");
        auto arr = w.vector.to_array();
        std::vector<double> raw(arr.begin(), arr.end());
        const auto x = model.scaler.empty() ? raw : model.scaler.normalize_clamped(raw, nullptr);
        const std::size_t bmu = find_bmu(model, x).index;
        fuel_by_cluster[static_cast<std::size_t>(map.assignment[bmu])].push_back(
            *w.fuel_l_per_100km);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (fuel_by_cluster[c].empty())
            throw std::runtime_error("label_clusters: cluster " + std::to_string(c) +
                                     " received no windows");
        const auto mv = window_stats(fuel_by_cluster[c]);
        map.clusters[c].fuel_avg = mv.mean;
        map.clusters[c].fuel_var = mv.variance;
        map.clusters[c].fuel_max =
            *std::max_element(fuel_by_cluster[c].begin(), fuel_by_cluster[c].end());
        map.clusters[c].window_count = fuel_by_cluster[c].size();
    }

    // renumber by ascending average fuel so labels are strictly ordered
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return map.clusters[a].fuel_avg < map.clusters[b].fuel_avg;
    });
    std::vector<int> new_id(k);
    for (std::size_t rank = 0; rank < k; ++rank)
        new_id[order[rank]] = static_cast<int>(rank);

    std::vector<Cluster> relabeled(k);
    const auto labels = scheme_labels(k);
    for (std::size_t rank = 0; rank < k; ++rank) {
        relabeled[rank] = std::move(map.clusters[order[rank]]);
        relabeled[rank].id = static_cast<int>(rank);
        relabeled[rank].label = labels[rank];
    }
    map.clusters = std::move(relabeled);
    for (auto& a : map.assignment) a = new_id[static_cast<std::size_t>(a)];
}

std::map<std::string, double> driver_distribution(const ClusterMap& map, const SomModel& model,
                                                  std::span<const FeatureWindow> windows) {
    if (windows.empty()) throw std::invalid_argument("driver_distribution: no windows");
    std::map<std::string, double> dist;
    for (const auto& c : map.clusters) dist[c.label] = 0.0;
    for (const auto& w : windows) {
        auto arr = w.vector.to_array();
        std::vector<double> raw(arr.begin(), arr.end());
        const auto x = model.scaler.empty() ? raw : model.scaler.normalize_clamped(raw, nullptr);
        const std::size_t bmu = find_bmu(model, x).index;
        dist[map.cluster_of_neuron(bmu).label] += 1.0;
    }
    const double n = static_cast<double>(windows.size());
    for (auto& [label, count] : dist) count = count / n * 100.0;
    return dist;
}

}  // namespace ecosom
