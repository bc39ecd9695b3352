#include "ecosom/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace ecosom {

namespace {

constexpr int kModelVersion = 1;
constexpr int kClusterMapVersion = 1;

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

}  // namespace

void save_model(std::ostream& out, const SomModel& model) {
    nlohmann::ordered_json j;
    j["version"] = kModelVersion;
    j["grid"] = {{"rows", model.grid_rows}, {"cols", model.grid_cols}, {"layout", "hex"}};
    j["n_inputs"] = model.n_inputs;
    j["weights"] = model.weights;
    if (!model.scaler.empty())
        j["scaler"] = {{"min", model.scaler.min}, {"max", model.scaler.max}};
    j["schedule"] = {{"alpha0", model.schedule.alpha0},
                     {"T", model.schedule.iterations},
                     {"sigma0", model.schedule.sigma0},
                     {"sigma_final", model.schedule.sigma_final}};
    j["seed"] = model.schedule.seed;
    out << j.dump(2) << '\n';
}

void save_model(const std::string& path, const SomModel& model) {
    auto out = open_out(path);
    save_model(out, model);
}

SomModel load_model(std::istream& in) {
    nlohmann::json j;
    in >> j;
    if (j.at("version").get<int>() != kModelVersion)
        throw std::runtime_error("model file: unsupported version");
    if (j.at("grid").at("layout").get<std::string>() != "hex")
        throw std::runtime_error("model file: unsupported grid layout");

    SomModel model;
    model.grid_rows = j.at("grid").at("rows").get<std::size_t>();
    model.grid_cols = j.at("grid").at("cols").get<std::size_t>();
    model.n_inputs = j.at("n_inputs").get<std::size_t>();
    model.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    if (model.weights.size() != model.grid_rows * model.grid_cols)
        throw std::runtime_error("model file: weight count does not match the grid");
    for (const auto& w : model.weights)
        if (w.size() != model.n_inputs)
            throw std::runtime_error("model file: weight dimension mismatch");
    model.grid_pos = hex_positions(model.grid_rows, model.grid_cols);
    if (j.contains("scaler")) {
        model.scaler.min = j["scaler"].at("min").get<std::vector<double>>();
        model.scaler.max = j["scaler"].at("max").get<std::vector<double>>();
        if (model.scaler.min.size() != model.n_inputs ||
            model.scaler.max.size() != model.n_inputs)
            throw std::runtime_error("model file: scaler dimension mismatch");
    }
    const auto& s = j.at("schedule");
    model.schedule.alpha0 = s.at("alpha0").get<double>();
    model.schedule.iterations = s.at("T").get<std::uint64_t>();
    model.schedule.sigma0 = s.at("sigma0").get<double>();
    model.schedule.sigma_final = s.at("sigma_final").get<double>();
    model.schedule.seed = j.at("seed").get<std::uint64_t>();
    return model;
}

SomModel load_model_file(const std::string& path) {
    auto in = open_in(path);
    return load_model(in);
}

void save_clustermap(std::ostream& out, const ClusterMap& map) {
    nlohmann::ordered_json j;
    j["version"] = kClusterMapVersion;
    j["threshold"] = map.threshold_fraction;
    j["assignment"] = map.assignment;
    j["border"] = map.is_border;
    auto& clusters = j["clusters"] = nlohmann::json::array();
    for (const auto& c : map.clusters)
        clusters.push_back({{"id", c.id},
                            {"label", c.label},
                            {"members", c.members},
                            {"avg", c.fuel_avg},
                            {"var", c.fuel_var},
                            {"max", c.fuel_max},
                            {"windows", c.window_count}});
    out << j.dump(2) << '\n';
}

void save_clustermap(const std::string& path, const ClusterMap& map) {
    auto out = open_out(path);
    save_clustermap(out, map);
}

ClusterMap load_clustermap(std::istream& in) {
    nlohmann::json j;
    in >> j;
    if (j.at("version").get<int>() != kClusterMapVersion)
        throw std::runtime_error("clustermap file: unsupported version");
    ClusterMap map;
    map.threshold_fraction = j.at("threshold").get<double>();
    map.assignment = j.at("assignment").get<std::vector<int>>();
    map.is_border = j.at("border").get<std::vector<bool>>();
    for (const auto& c : j.at("clusters")) {
        Cluster cluster;
        cluster.id = c.at("id").get<int>();
        cluster.label = c.at("label").get<std::string>();
        cluster.members = c.at("members").get<std::vector<std::size_t>>();
        cluster.fuel_avg = c.at("avg").get<double>();
        cluster.fuel_var = c.at("var").get<double>();
        cluster.fuel_max = c.at("max").get<double>();
        cluster.window_count = c.value("windows", std::size_t{0});
        map.clusters.push_back(std::move(cluster));
    }
    for (int a : map.assignment)
        if (a < 0 || a >= static_cast<int>(map.clusters.size()))
            throw std::runtime_error("clustermap file: assignment references unknown cluster");
    return map;
}

ClusterMap load_clustermap_file(const std::string& path) {
    auto in = open_in(path);
    return load_clustermap(in);
}

}  // namespace ecosom
