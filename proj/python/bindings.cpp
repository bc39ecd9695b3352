#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ecosom/accelemu.hpp"
#include "ecosom/advisor.hpp"
#include "ecosom/features.hpp"
#include "ecosom/fuelmodel.hpp"
#include "ecosom/model_io.hpp"
#include "ecosom/somanalysis.hpp"
#include "ecosom/somcore.hpp"

namespace py = pybind11;
using namespace ecosom;

namespace {

FeatureVector vec4(const std::vector<double>& v) {
    if (v.size() != kFeatureDim) throw std::invalid_argument("expected a 4-component vector");
    return FeatureVector::from_array({v[0], v[1], v[2], v[3]});
}

std::vector<FeatureWindow> windows_from(const std::vector<std::vector<double>>& vectors,
                                        const std::vector<double>& fuel) {
    if (vectors.size() != fuel.size())
        throw std::invalid_argument("vectors and fuel labels differ in length");
    std::vector<FeatureWindow> ws(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        ws[i].vector = vec4(vectors[i]);
        ws[i].fuel_l_per_100km = fuel[i];
    }
    return ws;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Driving-style SOM toolkit: map training, U-matrix clustering, "
              "eco-driving advice and fixed-point accelerator emulation";

    py::class_<TrainSchedule>(m, "TrainSchedule")
        .def(py::init<>())
        .def_readwrite("alpha0", &TrainSchedule::alpha0)
        .def_readwrite("iterations", &TrainSchedule::iterations)
        .def_readwrite("sigma0", &TrainSchedule::sigma0)
        .def_readwrite("sigma_final", &TrainSchedule::sigma_final)
        .def_readwrite("seed", &TrainSchedule::seed);

    py::class_<SomModel>(m, "SomModel")
        .def_property_readonly("n_inputs", [](const SomModel& s) { return s.n_inputs; })
        .def_property_readonly("grid", [](const SomModel& s) {
            return py::make_tuple(s.grid_rows, s.grid_cols);
        })
        .def_property_readonly("weights", [](const SomModel& s) { return s.weights; })
        .def("find_bmu",
             [](const SomModel& s, const std::vector<double>& x) {
                 auto r = find_bmu(s, x);
                 return py::make_tuple(r.index, r.dist_sq);
             })
        .def("quantization_error",
             [](const SomModel& s, const std::vector<std::vector<double>>& data) {
                 return quantization_error(s, data);
             })
        .def("save", [](const SomModel& s, const std::string& path) { save_model(path, s); })
        .def_static("load", [](const std::string& path) { return load_model_file(path); });

    m.def(
        "train",
        [](const std::vector<std::vector<double>>& data, std::size_t rows, std::size_t cols,
           const TrainSchedule& schedule) { return train(data, rows, cols, schedule); },
        py::arg("data"), py::arg("rows"), py::arg("cols"), py::arg("schedule") = TrainSchedule{});

    m.def("hex_positions", [](std::size_t rows, std::size_t cols) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : hex_positions(rows, cols)) out.emplace_back(p.x, p.y);
        return out;
    });

    m.def("u_matrix", [](const SomModel& model) { return u_matrix(model).neuron_value; });

    py::class_<ClusterMap>(m, "ClusterMap")
        .def_property_readonly("assignment", [](const ClusterMap& c) { return c.assignment; })
        .def_property_readonly("labels",
                               [](const ClusterMap& c) {
                                   std::vector<std::string> out;
                                   for (const auto& cl : c.clusters) out.push_back(cl.label);
                                   return out;
                               })
        .def_property_readonly("fuel_stats",
                               [](const ClusterMap& c) {
                                   py::list out;
                                   for (const auto& cl : c.clusters)
                                       out.append(py::dict(
                                           py::arg("label") = cl.label, py::arg("avg") = cl.fuel_avg,
                                           py::arg("var") = cl.fuel_var, py::arg("max") = cl.fuel_max));
                                   return out;
                               })
        .def("save", [](const ClusterMap& c, const std::string& path) { save_clustermap(path, c); })
        .def_static("load", [](const std::string& path) { return load_clustermap_file(path); });

    m.def(
        "cluster",
        [](const SomModel& model, const std::vector<std::vector<double>>& vectors,
           const std::vector<double>& fuel, double threshold) {
            auto map = threshold_clusters(u_matrix(model), threshold);
            auto ws = windows_from(vectors, fuel);
            label_clusters(map, model, ws);
            return map;
        },
        py::arg("model"), py::arg("vectors"), py::arg("fuel"), py::arg("threshold") = 0.55,
        "Threshold the U-matrix into connected clusters and label them by fuel");

    m.def("classify",
          [](const SomModel& model, const ClusterMap& map, const std::vector<double>& v) {
              return classify_window(model, map, vec4(v)).label;
          });

    m.def("advise", &advise, py::arg("label"), py::arg("scheme"));
    m.def("expected_reduction",
          [](const std::string& label, const ClusterMap& map) {
              return expected_reduction(label, map);
          });

    m.def(
        "co2_per_km",
        [](double l_per_100km, double fuel_density_gpl) {
            auto p = VehicleParams::defaults();
            p.fuel_density_gpl = fuel_density_gpl;
            return co2_per_km(l_per_100km, p);
        },
        py::arg("l_per_100km"), py::arg("fuel_density_gpl") = 835.0);

    m.def("quantize", [](const std::vector<double>& v) { return quantize(v); });
    m.def("dequantize", [](std::uint8_t q) { return dequantize(q); });
    m.def("tree_adder_cycles", &tree_adder_cycles);
    m.def("recursive_tree_compare", [](const std::vector<std::uint32_t>& d) {
        auto r = recursive_tree_compare(d);
        return py::make_tuple(r.min_index, r.rounds);
    });

    py::class_<AccelCore>(m, "AccelCore")
        .def_static("load", &AccelCore::load_model, py::arg("model"), py::arg("clusters"))
        .def_property_readonly("n_inputs", &AccelCore::n_inputs)
        .def_property_readonly("n_neurons", &AccelCore::n_neurons)
        .def("run",
             [](AccelCore& core, const std::vector<double>& x) {
                 const auto r = core.run_inference(x);
                 return py::dict(py::arg("bmu") = r.bmu_index, py::arg("distance") = r.bmu_distance,
                                 py::arg("cluster") = r.cluster_id,
                                 py::arg("cycles") = r.cycles_elapsed);
             })
        .def("crosscheck",
             [](AccelCore& core, const SomModel& model, const ClusterMap& map,
                const std::vector<std::vector<double>>& inputs) {
                 const auto r = crosscheck_float(core, model, map, inputs);
                 return py::dict(py::arg("total") = r.total, py::arg("bmu_matches") = r.bmu_matches,
                                 py::arg("cluster_matches") = r.cluster_matches,
                                 py::arg("guaranteed") = r.guaranteed,
                                 py::arg("guaranteed_mismatches") = r.guaranteed_mismatches,
                                 py::arg("near_tie_mismatches") = r.mismatched_inputs);
             })
        .def("rom_image", [](const AccelCore& core) {
            std::ostringstream os;
            write_rom_image(os, core);
            return py::bytes(os.str());
        });
}
