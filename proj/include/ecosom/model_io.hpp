#pragma once

#include <iosfwd>
#include <string>

#include "ecosom/somanalysis.hpp"
#include "ecosom/somcore.hpp"

namespace ecosom {

/// Versioned model document:
///   {version, grid:{rows,cols,layout:"hex"}, n_inputs, weights:[[...]],
///    scaler:{min:[...],max:[...]}, schedule:{alpha0,T,sigma0,sigma_final}, seed}
/// Weights are stored in row-major neuron order, the same order that
/// addresses the accelerator ROM.
void save_model(std::ostream& out, const SomModel& model);
void save_model(const std::string& path, const SomModel& model);
SomModel load_model(std::istream& in);
SomModel load_model_file(const std::string& path);

/// Versioned cluster-map document:
///   {version, threshold, assignment:[...], border:[...],
///    clusters:[{id,label,avg,var,max}]}
/// Neuron order matches the model file.
void save_clustermap(std::ostream& out, const ClusterMap& map);
void save_clustermap(const std::string& path, const ClusterMap& map);
ClusterMap load_clustermap(std::istream& in);
ClusterMap load_clustermap_file(const std::string& path);

}  // namespace ecosom
