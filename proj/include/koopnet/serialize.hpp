#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "koopnet/learners.hpp"

namespace koopnet {

/// Full-state linear predictor (plain EDMD) packaged with the subsystem
/// layout so per-subsystem errors can be reported.
struct EdmdModel {
  std::vector<int> dims;
  Dictionary dict;
  Eigen::MatrixXd K;
  double dt = 0.0;
};

using AnyModel =
    std::variant<GeneratorNetworkModel, OperatorNetworkModel, SedmdModel, LedmdModel, EdmdModel>;

nlohmann::json graph_to_json(const Digraph& g);     // {"s": int, "arcs": [[tail, head], ...]} 1-based
Digraph graph_from_json(const nlohmann::json& j);

nlohmann::json dictionary_to_json(const Dictionary& d);
Dictionary dictionary_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M);  // row-major, full precision
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

/// Tagged container holding matrices, dictionaries, graph and seeds,
/// sufficient to reload and predict bit-identically.
nlohmann::json model_to_json(const AnyModel& model);
AnyModel model_from_json(const nlohmann::json& j);

void save_model(const AnyModel& model, const std::string& path);
AnyModel load_model(const std::string& path);

}  // namespace koopnet
