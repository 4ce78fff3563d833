#include "pokm/model_io.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace pokm {

std::string model_to_json(const ClusterModel<double>& model, const std::vector<std::string>& labels) {
  nlohmann::ordered_json j;
  j["schema"] = "pokm.model";
  j["version"] = kModelSchemaVersion;
  j["k"] = model.k();
  j["dim"] = model.means.cols();
  j["m"] = model.m;
  j["seed"] = model.seed;
  j["objective"] = model.objective;
  j["iterations"] = model.iterations;
  j["converged"] = model.converged;
  j["means"] = nlohmann::ordered_json::array();
  for (Index i = 0; i < model.means.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Index c = 0; c < model.means.cols(); ++c) row.push_back(model.means(i, c));
    j["means"].push_back(std::move(row));
  }
  j["assignments"] = nlohmann::ordered_json::array();
  for (const auto& a : model.assignments) {
    auto entry = nlohmann::ordered_json::array({a.primary});
    if (a.secondary) entry.push_back(*a.secondary);
    j["assignments"].push_back(std::move(entry));
  }
  if (!labels.empty()) j["labels"] = labels;
  return j.dump(2) + "\n";
}

ClusterModel<double> model_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("schema").get<std::string>() != "pokm.model") throw std::invalid_argument("not a pokm.model document");
    if (j.at("version").get<int>() != kModelSchemaVersion)
      throw std::invalid_argument("unsupported model schema version");

    ClusterModel<double> model;
    const auto k = j.at("k").get<Index>();
    const auto dim = j.at("dim").get<Index>();
    model.m = j.at("m").get<double>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.objective = j.at("objective").get<double>();
    model.iterations = j.at("iterations").get<int>();
    model.converged = j.at("converged").get<bool>();

    const auto& means = j.at("means");
    if (static_cast<Index>(means.size()) != k) throw std::invalid_argument("means must have k rows");
    model.means.resize(k, dim);
    for (Index i = 0; i < k; ++i) {
      const auto& row = means.at(static_cast<std::size_t>(i));
      if (static_cast<Index>(row.size()) != dim) throw std::invalid_argument("mean row has the wrong dimension");
      for (Index c = 0; c < dim; ++c) model.means(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    for (const auto& entry : j.at("assignments")) {
      if (entry.size() < 1 || entry.size() > 2) throw std::invalid_argument("an element belongs to one or two clusters");
      Assignment a = Assignment::single(entry.at(0).get<Index>());
      if (entry.size() == 2) a.secondary = entry.at(1).get<Index>();
      if (a.primary < 0 || a.primary >= k || (a.secondary && (*a.secondary < 0 || *a.secondary >= k)))
        throw std::invalid_argument("assignment references a cluster outside [0, k)");
      if (a.secondary && *a.secondary == a.primary) throw std::invalid_argument("dual assignment repeats a cluster");
      model.assignments.push_back(a);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed model JSON: ") + e.what());
  }
}

}  // namespace pokm
