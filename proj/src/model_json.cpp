#include "kneetex/reports.hpp"

#include "kneetex/errors.hpp"
#include "kneetex/svm.hpp"
#include "kneetex/version.hpp"

#include <json.hpp>

#include <fstream>

namespace kneetex {

namespace {

using nlohmann::json;

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void write_model_json(const std::filesystem::path& path, const LinearModel& model) {
  json j;
  j["format"] = "kneetex-linear-svm";
  j["version"] = kVersion;
  j["weights"] = to_vector(model.weights);
  j["bias"] = model.bias;
  j["C"] = model.C;
  j["feature_names"] = model.feature_names;
  j["standardizer"]["means"] = to_vector(model.standardizer.means);
  j["standardizer"]["stds"] = to_vector(model.standardizer.stds);
  j["standardizer"]["degenerate"] = model.standardizer.degenerate;
  j["duality_gap"] = model.duality_gap;
  j["epochs"] = model.epochs;
  j["converged"] = model.converged;

  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << j.dump(2) << "\n";
  if (!os) throw InputError("write failed: " + path.string());
}

LinearModel read_model_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "kneetex-linear-svm")
    throw InputError(path.string() + ": not a kneetex model file");

  LinearModel model;
  try {
    model.weights = from_vector(j.at("weights").get<std::vector<double>>());
    model.bias = j.at("bias").get<double>();
    model.C = j.at("C").get<double>();
    model.feature_names = j.value("feature_names", std::vector<std::string>{});
    model.standardizer.means =
        from_vector(j.at("standardizer").at("means").get<std::vector<double>>());
    model.standardizer.stds =
        from_vector(j.at("standardizer").at("stds").get<std::vector<double>>());
    model.standardizer.degenerate =
        j.at("standardizer").at("degenerate").get<std::vector<std::uint8_t>>();
    model.duality_gap = j.value("duality_gap", 0.0);
    model.epochs = j.value("epochs", 0);
    model.converged = j.value("converged", false);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  if (model.standardizer.means.size() != model.weights.size() ||
      model.standardizer.stds.size() != model.weights.size() ||
      model.standardizer.degenerate.size() !=
          static_cast<std::size_t>(model.weights.size()))
    throw InputError(path.string() + ": inconsistent model dimensions");
  return model;
}

}  // namespace kneetex
