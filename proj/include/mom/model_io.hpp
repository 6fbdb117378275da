#pragma once

// Fitted models as JSON:
//   {"method": "mom", "hyperparams": "lambda=0.001;radius=0", "theta": [[...], ...],
//    "kernel": {"kind": "rbf", "gamma": 1, "degree": 2, "normalize": true,
//               "scale": 3.2, "anchors": [[...], ...]}}
// "kernel" is present only for kernelized methods.

#include <fstream>
#include <string>

#include "mom/dataset_io.hpp"
#include "mom/harness.hpp"

namespace mom {

struct SavedModel {
  std::string method;
  std::string hyperparams;
  FittedModel model;
};

inline json model_to_json(const SavedModel& m) {
  json j;
  j["method"] = m.method;
  j["hyperparams"] = m.hyperparams;
  j["theta"] = matrix_to_json(m.model.theta);
  if (m.model.features) {
    const KernelTransformer& tf = *m.model.features;
    j["kernel"] = {{"kind", to_string(tf.spec().kind)},
                   {"gamma", tf.spec().gamma},
                   {"degree", tf.spec().degree},
                   {"normalize", tf.spec().normalize},
                   {"scale", tf.scale()},
                   {"anchors", matrix_to_json(tf.anchors())}};
  }
  return j;
}

inline SavedModel model_from_json(const json& j) {
  try {
    SavedModel m;
    m.method = j.at("method").get<std::string>();
    m.hyperparams = j.value("hyperparams", std::string());
    m.model.theta = matrix_from_json(j.at("theta"));
    if (j.contains("kernel")) {
      const json& k = j["kernel"];
      KernelSpec spec{parse_kernel_kind(k.at("kind").get<std::string>()),
                      k.at("gamma").get<double>(), k.at("degree").get<int>(),
                      k.value("normalize", true)};
      KernelTransformer tf(spec, matrix_from_json(k.at("anchors")));
      tf.set_scale(k.at("scale").get<double>());
      m.model.features = std::move(tf);
    }
    return m;
  } catch (const json::exception& e) {
    throw DatasetError(std::string("malformed model: ") + e.what());
  }
}

inline void write_model(const SavedModel& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DatasetError("cannot open '" + path + "' for writing");
  os << model_to_json(m).dump(2) << '\n';
  if (!os) throw DatasetError("write to '" + path + "' failed");
}

inline SavedModel read_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DatasetError("cannot open '" + path + "' for reading");
  try {
    return model_from_json(json::parse(is));
  } catch (const json::parse_error& e) {
    throw DatasetError("model '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace mom
