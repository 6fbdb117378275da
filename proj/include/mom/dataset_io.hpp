#pragma once

// JSON-lines datasets, one record per sample:
//   {"z": [...], "A": [[...], ...], "b": [...], "c": [...], "x_star": [...],
//    "basis": [...], "meta": {"family": "sp", "seed": 1, "noise": {...}}}
// "c" may be absent for inverse-problem data.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mom/datagen.hpp"

namespace mom {

using json = nlohmann::json;

struct DatasetMeta {
  Family family = Family::Knapsack;
  std::uint64_t seed = 0;
  NoiseSpec noise;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline json vector_to_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Vector vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

inline json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) rows.push_back(vector_to_json(M.row(i).transpose()));
  return rows;
}

inline Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw DatasetError("matrix must be a nonempty array of rows");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j.front().size());
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Vector r = vector_from_json(j[static_cast<std::size_t>(i)]);
    if (r.size() != cols) throw DatasetError("ragged matrix rows");
    M.row(i) = r.transpose();
  }
  return M;
}

inline json noise_to_json(const NoiseSpec& n) {
  return {{"deg", n.deg}, {"eps_bar", n.eps_bar}, {"alpha_bar", n.alpha_bar},
          {"eta_bar", n.eta_bar}};
}

inline NoiseSpec noise_from_json(const json& j) {
  NoiseSpec n;
  n.deg = j.value("deg", n.deg);
  n.eps_bar = j.value("eps_bar", n.eps_bar);
  n.alpha_bar = j.value("alpha_bar", n.alpha_bar);
  n.eta_bar = j.value("eta_bar", n.eta_bar);
  n.validate();
  return n;
}

inline json sample_to_json(const SupervisedSample& s, const DatasetMeta& meta,
                           bool include_cost = true) {
  json j;
  j["z"] = vector_to_json(s.sample.z);
  j["A"] = matrix_to_json(s.sample.A);
  j["b"] = vector_to_json(s.sample.b);
  if (include_cost && s.c.size()) j["c"] = vector_to_json(s.c);
  j["x_star"] = vector_to_json(s.sample.x_star);
  j["basis"] = s.sample.basic();
  j["meta"] = {{"family", to_string(meta.family)},
               {"seed", meta.seed},
               {"noise", noise_to_json(meta.noise)}};
  return j;
}

inline SupervisedSample sample_from_json(const json& j) {
  try {
    Matrix A = matrix_from_json(j.at("A"));
    const auto basic = j.at("basis").get<std::vector<Index>>();
    Basis basis(basic, A.cols());
    SupervisedSample s{make_training_sample(vector_from_json(j.at("x_star")), std::move(A),
                                            vector_from_json(j.at("b")),
                                            vector_from_json(j.at("z")), std::move(basis)),
                       Vector(), true};
    if (j.contains("c")) s.c = vector_from_json(j["c"]);
    return s;
  } catch (const json::exception& e) {
    throw DatasetError(std::string("malformed sample record: ") + e.what());
  }
}

inline DatasetMeta meta_from_json(const json& j) {
  DatasetMeta m;
  if (!j.contains("meta")) return m;
  const json& meta = j["meta"];
  m.family = parse_family(meta.value("family", std::string("fk")));
  m.seed = meta.value("seed", std::uint64_t{0});
  if (meta.contains("noise")) m.noise = noise_from_json(meta["noise"]);
  return m;
}

inline void write_dataset(std::ostream& os, const std::vector<SupervisedSample>& data,
                          const DatasetMeta& meta, bool include_cost = true) {
  for (const auto& s : data) os << sample_to_json(s, meta, include_cost).dump() << '\n';
}

inline void write_dataset(const std::string& path, const std::vector<SupervisedSample>& data,
                          const DatasetMeta& meta, bool include_cost = true) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DatasetError("cannot open '" + path + "' for writing");
  write_dataset(os, data, meta, include_cost);
  if (!os) throw DatasetError("write to '" + path + "' failed");
}

struct Dataset {
  std::vector<SupervisedSample> samples;
  DatasetMeta meta;
};

inline Dataset read_dataset(std::istream& is, const std::string& origin = "<stream>") {
  Dataset out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (out.samples.empty()) out.meta = meta_from_json(j);
      out.samples.push_back(sample_from_json(j));
    } catch (const std::exception& e) {
      throw DatasetError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline Dataset read_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DatasetError("cannot open '" + path + "' for reading");
  return read_dataset(is, path);
}

}  // namespace mom
