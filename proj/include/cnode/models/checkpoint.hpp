#pragma once

#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include <json.hpp>

#include <cnode/errors.hpp>
#include <cnode/models/model.hpp>
#include <cnode/numerics/csv.hpp>

namespace cnode::models {

using json = nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.values().begin(), m.values().end())}};
}

inline Matrix matrix_from_json(const json& j) {
  try {
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(), j.at("data").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("matrix: ") + e.what(), 0);
  }
}

/// JSON has no Inf/NaN; non-finite metrics are stored as null.
inline json metric_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double metric_from_json(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

inline json spec_to_json(const ModelSpec& s) {
  return json{
      {"variant", to_string(s.variant)},
      {"constrained", s.constrained},
      {"transition", to_string(s.transition)},
      {"hidden_units", s.hidden_units},
      {"state_dim", s.state_dim},
      {"disturbance_dim", s.disturbance_dim},
      {"white_H", s.white_H},
      {"white_h", s.white_h},
      {"nominal_H", s.nominal_H},
      {"scaling",
       {{"a", s.scaling.a}, {"b", s.scaling.b}, {"u", s.scaling.u}, {"d", std::vector<double>(s.scaling.d.begin(), s.scaling.d.end())}}},
  };
}

inline ModelSpec spec_from_json(const json& j) {
  try {
    ModelSpec s;
    s.variant = parse_variant(j.at("variant").get<std::string>());
    s.constrained = j.at("constrained").get<bool>();
    s.transition = parse_transition(j.at("transition").get<std::string>());
    s.hidden_units = j.at("hidden_units").get<std::size_t>();
    s.state_dim = j.at("state_dim").get<std::size_t>();
    s.disturbance_dim = j.at("disturbance_dim").get<std::size_t>();
    s.white_H = j.at("white_H").get<double>();
    s.white_h = j.at("white_h").get<double>();
    s.nominal_H = j.at("nominal_H").get<double>();
    const json& sc = j.at("scaling");
    s.scaling.a = sc.at("a").get<double>();
    s.scaling.b = sc.at("b").get<double>();
    s.scaling.u = sc.at("u").get<double>();
    const auto d = sc.at("d").get<std::vector<double>>();
    if (d.size() != s.scaling.d.size()) throw ConfigError("checkpoint: disturbance scaling has wrong length");
    std::copy(d.begin(), d.end(), s.scaling.d.begin());
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model spec: ") + e.what(), 0);
  }
}

struct Checkpoint {
  ModelSpec spec;
  ParamSet params;
  json meta = json::object();  // cell key, training settings, metrics
};

inline json checkpoint_to_json(const Checkpoint& c) {
  json params = json::array();
  for (const auto& [name, m] : c.params) params.push_back(json{{"name", name}, {"value", matrix_to_json(m)}});
  return json{{"format", "cnode-checkpoint"}, {"version", 1}, {"spec", spec_to_json(c.spec)}, {"params", params}, {"meta", c.meta}};
}

inline Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "cnode-checkpoint") throw ParseError("not a checkpoint document", 0);
    Checkpoint c;
    c.spec = spec_from_json(j.at("spec"));
    for (const auto& p : j.at("params")) c.params.set(p.at("name").get<std::string>(), matrix_from_json(p.at("value")));
    check_params(c.spec, c.params);
    if (j.contains("meta")) c.meta = j.at("meta");
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what(), 0);
  }
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  auto out = open_for_write(path);
  out << checkpoint_to_json(c).dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
  return checkpoint_from_json(j);
}

}  // namespace cnode::models
