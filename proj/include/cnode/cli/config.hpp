#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <cnode/constraints/bounds.hpp>
#include <cnode/errors.hpp>
#include <cnode/models/model.hpp>
#include <cnode/numerics/matrix.hpp>
#include <cnode/plant/plant.hpp>
#include <cnode/training/sweep.hpp>

namespace cnode::cli {

using json = nlohmann::json;

enum class Scale { desk, paper };

inline std::string to_string(Scale s) { return s == Scale::paper ? "paper" : "desk"; }

inline Scale parse_scale(const std::string& s) {
  if (s == "desk") return Scale::desk;
  if (s == "paper") return Scale::paper;
  throw ConfigError("scale must be 'desk' or 'paper', got '" + s + "'");
}

/// Epochs, restarts and learning rates implied by a preset.
struct ScalePreset {
  std::size_t epochs;
  std::size_t restarts;
  std::vector<double> learning_rates;
};

inline ScalePreset preset(Scale s) {
  if (s == Scale::paper) return {15000, 30, {0.001, 0.003, 0.01, 0.03}};
  return {2000, 3, {0.003, 0.01, 0.03}};
}

/**
 * Everything a command needs. Optional fields fall back to the plant
 * defaults or to the scale preset; explicit values always win.
 */
struct RunConfig {
  std::string run_id;  // empty: derived from seed and scale
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;
  Scale scale = Scale::desk;
  std::size_t jobs = 0;  // 0: one per hardware thread

  struct PlantOverrides {
    std::optional<Matrix> A, B, E;
    std::optional<double> H, h;
    std::optional<bool> noise;
  } plant;

  std::string dataset_source = "synthetic";  // synthetic | signals | csv
  std::filesystem::path dataset_path;

  std::vector<std::string> models{"black", "gray", "white", "cblack", "cgray", "cwhite"};
  std::vector<std::size_t> horizons{8, 16, 32, 64, 128};
  std::optional<std::vector<double>> learning_rates;
  std::optional<std::size_t> restarts;
  std::optional<std::size_t> epochs;
  double weight_decay = 0.01;
  std::size_t stride = 1;
  std::size_t eval_every = 100;

  std::optional<double> x_lower, x_upper, u_lower, u_upper;
  double lambda = 1.0;
  double mu = 1.0;
  std::filesystem::path state_bounds_csv;
  std::optional<double> envelope_margin;  // bounds from the training-state range

  std::string resolved_run_id() const {
    return run_id.empty() ? "seed" + std::to_string(seed) + "-" + to_string(scale) : run_id;
  }
  std::filesystem::path run_dir() const { return out / resolved_run_id(); }
  std::filesystem::path data_dir() const { return run_dir() / "data"; }
  std::filesystem::path checkpoint_dir() const { return run_dir() / "checkpoints"; }
};

namespace detail {

inline void require_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

inline Matrix matrix_field(const json& obj, const char* key, std::size_t rows, std::size_t cols) {
  const auto data = get<std::vector<std::vector<double>>>(obj, key, "plant");
  if (data.size() != rows) throw ConfigError(std::string("plant.") + key + " must have " + std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (data[i].size() != cols) {
      throw ConfigError(std::string("plant.") + key + " must have " + std::to_string(cols) + " columns");
    }
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = data[i][j];
  }
  return m;
}

}  // namespace detail

/// Strict parse: unknown keys anywhere are an error.
inline RunConfig parse_config(const json& j) {
  using detail::get;
  detail::require_keys(j, "config",
                       {"run_id", "out", "seed", "scale", "jobs", "plant", "dataset", "models", "sweep", "bounds"});
  RunConfig c;
  if (j.contains("run_id")) c.run_id = get<std::string>(j, "run_id", "config");
  if (j.contains("out")) c.out = get<std::string>(j, "out", "config");
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed", "config");
  if (j.contains("scale")) c.scale = parse_scale(get<std::string>(j, "scale", "config"));
  if (j.contains("jobs")) c.jobs = get<std::size_t>(j, "jobs", "config");

  if (j.contains("plant")) {
    const json& p = j.at("plant");
    detail::require_keys(p, "plant", {"A", "B", "E", "H", "h", "noise"});
    if (p.contains("A")) c.plant.A = detail::matrix_field(p, "A", plant::kStateDim, plant::kStateDim);
    if (p.contains("B")) c.plant.B = detail::matrix_field(p, "B", plant::kStateDim, 1);
    if (p.contains("E")) c.plant.E = detail::matrix_field(p, "E", plant::kStateDim, plant::kDisturbanceDim);
    if (p.contains("H")) c.plant.H = get<double>(p, "H", "plant");
    if (p.contains("h")) c.plant.h = get<double>(p, "h", "plant");
    if (p.contains("noise")) c.plant.noise = get<bool>(p, "noise", "plant");
  }
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    detail::require_keys(d, "dataset", {"source", "path"});
    if (d.contains("source")) c.dataset_source = get<std::string>(d, "source", "dataset");
    if (d.contains("path")) c.dataset_path = get<std::string>(d, "path", "dataset");
  }
  if (j.contains("models")) c.models = get<std::vector<std::string>>(j, "models", "config");
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    detail::require_keys(s, "sweep", {"N", "lr", "restarts", "epochs", "weight_decay", "stride", "eval_every"});
    if (s.contains("N")) c.horizons = get<std::vector<std::size_t>>(s, "N", "sweep");
    if (s.contains("lr")) c.learning_rates = get<std::vector<double>>(s, "lr", "sweep");
    if (s.contains("restarts")) c.restarts = get<std::size_t>(s, "restarts", "sweep");
    if (s.contains("epochs")) c.epochs = get<std::size_t>(s, "epochs", "sweep");
    if (s.contains("weight_decay")) c.weight_decay = get<double>(s, "weight_decay", "sweep");
    if (s.contains("stride")) c.stride = get<std::size_t>(s, "stride", "sweep");
    if (s.contains("eval_every")) c.eval_every = get<std::size_t>(s, "eval_every", "sweep");
  }
  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    detail::require_keys(b, "bounds", {"x_lower", "x_upper", "u_lower", "u_upper", "lambda", "mu", "state_csv", "envelope_margin"});
    if (b.contains("x_lower")) c.x_lower = get<double>(b, "x_lower", "bounds");
    if (b.contains("x_upper")) c.x_upper = get<double>(b, "x_upper", "bounds");
    if (b.contains("u_lower")) c.u_lower = get<double>(b, "u_lower", "bounds");
    if (b.contains("u_upper")) c.u_upper = get<double>(b, "u_upper", "bounds");
    if (b.contains("lambda")) c.lambda = get<double>(b, "lambda", "bounds");
    if (b.contains("mu")) c.mu = get<double>(b, "mu", "bounds");
    if (b.contains("state_csv")) c.state_bounds_csv = get<std::string>(b, "state_csv", "bounds");
    if (b.contains("envelope_margin")) c.envelope_margin = get<double>(b, "envelope_margin", "bounds");
  }
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

// ---- resolution ---------------------------------------------------------------

inline plant::PlantSystem make_plant(const RunConfig& c) {
  plant::PlantSystem p = plant::build_default_plant();
  if (c.plant.A) p.A = *c.plant.A;
  if (c.plant.B) p.B = *c.plant.B;
  if (c.plant.E) p.E = *c.plant.E;
  if (c.plant.H) p.H = *c.plant.H;
  if (c.plant.h) p.h = *c.plant.h;
  if (c.plant.noise) p.signals.noise = *c.plant.noise;
  require_finite(p.A, "plant.A");
  require_finite(p.B, "plant.B");
  require_finite(p.E, "plant.E");
  if (!(p.H > 0.0) || !std::isfinite(p.h)) throw ConfigError("plant.H must be positive and plant.h finite");
  return p;
}

/// `data` is needed only when the config asks for envelope bounds.
inline constraints::BoundSpec make_bounds(const RunConfig& c, const plant::PlantSystem& p,
                                          const plant::Dataset* data = nullptr) {
  constraints::BoundSpec b = constraints::default_bounds(p);
  if (c.envelope_margin) {
    if (!c.state_bounds_csv.empty()) throw ConfigError("bounds.envelope_margin and bounds.state_csv are exclusive");
    if (data == nullptr) throw ConfigError("bounds.envelope_margin needs the dataset");
    constraints::set_envelope(b, data->train.states, *c.envelope_margin);
  }
  if (!c.state_bounds_csv.empty()) {
    auto [lo, hi] = constraints::load_state_bounds_csv(c.state_bounds_csv);
    b.x_lower = std::move(lo);
    b.x_upper = std::move(hi);
  }
  if (c.x_lower) b.x_lower.fill(*c.x_lower);
  if (c.x_upper) b.x_upper.fill(*c.x_upper);
  if (c.u_lower) b.u_lower = *c.u_lower;
  if (c.u_upper) b.u_upper = *c.u_upper;
  b.lambda = c.lambda;
  b.mu = c.mu;
  b.validate();
  return b;
}

inline training::SweepPlan make_plan(const RunConfig& c, const plant::PlantSystem& p,
                                     const plant::Dataset* data = nullptr) {
  const ScalePreset pre = preset(c.scale);
  training::SweepPlan plan;
  plan.labels = c.models;
  plan.horizons = c.horizons;
  plan.learning_rates = c.learning_rates.value_or(pre.learning_rates);
  plan.restarts = c.restarts.value_or(pre.restarts);
  plan.epochs = c.epochs.value_or(pre.epochs);
  plan.weight_decay = c.weight_decay;
  plan.stride = c.stride;
  plan.eval_every = c.eval_every;
  plan.seed = c.seed;
  plan.bounds = make_bounds(c, p, data);
  for (const auto& label : plan.labels) models::spec_from_label(label, p);  // rejects unknown labels early
  plan.validate();
  return plan;
}

}  // namespace cnode::cli
