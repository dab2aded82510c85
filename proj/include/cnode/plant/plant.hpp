#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <cnode/errors.hpp>
#include <cnode/numerics/csv.hpp>
#include <cnode/numerics/matrix.hpp>
#include <cnode/numerics/rng.hpp>

namespace cnode::plant {

inline constexpr std::size_t kStateDim = 4;
inline constexpr std::size_t kDisturbanceDim = 3;
inline constexpr std::size_t kStepsPerDay = 288;
inline constexpr std::size_t kStepsPerWeek = 2016;
/// Zero-based column of the measured state (room temperature, x4).
inline constexpr std::size_t kObservedState = 3;

/// Shape of the synthetic excitation and weather signals.
struct SignalSettings {
  double mdot_max = 0.2;      // kg/s
  double delta_t_max = 10.0;  // K
  double ambient_mean = 10.0;
  double ambient_amplitude = 8.0;
  double ambient_weekly_drift = 2.0;
  double solar_peak = 600.0;
  double gains_peak = 300.0;
  bool noise = true;
  double ambient_noise = 0.5;
  double solar_noise = 20.0;
  double gains_noise = 10.0;
};

/// Ground-truth building: x' = A x + B u + E d with u = a H b + h.
struct PlantSystem {
  Matrix A;  // 4x4, nonnegative
  Matrix B;  // 4x1
  Matrix E;  // 4x3
  double H = 4184.0;
  double h = 0.0;
  double sample_seconds = 300.0;
  SignalSettings signals;

  /// Largest heat flow the nominal signals can produce in magnitude.
  double u_max() const { return signals.mdot_max * H * signals.delta_t_max; }
};

/// Exogenous sequences; d has one row per step (ambient, solar, internal gains).
struct SignalSet {
  std::vector<double> a;
  std::vector<double> b;
  Matrix d;

  std::size_t size() const noexcept { return a.size(); }

  void validate() const {
    if (b.size() != a.size() || d.rows() != a.size() || (d.cols() != kDisturbanceDim && !a.empty())) {
      throw DimensionError("SignalSet: sequences differ in length or disturbance width");
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k] < 0.0) throw ValidationError("SignalSet: negative mass flow at step " + std::to_string(k));
    }
  }

  /// Steps [first, first + count).
  SignalSet slice(std::size_t first, std::size_t count) const {
    if (first + count > size()) throw DimensionError("SignalSet::slice: range exceeds length");
    SignalSet s;
    s.a.assign(a.begin() + static_cast<std::ptrdiff_t>(first), a.begin() + static_cast<std::ptrdiff_t>(first + count));
    s.b.assign(b.begin() + static_cast<std::ptrdiff_t>(first), b.begin() + static_cast<std::ptrdiff_t>(first + count));
    s.d = block(d, first, first + count, 0, d.cols());
    return s;
  }
};

/**
 * One contiguous week of simulation. states holds steps() + 1 rows so every
 * transition inside the week has its successor; signals has the same length
 * (the last row drives nothing inside the partition).
 */
struct Partition {
  std::string name;
  std::size_t start_step = 0;
  Matrix states;
  SignalSet signals;

  std::size_t steps() const noexcept { return states.rows() == 0 ? 0 : states.rows() - 1; }
  Matrix x0() const { return block(states, 0, 1, 0, states.cols()); }
};

struct Dataset {
  Partition train;
  Partition val;
  Partition test;
  std::size_t observed_index = kObservedState;

  const Partition& partition(const std::string& name) const {
    if (name == "train") return train;
    if (name == "val") return val;
    if (name == "test") return test;
    throw ArgumentError("unknown partition '" + name + "'");
  }
};

/**
 * Wall, ceiling, floor, room. A is lower triangular so its spectrum is its
 * diagonal (1.0, 0.99, 0.98, 0.25); the room row collects the envelope
 * couplings, the floor being the weakest. Heat input reaches the room only.
 */
inline PlantSystem build_default_plant() {
  PlantSystem p;
  p.A = Matrix::from_rows({
      {1.00, 0.00, 0.000, 0.00},
      {0.00, 0.99, 0.000, 0.00},
      {0.00, 0.00, 0.980, 0.00},
      {0.02, 0.02, 0.005, 0.25},
  });
  p.B = Matrix::column({0.0, 0.0, 0.0, 4e-4});
  p.E = Matrix::from_rows({
      {1e-4, 5e-7, 0.00},
      {0.02, 0.00, 0.00},
      {0.00, 0.00, 0.00},
      {0.70, 0.01, 0.02},
  });
  p.H = 4184.0;  // specific heat of water, J/(kg K)
  p.h = 0.0;
  return p;
}

/// Day-periodic heating excitation and synthetic weather, T steps of 300 s.
inline SignalSet generate_signals(std::size_t steps, SeededRng& rng, const SignalSettings& cfg = {}) {
  if (steps == 0) throw ArgumentError("generate_signals: steps must be positive");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double day = static_cast<double>(kStepsPerDay);
  const double week = static_cast<double>(kStepsPerWeek);
  SignalSet s;
  s.a.resize(steps);
  s.b.resize(steps);
  s.d = Matrix(steps, kDisturbanceDim);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k);
    s.a[k] = cfg.mdot_max * (1.0 + std::sin(two_pi * t / day)) / 2.0;
    s.b[k] = cfg.delta_t_max * std::cos(two_pi * t / day);

    // Three normals are drawn every step so the stream layout does not depend on the weather.
    const double n1 = rng.normal(), n2 = rng.normal(), n3 = rng.normal();
    const double noise = cfg.noise ? 1.0 : 0.0;

    // Ambient peaks mid-afternoon.
    double ambient = cfg.ambient_mean + cfg.ambient_amplitude * std::sin(two_pi * (t - 108.0) / day) +
                     cfg.ambient_weekly_drift * std::sin(two_pi * t / week);
    ambient += noise * cfg.ambient_noise * n1;

    // Half-wave rectified, daylight 06:00-18:00.
    const double sun = std::sin(two_pi * (t - 72.0) / day);
    double solar = sun > 0.0 ? cfg.solar_peak * sun + noise * cfg.solar_noise * n2 : 0.0;
    solar = std::max(solar, 0.0);

    // Occupancy roughly 08:00-20:00 with soft edges.
    double gains = 0.5 * cfg.gains_peak * (1.0 + std::tanh(4.0 * std::sin(two_pi * (t - 96.0) / day)));
    gains = std::max(gains + noise * cfg.gains_noise * n3, 0.0);

    s.d(k, 0) = ambient;
    s.d(k, 1) = solar;
    s.d(k, 2) = gains;
  }
  return s;
}

/// Algebraic heat input of the true system at one step.
inline double true_input(const PlantSystem& plant, double a, double b) { return a * plant.H * b + plant.h; }

/**
 * Iterates the true system for signals.size() steps from x0.
 * Returns (T + 1) x 4 states, row 0 equal to x0.
 */
inline Matrix simulate_truth(const PlantSystem& plant, const Matrix& x0, const SignalSet& signals) {
  if (x0.size() != kStateDim) throw DimensionError("simulate_truth: x0 must have 4 entries");
  if (!plant.A.same_shape(Matrix(kStateDim, kStateDim)) || plant.B.rows() != kStateDim ||
      plant.E.rows() != kStateDim || plant.E.cols() != signals.d.cols()) {
    throw DimensionError("simulate_truth: plant matrices do not conform");
  }
  if (signals.b.size() != signals.size() || signals.d.rows() != signals.size()) {
    throw DimensionError("simulate_truth: signal sequences differ in length");
  }
  const std::size_t steps = signals.size();
  const std::size_t nd = signals.d.cols();
  Matrix x(steps + 1, kStateDim);
  for (std::size_t i = 0; i < kStateDim; ++i) x(0, i) = x0[i];
  for (std::size_t k = 0; k < steps; ++k) {
    const double u = true_input(plant, signals.a[k], signals.b[k]);
    for (std::size_t i = 0; i < kStateDim; ++i) {
      double v = plant.B(i, 0) * u;
      for (std::size_t j = 0; j < kStateDim; ++j) v += plant.A(i, j) * x(k, j);
      for (std::size_t j = 0; j < nd; ++j) v += plant.E(i, j) * signals.d(k, j);
      if (!std::isfinite(v)) throw NumericError("simulate_truth: state diverged at step " + std::to_string(k + 1));
      x(k + 1, i) = v;
    }
  }
  return x;
}

/// Weeks 2, 3, 4 of a simulation become train, val, test.
inline Dataset split_weeks(const Matrix& states, const SignalSet& signals) {
  const std::size_t need = 4 * kStepsPerWeek + 1;
  if (signals.size() < need || states.rows() < need) {
    throw ValidationError("dataset needs " + std::to_string(need) + " steps of signals, got " +
                          std::to_string(signals.size()));
  }
  auto make = [&](const char* name, std::size_t week) {
    Partition p;
    p.name = name;
    p.start_step = week * kStepsPerWeek;
    p.states = block(states, p.start_step, p.start_step + kStepsPerWeek + 1, 0, kStateDim);
    p.signals = signals.slice(p.start_step, kStepsPerWeek + 1);
    return p;
  };
  Dataset ds;
  ds.train = make("train", 1);
  ds.val = make("val", 2);
  ds.test = make("test", 3);
  return ds;
}

/// Simulates four weeks from 20 degC everywhere and splits off weeks 2-4.
inline Dataset make_dataset(const PlantSystem& plant, const SignalSet& signals) {
  signals.validate();
  const Matrix x0(kStateDim, 1, 20.0);
  const std::size_t steps = 4 * kStepsPerWeek + 1;
  if (signals.size() < steps) {
    throw ValidationError("make_dataset: need " + std::to_string(steps) + " signal rows, got " +
                          std::to_string(signals.size()));
  }
  const SignalSet used = signals.slice(0, steps);
  return split_weeks(simulate_truth(plant, x0, used), used);
}

inline Dataset make_dataset(const PlantSystem& plant, SeededRng& rng) {
  return make_dataset(plant, generate_signals(4 * kStepsPerWeek + 1, rng, plant.signals));
}

// ---- CSV exchange --------------------------------------------------------------

inline void write_signals_csv(const std::filesystem::path& path, const SignalSet& s) {
  auto out = open_for_write(path);
  out << "a,b,d1,d2,d3\n";
  for (std::size_t k = 0; k < s.size(); ++k) {
    out << format_double(s.a[k]) << ',' << format_double(s.b[k]);
    for (std::size_t j = 0; j < s.d.cols(); ++j) out << ',' << format_double(s.d(k, j));
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

namespace detail {
  inline std::vector<std::vector<double>> read_table(std::istream& in, const std::vector<std::string>& header,
                                                     const std::string& source) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw ParseError(source + ": missing header", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) throw ParseError(source + ": unexpected header '" + line + "'", 1);
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (fields[j] != header[j]) throw ParseError(source + ": unexpected header '" + line + "'", 1);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto f = split_fields(line);
      if (f.size() != header.size()) {
        throw ParseError(source + ": expected " + std::to_string(header.size()) + " fields", lineno);
      }
      std::vector<double> row;
      row.reserve(f.size());
      for (auto field : f) {
        const double v = parse_double(field, lineno);
        if (!std::isfinite(v)) throw ParseError(source + ": non-finite value", lineno);
        row.push_back(v);
      }
      rows.push_back(std::move(row));
    }
    return rows;
  }
}  // namespace detail

/// Reads `a,b,d1,d2,d3` with header; rejects malformed rows and negative mass flow.
inline SignalSet load_signals_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  const auto rows = detail::read_table(in, {"a", "b", "d1", "d2", "d3"}, path.string());
  SignalSet s;
  s.d = Matrix(rows.size(), kDisturbanceDim);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k][0] < 0.0) {
      throw ValidationError(path.string() + ": negative mass flow at line " + std::to_string(k + 2));
    }
    s.a.push_back(rows[k][0]);
    s.b.push_back(rows[k][1]);
    for (std::size_t j = 0; j < kDisturbanceDim; ++j) s.d(k, j) = rows[k][2 + j];
  }
  return s;
}

inline void write_partition_csv(const std::filesystem::path& path, const Partition& p) {
  auto out = open_for_write(path);
  out << "x1,x2,x3,x4,a,b,d1,d2,d3\n";
  for (std::size_t k = 0; k < p.states.rows(); ++k) {
    for (std::size_t i = 0; i < kStateDim; ++i) out << format_double(p.states(k, i)) << ',';
    out << format_double(p.signals.a[k]) << ',' << format_double(p.signals.b[k]);
    for (std::size_t j = 0; j < kDisturbanceDim; ++j) out << ',' << format_double(p.signals.d(k, j));
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline Partition load_partition_csv(const std::filesystem::path& path, const std::string& name,
                                    std::size_t start_step) {
  auto in = open_for_read(path);
  const auto rows =
      detail::read_table(in, {"x1", "x2", "x3", "x4", "a", "b", "d1", "d2", "d3"}, path.string());
  if (rows.size() < 2) throw ValidationError(path.string() + ": partition needs at least 2 rows");
  Partition p;
  p.name = name;
  p.start_step = start_step;
  p.states = Matrix(rows.size(), kStateDim);
  p.signals.d = Matrix(rows.size(), kDisturbanceDim);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < kStateDim; ++i) p.states(k, i) = rows[k][i];
    p.signals.a.push_back(rows[k][4]);
    p.signals.b.push_back(rows[k][5]);
    for (std::size_t j = 0; j < kDisturbanceDim; ++j) p.signals.d(k, j) = rows[k][6 + j];
  }
  p.signals.validate();
  return p;
}

inline void write_dataset(const std::filesystem::path& dir, const Dataset& ds) {
  write_partition_csv(dir / "train.csv", ds.train);
  write_partition_csv(dir / "val.csv", ds.val);
  write_partition_csv(dir / "test.csv", ds.test);
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  ds.train = load_partition_csv(dir / "train.csv", "train", kStepsPerWeek);
  ds.val = load_partition_csv(dir / "val.csv", "val", 2 * kStepsPerWeek);
  ds.test = load_partition_csv(dir / "test.csv", "test", 3 * kStepsPerWeek);
  return ds;
}

}  // namespace cnode::plant
