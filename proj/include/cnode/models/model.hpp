#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <cnode/autodiff/tape.hpp>
#include <cnode/constraints/bounds.hpp>
#include <cnode/errors.hpp>
#include <cnode/numerics/matrix.hpp>
#include <cnode/numerics/rng.hpp>
#include <cnode/plant/plant.hpp>

namespace cnode::models {

enum class AlgebraicVariant { black, gray, white, srnn };

/// How the learned transition matrix is produced from its raw parameters.
enum class Transition {
  perron_frobenius,  // row softmax scaled by a damping factor in (0.9, 1)
  direct,            // raw parameter used as-is
};

inline std::string to_string(AlgebraicVariant v) {
  switch (v) {
    case AlgebraicVariant::black: return "black";
    case AlgebraicVariant::gray: return "gray";
    case AlgebraicVariant::white: return "white";
    case AlgebraicVariant::srnn: return "srnn";
  }
  return "?";
}

inline AlgebraicVariant parse_variant(const std::string& s) {
  if (s == "black") return AlgebraicVariant::black;
  if (s == "gray") return AlgebraicVariant::gray;
  if (s == "white") return AlgebraicVariant::white;
  if (s == "srnn") return AlgebraicVariant::srnn;
  throw ConfigError("unknown model variant '" + s + "'");
}

inline std::string to_string(Transition t) { return t == Transition::direct ? "direct" : "perron_frobenius"; }

inline Transition parse_transition(const std::string& s) {
  if (s == "perron_frobenius") return Transition::perron_frobenius;
  if (s == "direct") return Transition::direct;
  throw ConfigError("unknown transition kind '" + s + "'");
}

/**
 * Fixed normalisers applied to exogenous signals before they enter the model.
 * The model learns B and E against normalised inputs and produces a
 * normalised algebraic input; physical u is u_norm * u.
 */
struct InputScaling {
  double a = 0.2;
  double b = 10.0;
  double u = 0.2 * 4184.0 * 10.0;
  std::array<double, plant::kDisturbanceDim> d{20.0, 600.0, 300.0};

  static InputScaling from_plant(const plant::PlantSystem& p) {
    InputScaling s;
    s.a = p.signals.mdot_max;
    s.b = p.signals.delta_t_max;
    s.u = p.u_max();
    s.d = {p.signals.ambient_mean + p.signals.ambient_amplitude + p.signals.ambient_weekly_drift,
           p.signals.solar_peak, p.signals.gains_peak};
    return s;
  }
};

struct ModelSpec {
  AlgebraicVariant variant = AlgebraicVariant::gray;
  bool constrained = false;
  Transition transition = Transition::perron_frobenius;
  std::size_t hidden_units = 8;
  std::size_t state_dim = plant::kStateDim;
  std::size_t disturbance_dim = plant::kDisturbanceDim;
  double white_H = 4184.0;    // fixed constants of the white-box term
  double white_h = 0.0;
  double nominal_H = 4184.0;  // prior guess used to initialise the gray-box term
  InputScaling scaling;

  /// "black", "cgray", "srnn", ...
  std::string label() const { return (constrained ? "c" : "") + to_string(variant); }

  void validate() const {
    if (variant == AlgebraicVariant::srnn && transition != Transition::direct) {
      throw ConfigError("srnn uses an unconstrained transition matrix");
    }
    if (variant == AlgebraicVariant::srnn && constrained) {
      throw ConfigError("srnn is trained without inequality penalties");
    }
    if (state_dim == 0 || hidden_units == 0) throw ConfigError("model dimensions must be positive");
    if (!(scaling.a > 0.0 && scaling.b > 0.0 && scaling.u > 0.0)) throw ConfigError("input scaling must be positive");
    for (double v : scaling.d)
      if (!(v > 0.0)) throw ConfigError("disturbance scaling must be positive");
  }
};

/// Parses "black", "cgray", "srnn", ... into a spec with defaults for the rest.
inline ModelSpec spec_from_label(const std::string& label, const plant::PlantSystem& p) {
  ModelSpec s;
  std::string name = label;
  if (name.size() > 1 && name[0] == 'c' && name != "srnn") {
    s.constrained = true;
    name = name.substr(1);
  }
  s.variant = parse_variant(name);
  if (s.variant == AlgebraicVariant::srnn) s.transition = Transition::direct;
  s.white_H = p.H;
  s.white_h = p.h;
  s.nominal_H = p.H;
  s.scaling = InputScaling::from_plant(p);
  s.validate();
  return s;
}

/// Ordered, named parameter matrices.
class ParamSet {
 public:
  void set(const std::string& name, Matrix value) {
    for (auto& [n, m] : entries_) {
      if (n == name) {
        m = std::move(value);
        return;
      }
    }
    entries_.emplace_back(name, std::move(value));
  }

  bool contains(const std::string& name) const {
    for (const auto& e : entries_)
      if (e.first == name) return true;
    return false;
  }

  const Matrix& at(const std::string& name) const {
    for (const auto& e : entries_)
      if (e.first == name) return e.second;
    throw ConfigError("parameter '" + name + "' not present");
  }

  Matrix& at(const std::string& name) {
    for (auto& e : entries_)
      if (e.first == name) return e.second;
    throw ConfigError("parameter '" + name + "' not present");
  }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  std::size_t size() const noexcept { return entries_.size(); }

  bool all_finite() const {
    for (const auto& e : entries_)
      if (!cnode::all_finite(e.second)) return false;
    return true;
  }

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::vector<std::pair<std::string, Matrix>> entries_;
};

/// Expected parameter names and shapes for a spec, in canonical order.
inline std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> param_layout(const ModelSpec& s) {
  const std::size_t n = s.state_dim, h = s.hidden_units;
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> out;
  out.push_back({"A_raw", {n, n}});
  if (s.transition == Transition::perron_frobenius) out.push_back({"M_raw", {n, n}});
  out.push_back({"B", {n, 1}});
  out.push_back({"E", {n, s.disturbance_dim}});
  switch (s.variant) {
    case AlgebraicVariant::gray:
      out.push_back({"H_gain", {1, 1}});
      out.push_back({"h_offset", {1, 1}});
      break;
    case AlgebraicVariant::black:
      out.push_back({"W1", {h, 2}});
      out.push_back({"c1", {1, h}});
      out.push_back({"W2", {1, h}});
      out.push_back({"c2", {1, 1}});
      break;
    case AlgebraicVariant::srnn:
      out.push_back({"W1", {h, 2}});
      out.push_back({"W2", {1, h}});
      out.push_back({"W3", {1, 2}});
      break;
    case AlgebraicVariant::white: break;
  }
  return out;
}

/// Throws ConfigError when params do not carry exactly the spec's layout.
inline void check_params(const ModelSpec& s, const ParamSet& p) {
  const auto layout = param_layout(s);
  if (layout.size() != p.size()) {
    throw ConfigError("parameter set does not match " + s.label() + " (" + std::to_string(p.size()) + " entries, expected " +
                      std::to_string(layout.size()) + ")");
  }
  for (const auto& [name, shape] : layout) {
    if (!p.contains(name)) throw ConfigError(s.label() + ": missing parameter '" + name + "'");
    const Matrix& m = p.at(name);
    if (m.rows() != shape.first || m.cols() != shape.second) {
      throw ConfigError(s.label() + ": parameter '" + name + "' has shape " + m.shape_string());
    }
  }
}

// ---- Perron-Frobenius transition ----------------------------------------------

/// Damping M = 1 - 0.1 sigmoid(M_raw), then row_softmax(A_raw) * M elementwise.
inline Matrix pf_transition(const Matrix& a_raw, const Matrix& m_raw) {
  require_same_shape(a_raw, m_raw, "pf_transition");
  Matrix out(a_raw.rows(), a_raw.cols());
  for (std::size_t i = 0; i < a_raw.rows(); ++i) {
    const auto src = a_raw.row(i);
    const double mx = *std::max_element(src.begin(), src.end());
    double s = 0.0;
    for (std::size_t j = 0; j < src.size(); ++j) s += (out(i, j) = std::exp(src[j] - mx));
    for (std::size_t j = 0; j < src.size(); ++j) {
      const double x = m_raw(i, j);
      const double sig = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      out(i, j) = out(i, j) / s * (1.0 - 0.1 * sig);
    }
  }
  return out;
}

inline ad::Var pf_transition(ad::Var a_raw, ad::Var m_raw) {
  ad::Tape& t = *a_raw.tape;
  const Matrix& shape = t.value(m_raw);
  const ad::Var ones = t.constant(Matrix(shape.rows(), shape.cols(), 1.0));
  const ad::Var damping = ones - ad::scale(ad::sigmoid(m_raw), 0.1);
  return ad::hadamard(ad::row_softmax(a_raw), damping);
}

/// The transition matrix the model actually applies.
inline Matrix effective_transition(const ModelSpec& s, const ParamSet& p) {
  if (s.transition == Transition::direct) return p.at("A_raw");
  return pf_transition(p.at("A_raw"), p.at("M_raw"));
}

// ---- parameters on the tape ---------------------------------------------------

/// Tape handles for one model evaluation.
struct ModelVars {
  const ModelSpec* spec = nullptr;
  std::vector<std::pair<std::string, ad::Var>> leaves;  // same order as the ParamSet
  ad::Var transition_t;  // transpose of the effective transition
  ad::Var input_t;       // B', 1 x n
  ad::Var disturbance_t; // E', n_d x n

  ad::Var leaf(const std::string& name) const {
    for (const auto& [n, v] : leaves)
      if (n == name) return v;
    throw ConfigError("parameter '" + name + "' not bound");
  }
};

/// Records params as tape leaves; names in `frozen` become constants.
inline ModelVars bind_params(ad::Tape& tape, const ModelSpec& spec, const ParamSet& params,
                             const std::set<std::string>& frozen = {}) {
  check_params(spec, params);
  ModelVars mv;
  mv.spec = &spec;
  for (const auto& [name, value] : params) {
    mv.leaves.emplace_back(name, tape.leaf(value, !frozen.contains(name)));
  }
  const ad::Var a = spec.transition == Transition::direct ? mv.leaf("A_raw")
                                                          : pf_transition(mv.leaf("A_raw"), mv.leaf("M_raw"));
  mv.transition_t = ad::transpose(a);
  mv.input_t = ad::transpose(mv.leaf("B"));
  mv.disturbance_t = ad::transpose(mv.leaf("E"));
  return mv;
}

// ---- algebraic term -----------------------------------------------------------

/// Normalised signal columns for steps [first, first + count).
struct SignalColumns {
  Matrix a;   // count x 1
  Matrix b;   // count x 1
  Matrix ab;  // count x 2
  Matrix d;   // count x n_d
};

inline SignalColumns normalise(const ModelSpec& s, const plant::SignalSet& sig, std::size_t first, std::size_t count) {
  if (first + count > sig.size()) {
    throw DimensionError("signals too short: need " + std::to_string(first + count) + " steps, have " +
                         std::to_string(sig.size()));
  }
  if (sig.d.cols() != s.disturbance_dim) throw DimensionError("disturbance width does not match model");
  SignalColumns c{Matrix(count, 1), Matrix(count, 1), Matrix(count, 2), Matrix(count, s.disturbance_dim)};
  for (std::size_t k = 0; k < count; ++k) {
    c.a[k] = sig.a[first + k] / s.scaling.a;
    c.b[k] = sig.b[first + k] / s.scaling.b;
    c.ab(k, 0) = c.a[k];
    c.ab(k, 1) = c.b[k];
    for (std::size_t j = 0; j < s.disturbance_dim; ++j) c.d(k, j) = sig.d(first + k, j) / s.scaling.d[j];
  }
  return c;
}

/// Normalised algebraic input u / u_scale as a count x 1 column.
inline ad::Var algebraic_column(ad::Tape& tape, const ModelSpec& s, const ModelVars& mv, const SignalColumns& c) {
  const std::size_t count = c.a.rows();
  switch (s.variant) {
    case AlgebraicVariant::gray:
    case AlgebraicVariant::white: {
      const ad::Var ab = tape.constant(hadamard(c.a, c.b));
      const ad::Var ones = tape.constant(Matrix(count, 1, 1.0));
      ad::Var gain, offset;
      if (s.variant == AlgebraicVariant::gray) {
        gain = mv.leaf("H_gain");
        offset = mv.leaf("h_offset");
      } else {
        gain = tape.constant(Matrix::scalar(s.white_H * s.scaling.a * s.scaling.b / s.scaling.u));
        offset = tape.constant(Matrix::scalar(s.white_h / s.scaling.u));
      }
      return ad::matmul(ab, gain) + ad::matmul(ones, offset);
    }
    case AlgebraicVariant::black: {
      const ad::Var z = tape.constant(c.ab);
      const ad::Var hidden = ad::relu(ad::add_row(ad::matmul(z, ad::transpose(mv.leaf("W1"))), mv.leaf("c1")));
      return ad::add_row(ad::matmul(hidden, ad::transpose(mv.leaf("W2"))), mv.leaf("c2"));
    }
    case AlgebraicVariant::srnn: {
      const ad::Var z = tape.constant(c.ab);
      const ad::Var hidden = ad::relu(ad::matmul(z, ad::transpose(mv.leaf("W1"))));
      return ad::relu(ad::matmul(hidden, ad::transpose(mv.leaf("W2"))) + ad::matmul(z, ad::transpose(mv.leaf("W3"))));
    }
  }
  throw ConfigError("unsupported variant");
}

/// Physical gray-box constants (H~, h~) implied by the normalised parameters.
inline std::pair<double, double> gray_constants(const ModelSpec& s, const ParamSet& p) {
  if (s.variant == AlgebraicVariant::white) return {s.white_H, s.white_h};
  if (s.variant != AlgebraicVariant::gray) throw ConfigError(s.label() + " has no bilinear constants");
  return {p.at("H_gain").item() * s.scaling.u / (s.scaling.a * s.scaling.b), p.at("h_offset").item() * s.scaling.u};
}

/// u = h_theta(a, b) in physical units for a single step.
inline double algebraic_term(const ModelSpec& s, const ParamSet& p, double a, double b) {
  check_params(s, p);
  plant::SignalSet one;
  one.a = {a};
  one.b = {b};
  one.d = Matrix(1, s.disturbance_dim);
  ad::Tape tape;
  const ModelVars mv = bind_params(tape, s, p);
  return tape.value(algebraic_column(tape, s, mv, normalise(s, one, 0, 1))).item() * s.scaling.u;
}

// ---- rollout ------------------------------------------------------------------

/**
 * Tape graph of W windows rolled forward N steps with shared weights.
 * Window w starts at signal index first + w * stride and uses the signal
 * k steps later at step k. Slack nodes are only present for constrained
 * evaluation.
 */
struct RolloutGraph {
  std::size_t windows = 0;
  std::size_t stride = 1;
  std::vector<ad::Var> states;   // N + 1 entries, W x n
  ad::Var u_norm;                // ((W - 1) * stride + N) x 1, normalised
  std::vector<ad::Var> slack_x;  // N entries, W x n, slack of states[k + 1]
  ad::Var slack_u;               // same rows as u_norm, normalised units

  std::size_t horizon() const { return states.size() - 1; }
  bool has_slack() const { return !slack_x.empty(); }
};

inline RolloutGraph rollout_graph(ad::Tape& tape, const ModelSpec& s, const ModelVars& mv, ad::Var x0,
                                  const plant::SignalSet& signals, std::size_t first, std::size_t horizon,
                                  const constraints::BoundSpec* bounds, std::size_t stride = 1) {
  const Matrix& x0v = tape.value(x0);
  if (x0v.cols() != s.state_dim || x0v.rows() == 0) {
    throw DimensionError("rollout: initial states must be W x " + std::to_string(s.state_dim));
  }
  if (horizon == 0) throw ArgumentError("rollout: horizon must be positive");
  if (stride == 0) throw ArgumentError("rollout: stride must be positive");
  const std::size_t windows = x0v.rows();
  const std::size_t reach = (windows - 1) * stride + 1;  // signal rows touched per step
  const std::size_t span = reach + horizon - 1;
  const SignalColumns cols = normalise(s, signals, first, span);

  RolloutGraph g;
  g.windows = windows;
  g.stride = stride;
  g.u_norm = algebraic_column(tape, s, mv, cols);
  const ad::Var drive = ad::matmul(g.u_norm, mv.input_t) + ad::matmul(tape.constant(cols.d), mv.disturbance_t);

  // Constant bounds broadcast as one row; time-varying bounds are sliced per step.
  ad::Var x_lo{}, x_hi{};
  bool per_step = false;
  if (bounds != nullptr) {
    bounds->validate();
    g.slack_u = ad::bound_slack(g.u_norm, tape.constant(Matrix::scalar(bounds->u_lower / s.scaling.u)),
                                tape.constant(Matrix::scalar(bounds->u_upper / s.scaling.u)));
    per_step = bounds->x_lower.rows() > 1 || bounds->x_upper.rows() > 1;
    x_lo = tape.constant(per_step ? bounds->lower_rows(first + 1, span) : bounds->x_lower);
    x_hi = tape.constant(per_step ? bounds->upper_rows(first + 1, span) : bounds->x_upper);
  }

  g.states.reserve(horizon + 1);
  g.states.push_back(x0);
  for (std::size_t k = 0; k < horizon; ++k) {
    const ad::Var next = ad::affine_rows(g.states.back(), mv.transition_t, drive, k, stride);
    if (!all_finite(tape.value(next))) {
      throw NumericError("rollout: non-finite state at step " + std::to_string(k + 1));
    }
    g.states.push_back(next);
    if (bounds != nullptr) {
      g.slack_x.push_back(per_step ? ad::bound_slack(next, ad::slice_rows(x_lo, k, k + reach, stride),
                                                     ad::slice_rows(x_hi, k, k + reach, stride))
                                   : ad::bound_slack(next, x_lo, x_hi));
    }
  }
  return g;
}

/// Numeric view of one trajectory.
struct RolloutResult {
  Matrix states;   // (N + 1) x n
  Matrix u;        // N x 1, physical units
  Matrix slack_x;  // N x n
  Matrix slack_u;  // N x 1, normalised units
};

/**
 * Rolls one trajectory N steps from x0 (n entries). Slacks are computed against
 * `bounds` when the spec is constrained and are exactly zero otherwise.
 */
inline RolloutResult rollout(const ParamSet& params, const ModelSpec& spec, const Matrix& x0,
                             const plant::SignalSet& signals, std::size_t horizon,
                             const constraints::BoundSpec& bounds, std::size_t first = 0) {
  if (x0.size() != spec.state_dim) throw DimensionError("rollout: x0 must have state_dim entries");
  ad::Tape tape;
  tape.reserve(8 * horizon + 64);
  const ModelVars mv = bind_params(tape, spec, params);
  const ad::Var x0v = tape.constant(Matrix(1, spec.state_dim, std::vector<double>(x0.values().begin(), x0.values().end())));
  const RolloutGraph g = rollout_graph(tape, spec, mv, x0v, signals, first, horizon, spec.constrained ? &bounds : nullptr);

  RolloutResult r{Matrix(horizon + 1, spec.state_dim), Matrix(horizon, 1), Matrix(horizon, spec.state_dim),
                  Matrix(horizon, 1)};
  for (std::size_t k = 0; k <= horizon; ++k) {
    const Matrix& xs = tape.value(g.states[k]);
    for (std::size_t i = 0; i < spec.state_dim; ++i) r.states(k, i) = xs[i];
  }
  const Matrix& un = tape.value(g.u_norm);
  for (std::size_t k = 0; k < horizon; ++k) {
    r.u[k] = un[k] * spec.scaling.u;
    if (g.has_slack()) {
      const Matrix& sx = tape.value(g.slack_x[k]);
      for (std::size_t i = 0; i < spec.state_dim; ++i) r.slack_x(k, i) = sx[i];
      r.slack_u[k] = tape.value(g.slack_u)[k];
    }
  }
  return r;
}

/// One step of the model: returns (x_next as n x 1, physical u).
inline std::pair<Matrix, double> ssm_step(const ParamSet& params, const ModelSpec& spec, const Matrix& x, double a,
                                          double b, const Matrix& d) {
  if (d.size() != spec.disturbance_dim) throw DimensionError("ssm_step: disturbance must have n_d entries");
  plant::SignalSet one;
  one.a = {a};
  one.b = {b};
  one.d = Matrix(1, spec.disturbance_dim, std::vector<double>(d.values().begin(), d.values().end()));
  ModelSpec unconstrained = spec;
  unconstrained.constrained = false;
  const RolloutResult r = rollout(params, unconstrained, x, one, 1, constraints::BoundSpec{});
  return {transpose(block(r.states, 1, 2, 0, spec.state_dim)), r.u[0]};
}

// ---- initialisation -----------------------------------------------------------

/**
 * Random initial parameters. Raw transition and damping parameters are
 * uniform(-1, 1); input, disturbance and MLP weights uniform(-s, s) with
 * s = 1/sqrt(fan_in); the gray-box gain uniform on (0, 2 * nominal); offsets 0.
 * The srnn transition starts from a Perron-Frobenius draw and is then free.
 */
inline ParamSet init_params(const ModelSpec& spec, SeededRng& rng) {
  spec.validate();
  const std::size_t n = spec.state_dim, h = spec.hidden_units;
  auto fan = [](std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); };
  ParamSet p;
  Matrix a_raw = rng_uniform(rng, -1.0, 1.0, n, n);
  Matrix m_raw = rng_uniform(rng, -1.0, 1.0, n, n);
  if (spec.transition == Transition::perron_frobenius) {
    p.set("A_raw", std::move(a_raw));
    p.set("M_raw", std::move(m_raw));
  } else {
    p.set("A_raw", pf_transition(a_raw, m_raw));
  }
  p.set("B", rng_uniform(rng, -fan(1), fan(1), n, 1));
  p.set("E", rng_uniform(rng, -fan(spec.disturbance_dim), fan(spec.disturbance_dim), n, spec.disturbance_dim));
  switch (spec.variant) {
    case AlgebraicVariant::gray: {
      const double nominal_gain = spec.nominal_H * spec.scaling.a * spec.scaling.b / spec.scaling.u;
      p.set("H_gain", Matrix::scalar(rng.uniform(0.0, 2.0 * nominal_gain)));
      p.set("h_offset", Matrix::scalar(0.0));
      break;
    }
    case AlgebraicVariant::black:
      p.set("W1", rng_uniform(rng, -fan(2), fan(2), h, 2));
      p.set("c1", rng_uniform(rng, -fan(2), fan(2), 1, h));
      p.set("W2", rng_uniform(rng, -fan(h), fan(h), 1, h));
      p.set("c2", rng_uniform(rng, -fan(h), fan(h), 1, 1));
      break;
    case AlgebraicVariant::srnn:
      p.set("W1", rng_uniform(rng, -fan(2), fan(2), h, 2));
      p.set("W2", rng_uniform(rng, -fan(h), fan(h), 1, h));
      p.set("W3", rng_uniform(rng, -fan(2), fan(2), 1, 2));
      break;
    case AlgebraicVariant::white: break;
  }
  return p;
}

/**
 * The ground-truth plant expressed as a model with a direct transition. B and
 * E are rescaled to act on normalised inputs; a gray-box term is set to the
 * true constants.
 */
inline std::pair<ModelSpec, ParamSet> truth_model(const plant::PlantSystem& plant, AlgebraicVariant variant,
                                                  bool constrained = false) {
  if (variant != AlgebraicVariant::white && variant != AlgebraicVariant::gray) {
    throw ConfigError("truth_model: only white and gray variants can represent the plant exactly");
  }
  ModelSpec s;
  s.variant = variant;
  s.constrained = constrained;
  s.transition = Transition::direct;
  s.white_H = plant.H;
  s.white_h = plant.h;
  s.nominal_H = plant.H;
  s.scaling = InputScaling::from_plant(plant);
  ParamSet p;
  p.set("A_raw", plant.A);
  p.set("B", s.scaling.u * plant.B);
  Matrix e = plant.E;
  for (std::size_t i = 0; i < e.rows(); ++i)
    for (std::size_t j = 0; j < e.cols(); ++j) e(i, j) *= s.scaling.d[j];
  p.set("E", std::move(e));
  if (variant == AlgebraicVariant::gray) {
    p.set("H_gain", Matrix::scalar(plant.H * s.scaling.a * s.scaling.b / s.scaling.u));
    p.set("h_offset", Matrix::scalar(plant.h / s.scaling.u));
  }
  return {s, p};
}

}  // namespace cnode::models
