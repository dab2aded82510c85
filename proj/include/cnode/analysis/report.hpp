#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <cnode/analysis/metrics.hpp>
#include <cnode/analysis/svg.hpp>
#include <cnode/constraints/bounds.hpp>
#include <cnode/errors.hpp>
#include <cnode/models/checkpoint.hpp>
#include <cnode/models/model.hpp>
#include <cnode/numerics/csv.hpp>
#include <cnode/numerics/eigen.hpp>
#include <cnode/plant/plant.hpp>
#include <cnode/training/sweep.hpp>

namespace cnode::analysis {

// ---- eigenvalue table -------------------------------------------------------

struct EigenRow {
  std::string model;
  std::vector<ComplexScalar> values;  // sorted, state_dim entries
  double distance = 0.0;              // to the truth spectrum
};

/// "0.99" for real values, "0.11+0.11i" / "0.11-0.11i" for complex ones.
inline std::string format_eigenvalue(ComplexScalar z, int digits = 4) {
  const double tol = 1e-12 * (1.0 + std::abs(z.real()));
  char buf[96];
  if (std::abs(z.imag()) <= tol) {
    std::snprintf(buf, sizeof buf, "%.*f", digits, z.real());
  } else {
    std::snprintf(buf, sizeof buf, "%.*f%+.*fi", digits, z.real(), digits, z.imag());
  }
  return buf;
}

/// Euclidean distance between two spectra after sorting both by magnitude.
inline double spectrum_distance(std::vector<ComplexScalar> a, std::vector<ComplexScalar> b) {
  if (a.size() != b.size()) throw DimensionError("spectrum_distance: spectra differ in length");
  sort_eigenvalues(a);
  sort_eigenvalues(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

/// Truth row first, then one row per (name, effective transition) in input order.
inline std::vector<EigenRow> eigen_report(const std::vector<std::pair<std::string, Matrix>>& transitions,
                                          const plant::PlantSystem& plant) {
  std::vector<EigenRow> rows;
  const auto truth = eigenvalues(plant.A);
  rows.push_back({"True", truth, 0.0});
  for (const auto& [name, a] : transitions) {
    if (a.rows() != plant.A.rows()) throw DimensionError("eigen_report: " + name + " has wrong state dimension");
    auto ev = eigenvalues(a);
    rows.push_back({name, ev, spectrum_distance(ev, truth)});
  }
  return rows;
}

inline void write_eigen_csv(std::ostream& out, const std::vector<EigenRow>& rows) {
  const std::size_t n = rows.empty() ? 0 : rows.front().values.size();
  out << "model";
  for (std::size_t i = 0; i < n; ++i) out << ",lambda" << i + 1;
  out << ",distance\n";
  for (const auto& r : rows) {
    if (r.values.size() != n) throw DimensionError("eigen table rows differ in length");
    out << r.model;
    for (const auto& z : r.values) out << ',' << format_eigenvalue(z);
    out << ',' << format_eigenvalue(r.distance) << '\n';
  }
}

// ---- traces -----------------------------------------------------------------

/**
 * Writes a partition rollout next to the truth: k, x1..x4 true, x1..x4
 * predicted, u true, u predicted. Full precision so the file can be
 * re-scored exactly.
 */
inline void write_trace_csv(const std::filesystem::path& path, const plant::Partition& part,
                            const models::RolloutResult& r, const plant::PlantSystem& plant) {
  const std::size_t n = part.states.cols();
  if (r.states.rows() != part.states.rows() || r.states.cols() != n) {
    throw DimensionError("trace: rollout does not cover partition " + part.name);
  }
  auto out = open_for_write(path);
  out << 'k';
  for (std::size_t i = 0; i < n; ++i) out << ",x" << i + 1 << "_true";
  for (std::size_t i = 0; i < n; ++i) out << ",x" << i + 1 << "_pred";
  out << ",u_true,u_pred\n";
  const std::size_t steps = part.steps();
  for (std::size_t k = 0; k <= steps; ++k) {
    out << k;
    for (std::size_t i = 0; i < n; ++i) out << ',' << format_double(part.states(k, i));
    for (std::size_t i = 0; i < n; ++i) out << ',' << format_double(r.states(k, i));
    if (k < steps) {
      out << ',' << format_double(plant::true_input(plant, part.signals.a[k], part.signals.b[k])) << ','
          << format_double(r.u[k]) << '\n';
    } else {
      out << ",,\n";  // no input is applied after the last state
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// ---- report -----------------------------------------------------------------

/// Representative model of one label: its lowest validation open-loop MSE cell.
struct ModelEval {
  training::CellResult result;
  models::ParamSet params;
  Matrix transition;
  SlackSummary slack_test;
  OpenLoopResult test_rollout;
};

struct EvalReport {
  std::vector<training::CellResult> results;
  std::vector<training::CellResult> best_nstep;     // per (label, N), selected by validation N-step MSE
  std::vector<training::CellResult> best_openloop;  // per (label, N), selected by validation open-loop MSE
  std::vector<ModelEval> models;                    // one per label
  std::vector<EigenRow> eigen;
};

using CheckpointLoader = std::function<models::Checkpoint(const training::SweepCell&)>;

inline EvalReport build_report(const std::vector<training::CellResult>& results, const CheckpointLoader& load,
                               const plant::PlantSystem& plant, const plant::Dataset& data,
                               const constraints::BoundSpec& bounds) {
  EvalReport rep;
  rep.results = results;
  rep.best_nstep = training::best_cells(results, training::SelectBy::nstep_val);
  rep.best_openloop = training::best_cells(results, training::SelectBy::openloop_val);

  std::vector<std::string> labels;
  std::map<std::string, training::CellResult> pick;
  for (const auto& r : results) {
    auto it = pick.find(r.cell.label);
    if (it == pick.end()) {
      labels.push_back(r.cell.label);
      pick.emplace(r.cell.label, r);
    } else if (r.openloop_mse_val < it->second.openloop_mse_val) {
      it->second = r;
    }
  }
  std::vector<std::pair<std::string, Matrix>> transitions;
  for (const auto& label : labels) {
    ModelEval m;
    m.result = pick.at(label);
    const models::Checkpoint ck = load(m.result.cell);
    m.params = ck.params;
    m.transition = models::effective_transition(ck.spec, ck.params);
    m.test_rollout = open_loop(ck.spec, ck.params, data.test, bounds, data.observed_index);
    if (!m.test_rollout.diverged) m.slack_test = rollout_violations(m.test_rollout.rollout, ck.spec, bounds);
    transitions.emplace_back(label, m.transition);
    rep.models.push_back(std::move(m));
  }
  rep.eigen = eigen_report(transitions, plant);
  return rep;
}

namespace detail {

inline void write_wide_table(const std::filesystem::path& path, const std::vector<training::CellResult>& best,
                             double training::CellResult::*metric) {
  std::vector<std::string> labels;
  std::set<std::size_t> horizons;
  std::map<std::pair<std::string, std::size_t>, double> value;
  for (const auto& r : best) {
    if (std::find(labels.begin(), labels.end(), r.cell.label) == labels.end()) labels.push_back(r.cell.label);
    horizons.insert(r.cell.horizon);
    value[{r.cell.label, r.cell.horizon}] = r.*metric;
  }
  auto out = open_for_write(path);
  out << "model";
  for (std::size_t n : horizons) out << ",N" << n;
  out << '\n';
  for (const auto& label : labels) {
    out << label;
    for (std::size_t n : horizons) {
      const auto it = value.find({label, n});
      out << ',' << (it == value.end() ? std::string{} : format_double(it->second));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_long_table(const std::filesystem::path& path, const std::vector<training::CellResult>& best) {
  auto out = open_for_write(path);
  out << "model,N,lr,restart,nstep_mse_val,nstep_mse_test,openloop_mse_val,openloop_mse_test,failed\n";
  for (const auto& r : best) {
    out << r.cell.label << ',' << r.cell.horizon << ',' << format_double(r.cell.learning_rate) << ',' << r.cell.restart
        << ',' << format_double(r.nstep_mse_val) << ',' << format_double(r.nstep_mse_test) << ','
        << format_double(r.openloop_mse_val) << ',' << format_double(r.openloop_mse_test) << ','
        << (r.failed ? "true" : "false") << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<Series> mse_curves(const std::vector<training::CellResult>& best, double training::CellResult::*metric) {
  std::vector<Series> out;
  for (const auto& r : best) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Series& s) { return s.name == r.cell.label; });
    if (it == out.end()) {
      out.push_back({r.cell.label, {}, {}});
      it = out.end() - 1;
    }
    it->x.push_back(static_cast<double>(r.cell.horizon));
    it->y.push_back(r.*metric);
  }
  for (auto& s : out) {  // sort each curve by N
    std::vector<std::size_t> idx(s.x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s.x[a] < s.x[b]; });
    Series sorted{s.name, {}, {}};
    for (std::size_t i : idx) {
      sorted.x.push_back(std::log2(s.x[i]));
      sorted.y.push_back(s.y[i]);
    }
    s = std::move(sorted);
  }
  return out;
}

}  // namespace detail

/**
 * Writes tables/, traces/ and figures/ under out_dir. Traces cover every
 * partition for each representative model; a model that diverges on a
 * partition gets no trace file for it.
 */
inline void export_artifacts(const EvalReport& rep, const plant::PlantSystem& plant, const plant::Dataset& data,
                             const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  const fs::path tables = out_dir / "tables", traces = out_dir / "traces", figures = out_dir / "figures";
  for (const auto& d : {tables, traces, figures}) {
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) throw IoError("cannot create " + d.string() + ": " + ec.message());
  }

  training::write_results_csv(tables / "results.csv", rep.results);
  detail::write_long_table(tables / "best_cells.csv", rep.best_nstep);
  detail::write_wide_table(tables / "best_nstep.csv", rep.best_nstep, &training::CellResult::nstep_mse_test);
  detail::write_wide_table(tables / "best_openloop.csv", rep.best_openloop, &training::CellResult::openloop_mse_test);
  {
    auto out = open_for_write(tables / "eigenvalues.csv");
    write_eigen_csv(out, rep.eigen);
  }
  {
    auto out = open_for_write(tables / "slack.csv");
    out << "model,N,lr,restart,openloop_mse_test,slack_mean,slack_max,diverged\n";
    for (const auto& m : rep.models) {
      out << m.result.cell.label << ',' << m.result.cell.horizon << ',' << format_double(m.result.cell.learning_rate)
          << ',' << m.result.cell.restart << ',' << format_double(m.test_rollout.mse) << ','
          << format_double(m.slack_test.mean) << ',' << format_double(m.slack_test.max) << ','
          << (m.test_rollout.diverged ? "true" : "false") << '\n';
    }
  }

  for (const auto& m : rep.models) {
    const std::string& label = m.result.cell.label;
    write_matrix_csv(tables / ("transition_" + label + ".csv"), m.transition);
    for (const plant::Partition* part : {&data.train, &data.val, &data.test}) {
      const OpenLoopResult ol =
          open_loop(m.result.cell.spec, m.params, *part, constraints::BoundSpec{}, data.observed_index);
      if (ol.diverged) continue;
      write_trace_csv(traces / (label + "_" + part->name + ".csv"), *part, ol.rollout, plant);
      if (part == &data.test) {
        Series truth{"measured", {}, {}}, pred{label, {}, {}};
        for (std::size_t k = 0; k <= part->steps(); ++k) {
          truth.x.push_back(static_cast<double>(k));
          truth.y.push_back(part->states(k, data.observed_index));
          pred.x.push_back(static_cast<double>(k));
          pred.y.push_back(ol.rollout.states(k, data.observed_index));
        }
        write_line_plot(figures / ("openloop_" + label + ".svg"), {truth, pred},
                        {"Open-loop test trajectory, " + label, "step", "observed state", false});
      }
    }
  }
  write_line_plot(figures / "nstep_mse_vs_N.svg", detail::mse_curves(rep.best_nstep, &training::CellResult::nstep_mse_test),
                  {"N-step best MSE", "log2 N", "test MSE", true});
  write_line_plot(figures / "openloop_mse_vs_N.svg",
                  detail::mse_curves(rep.best_openloop, &training::CellResult::openloop_mse_test),
                  {"Open-loop best MSE", "log2 N", "test MSE", true});
}

}  // namespace cnode::analysis
