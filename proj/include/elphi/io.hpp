#pragma once

// Machine-readable interchange: JSON serialization of reports and solver
// diagnostics, the simulation grid CSV/JSON formats, plot-ready CSV
// emission, and the simulation config schema.

#include <algorithm>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "elphi/el.hpp"
#include "elphi/inference.hpp"
#include "elphi/power.hpp"
#include "elphi/simulate.hpp"

namespace elphi {

using nlohmann::json;

inline json to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline json test_report_json(const TestReport& rep) {
  return json{{"statistic", rep.statistic},
              {"dof", rep.dof},
              {"level", rep.level},
              {"approx", to_string(rep.approx)},
              {"critical_value", rep.critical_value},
              {"p_value", rep.p_value},
              {"reject", rep.reject}};
}

// Solver diagnostics: multiplier, residual, iteration count, start index
// and the Fourier-Motzkin coordinate boxes.
inline json solver_diagnostics_json(const MultiplierSolution& sol,
                                    const MultiplierBounds& bounds) {
  json boxes = json::array();
  for (int k = 0; k < bounds.dim(); ++k) {
    const Interval& iv = bounds.box(k);
    boxes.push_back(json::array({iv.lo, iv.hi}));
  }
  return json{{"t", to_json(sol.t)},
              {"residual", sol.residual_norm},
              {"iterations", sol.iterations},
              {"start_index", sol.start_index},
              {"bounds", boxes}};
}

inline json power_result_json(const PowerResult& pr) {
  return json{{"tau", to_json(pr.tau)},
              {"d_phi", pr.d_phi},
              {"sigma_sq", pr.sigma_sq},
              {"power", pr.power}};
}

inline json sample_size_json(const SampleSizeResult& sr) {
  return json{{"tau", to_json(sr.tau)},   {"d_phi", sr.d_phi},
              {"sigma_sq", sr.sigma_sq},  {"A", sr.a_term},
              {"B", sr.b_term},           {"n_real", sr.n_real},
              {"n_star", sr.n_star}};
}

// --- simulation grid interchange ---

namespace detail {
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

inline void write_grid_csv(const SimulationGrid& grid, std::ostream& out) {
  out << "model,n,a,level,approx,acceptance,stderr,failed,flagged\n";
  for (const CellResult& c : grid.cells) {
    out << (c.model_index + 1) << "," << c.n << "," << detail::fmt_double(c.a)
        << "," << detail::fmt_double(c.level) << "," << to_string(c.approx) << ","
        << detail::fmt_double(c.acceptance_rate) << ","
        << detail::fmt_double(c.mc_stderr) << "," << c.failed << ","
        << (c.flagged ? 1 : 0) << "\n";
  }
}

inline json grid_json(const SimulationGrid& grid) {
  json cells = json::array();
  for (const CellResult& c : grid.cells) {
    cells.push_back(json{{"model", c.model_index + 1},
                         {"n", c.n},
                         {"a", c.a},
                         {"level", c.level},
                         {"approx", to_string(c.approx)},
                         {"accepted", c.accepted},
                         {"failed", c.failed},
                         {"replications", c.replications},
                         {"acceptance", c.acceptance_rate},
                         {"stderr", c.mc_stderr},
                         {"flagged", c.flagged}});
  }
  return json{{"cells", cells}};
}

// Long-format per-(model, level) files for external plotting:
// <prefix>_model<i>_level<level>.csv with columns n,a,approx,acceptance,stderr.
inline std::vector<std::string> write_plot_data(const SimulationGrid& grid,
                                                const std::string& prefix) {
  std::vector<std::string> written;
  std::vector<std::pair<int, double>> keys;
  for (const CellResult& c : grid.cells) {
    std::pair<int, double> key{c.model_index, c.level};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (auto [mi, level] : keys) {
    std::string path = prefix + "_model" + std::to_string(mi + 1) + "_level" +
                       detail::fmt_double(level) + ".csv";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "n,a,approx,acceptance,stderr\n";
    for (const CellResult& c : grid.cells) {
      if (c.model_index != mi || c.level != level) continue;
      out << c.n << "," << detail::fmt_double(c.a) << "," << to_string(c.approx)
          << "," << detail::fmt_double(c.acceptance_rate) << ","
          << detail::fmt_double(c.mc_stderr) << "\n";
    }
    written.push_back(path);
  }
  return written;
}

// --- simulation config schema ---
//
// {
//   "models": [1, 2] or [{"beta0": .., "beta1": .., "marginal_rate": ..}],
//   "sample_sizes": [50, 100, 200],
//   "a_values": [-1, 0, 1],
//   "levels": [0.90, 0.95],
//   "replications": 1000,
//   "master_seed": 20250801,
//   "approximations": ["chi2", "f"],
//   "solver": {"n_start": 50, "tol": 1e-10, "max_iter": 100},   (optional)
//   "dale_d": 0.35,                                             (optional)
//   "threads": 1                                                (optional)
// }
// Integer model entries index the four built-in designs (1-based).

inline SimulationConfig parse_simulation_config(const json& j) {
  auto fail = [](const std::string& msg) -> void {
    throw std::invalid_argument("simulation config: " + msg);
  };
  SimulationConfig cfg;
  if (!j.is_object()) fail("top level must be an object");
  for (const char* key : {"models", "sample_sizes", "a_values", "levels",
                          "replications", "master_seed", "approximations"}) {
    if (!j.contains(key)) fail(std::string("missing key '") + key + "'");
  }
  const auto presets = paper_models();
  cfg.models.clear();
  if (!j["models"].is_array() || j["models"].empty()) fail("'models' must be a nonempty array");
  for (const auto& item : j["models"]) {
    if (item.is_number_integer()) {
      int idx = item.get<int>();
      if (idx < 1 || idx > static_cast<int>(presets.size()))
        fail("model preset index out of range 1..4");
      cfg.models.push_back(presets[idx - 1]);
    } else if (item.is_object()) {
      for (const char* key : {"beta0", "beta1", "marginal_rate"}) {
        if (!item.contains(key) || !item[key].is_number())
          fail(std::string("model object needs numeric '") + key + "'");
      }
      cfg.models.emplace_back(item["beta0"].get<double>(), item["beta1"].get<double>(),
                              item["marginal_rate"].get<double>());
    } else {
      fail("'models' entries must be preset indices or objects");
    }
  }
  if (!j["sample_sizes"].is_array()) fail("'sample_sizes' must be an array");
  cfg.sample_sizes = j["sample_sizes"].get<std::vector<int>>();
  if (!j["a_values"].is_array()) fail("'a_values' must be an array");
  cfg.a_values = j["a_values"].get<std::vector<double>>();
  if (!j["levels"].is_array()) fail("'levels' must be an array");
  cfg.levels = j["levels"].get<std::vector<double>>();
  if (!j["replications"].is_number_integer()) fail("'replications' must be an integer");
  cfg.replications = j["replications"].get<int>();
  if (!j["master_seed"].is_number_unsigned() && !j["master_seed"].is_number_integer())
    fail("'master_seed' must be an integer");
  cfg.master_seed = j["master_seed"].get<std::uint64_t>();
  if (!j["approximations"].is_array() || j["approximations"].empty())
    fail("'approximations' must be a nonempty array");
  cfg.approximations.clear();
  for (const auto& item : j["approximations"]) {
    if (!item.is_string()) fail("'approximations' entries must be strings");
    cfg.approximations.push_back(approximation_from_string(item.get<std::string>()));
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    if (!s.is_object()) fail("'solver' must be an object");
    if (s.contains("n_start")) cfg.solver.n_start = s["n_start"].get<int>();
    if (s.contains("tol")) cfg.solver.tol = s["tol"].get<double>();
    if (s.contains("max_iter")) cfg.solver.max_iter = s["max_iter"].get<int>();
  }
  if (j.contains("dale_d")) cfg.dale_d = j["dale_d"].get<double>();
  if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  cfg.validate();
  return cfg;
}

}  // namespace elphi
