#pragma once

// Monte Carlo coverage study: acceptance proportions of the empirical
// power-divergence tests over a grid of (model, sample size, power index a,
// nominal level, critical-value approximation) cells, with Dale's
// logit-band closeness criterion.
//
// Replication j of group (model, n) uses the dataset seed seed_base XOR j,
// with seed_base derived from (master_seed, model index, n) only, so the
// same replication's sample is shared across every a / level /
// approximation cell of the group and results never depend on cell order
// or thread count.

#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "elphi/divergence.hpp"
#include "elphi/el.hpp"
#include "elphi/inference.hpp"
#include "elphi/model.hpp"
#include "elphi/rng.hpp"

namespace elphi {

struct SimulationConfig {
  std::vector<SimulationModel> models;
  std::vector<int> sample_sizes;
  std::vector<double> a_values;
  std::vector<double> levels;
  int replications = 1000;
  std::uint64_t master_seed = 1;
  std::vector<Approximation> approximations = {Approximation::chi2,
                                               Approximation::f_owen};
  SolverConfig solver;
  double dale_d = 0.35;
  int threads = 1;

  void validate() const {
    if (replications < 1)
      throw std::invalid_argument("simulation config: replications >= 1");
    for (double lvl : levels) {
      if (!(lvl > 0.0 && lvl < 1.0))
        throw std::invalid_argument("simulation config: levels must lie in (0,1)");
    }
    if (models.empty())
      throw std::invalid_argument("simulation config: at least one model");
    if (sample_sizes.empty())
      throw std::invalid_argument("simulation config: at least one sample size");
    for (int n : sample_sizes) {
      if (n < 3) throw std::invalid_argument("simulation config: sample sizes >= 3");
    }
    if (approximations.empty())
      throw std::invalid_argument("simulation config: at least one approximation");
    if (threads < 1)
      throw std::invalid_argument("simulation config: threads >= 1");
    if (!(dale_d > 0.0))
      throw std::invalid_argument("simulation config: dale_d > 0");
  }
};

// The paper-style default grid: four models, n in {50, 100, 200}, ten power
// indices, both levels and both approximations, 1000 replications.
inline SimulationConfig default_simulation_config() {
  SimulationConfig cfg;
  cfg.models = paper_models();
  cfg.sample_sizes = {50, 100, 200};
  cfg.a_values = {-1.0, -0.5, -0.25, -0.125, 0.0, 0.5, 0.67, 1.0, 1.5, 3.0};
  cfg.levels = {0.90, 0.95};
  cfg.replications = 1000;
  cfg.master_seed = 20250801;
  return cfg;
}

struct CellResult {
  int model_index;  // 0-based position in the model list
  int n;
  double a;
  double level;
  Approximation approx;
  long accepted;
  long failed;             // infeasible replications, excluded from the rate
  long replications;       // N
  double acceptance_rate;  // accepted / (N - failed)
  double mc_stderr;        // sqrt(r (1-r) / (N - failed))
  bool flagged;            // Dale-near flag, see mark_near
};

struct SimulationGrid {
  std::vector<CellResult> cells;
};

// Seed shared by every cell of the (model, n) group.
inline std::uint64_t group_seed(std::uint64_t master_seed, int model_index, int n) {
  return derive_seed(derive_seed(master_seed, static_cast<std::uint64_t>(model_index)),
                     static_cast<std::uint64_t>(n));
}

namespace detail {

// Tally for one (model, n) group: acceptance counts indexed by
// [a][level][approx], plus the group's failure count.
struct GroupTally {
  std::vector<long> accepted;  // flattened a x level x approx
  long failed = 0;

  GroupTally(std::size_t na, std::size_t nl, std::size_t np)
      : accepted(na * nl * np, 0) {}

  void merge(const GroupTally& other) {
    for (std::size_t i = 0; i < accepted.size(); ++i)
      accepted[i] += other.accepted[i];
    failed += other.failed;
  }
};

inline GroupTally run_group_range(const SimulationModel& model, int n,
                                  const std::vector<PhiFamily>& phis,
                                  const std::vector<double>& levels,
                                  const std::vector<Approximation>& approxes,
                                  const std::vector<double>& crits,
                                  const SolverConfig& solver,
                                  std::uint64_t seed_base, long j_begin,
                                  long j_end) {
  const std::size_t na = phis.size(), nl = levels.size(), np = approxes.size();
  GroupTally tally(na, nl, np);
  for (long j = j_begin; j < j_end; ++j) {
    Eigen::VectorXd d;
    try {
      Dataset data = generate_sample(model, n, seed_base ^ static_cast<std::uint64_t>(j));
      Eigen::MatrixXd G = score_matrix(data, model.beta());
      MultiplierSolution sol = solve_multiplier(G, solver);
      d = (G * sol.t).array() + 1.0;
    } catch (const std::exception&) {
      ++tally.failed;
      continue;
    }
    for (std::size_t ia = 0; ia < na; ++ia) {
      double stat = phi_statistic_from(d, phis[ia]);
      for (std::size_t il = 0; il < nl; ++il) {
        for (std::size_t ip = 0; ip < np; ++ip) {
          if (stat <= crits[il * np + ip])
            ++tally.accepted[(ia * nl + il) * np + ip];
        }
      }
    }
  }
  return tally;
}

inline GroupTally run_group(const SimulationModel& model, int n,
                            const std::vector<PhiFamily>& phis,
                            const std::vector<double>& levels,
                            const std::vector<Approximation>& approxes,
                            const SolverConfig& solver, long replications,
                            std::uint64_t seed_base, int threads) {
  std::vector<double> crits(levels.size() * approxes.size());
  for (std::size_t il = 0; il < levels.size(); ++il) {
    for (std::size_t ip = 0; ip < approxes.size(); ++ip) {
      crits[il * approxes.size() + ip] =
          critical_value(approxes[ip], n, 2, levels[il]);
    }
  }
  int workers = std::max(1, std::min<int>(threads, static_cast<int>(replications)));
  if (workers == 1) {
    return run_group_range(model, n, phis, levels, approxes, crits, solver,
                           seed_base, 0, replications);
  }
  std::vector<GroupTally> parts(
      workers, GroupTally(phis.size(), levels.size(), approxes.size()));
  std::vector<std::thread> pool;
  long chunk = (replications + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    long lo = w * chunk;
    long hi = std::min<long>(replications, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, w, lo, hi]() {
      parts[w] = run_group_range(model, n, phis, levels, approxes, crits,
                                 solver, seed_base, lo, hi);
    });
  }
  for (auto& th : pool) th.join();
  GroupTally total(phis.size(), levels.size(), approxes.size());
  for (const auto& part : parts) total.merge(part);
  return total;
}

inline CellResult make_cell(int model_index, int n, double a, double level,
                            Approximation approx, long accepted, long failed,
                            long replications) {
  CellResult cell;
  cell.model_index = model_index;
  cell.n = n;
  cell.a = a;
  cell.level = level;
  cell.approx = approx;
  cell.accepted = accepted;
  cell.failed = failed;
  cell.replications = replications;
  long used = replications - failed;
  cell.acceptance_rate = used > 0 ? static_cast<double>(accepted) / used : 0.0;
  cell.mc_stderr =
      used > 0 ? std::sqrt(cell.acceptance_rate * (1.0 - cell.acceptance_rate) / used)
               : 0.0;
  cell.flagged = false;
  return cell;
}

}  // namespace detail

// One grid cell on its own. `seed_base` should come from group_seed so the
// cell matches the corresponding run_grid entry exactly.
inline CellResult run_cell(const SimulationModel& model, int n, double a,
                           double level, Approximation approx, long replications,
                           std::uint64_t seed_base, const SolverConfig& solver = {},
                           int model_index = 0) {
  std::vector<PhiFamily> phis = {power_phi(a)};
  std::vector<double> levels = {level};
  std::vector<Approximation> approxes = {approx};
  detail::GroupTally tally = detail::run_group(model, n, phis, levels, approxes,
                                               solver, replications, seed_base, 1);
  return detail::make_cell(model_index, n, a, level, approx, tally.accepted[0],
                           tally.failed, replications);
}

// The full grid. Every (model, n) group solves each replication once and
// reuses the multiplier across all a / level / approximation cells.
inline SimulationGrid run_grid(const SimulationConfig& cfg) {
  cfg.validate();
  std::vector<PhiFamily> phis;
  phis.reserve(cfg.a_values.size());
  for (double a : cfg.a_values) phis.push_back(power_phi(a));
  SimulationGrid grid;
  const std::size_t nl = cfg.levels.size(), np = cfg.approximations.size();
  for (std::size_t im = 0; im < cfg.models.size(); ++im) {
    for (int n : cfg.sample_sizes) {
      if (cfg.a_values.empty()) continue;
      std::uint64_t seed_base = group_seed(cfg.master_seed, static_cast<int>(im), n);
      detail::GroupTally tally = detail::run_group(
          cfg.models[im], n, phis, cfg.levels, cfg.approximations, cfg.solver,
          cfg.replications, seed_base, cfg.threads);
      for (std::size_t ia = 0; ia < cfg.a_values.size(); ++ia) {
        for (std::size_t il = 0; il < nl; ++il) {
          for (std::size_t ip = 0; ip < np; ++ip) {
            grid.cells.push_back(detail::make_cell(
                static_cast<int>(im), n, cfg.a_values[ia], cfg.levels[il],
                cfg.approximations[ip], tally.accepted[(ia * nl + il) * np + ip],
                tally.failed, cfg.replications));
          }
        }
      }
    }
  }
  return grid;
}

// Dale's closeness band: the set of simulated sizes alpha_hat with
// |logit(1 - alpha_hat) - logit(1 - alpha)| <= d.
inline std::pair<double, double> dale_interval(double alpha, double d) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("dale_interval: alpha outside (0,1)");
  if (d < 0.0) throw DomainError("dale_interval: d must be nonnegative");
  double logit_level = std::log((1.0 - alpha) / alpha);
  double lo = 1.0 / (1.0 + std::exp(logit_level + d));
  double hi = 1.0 / (1.0 + std::exp(logit_level - d));
  return {lo, hi};
}

// Flags cells whose exact size 1 - acceptance_rate falls strictly inside
// the Dale band around the nominal size.
inline void mark_near(SimulationGrid& grid, double d) {
  for (CellResult& cell : grid.cells) {
    double alpha = 1.0 - cell.level;
    auto [lo, hi] = dale_interval(alpha, d);
    double size = 1.0 - cell.acceptance_rate;
    cell.flagged = size > lo && size < hi;
  }
}

}  // namespace elphi
