// Command-line front end: data generation, model fitting, hypothesis
// testing, power and sample-size analysis, the Monte Carlo coverage grid,
// and the Dale closeness interval. Everything is deterministic given flags
// and seeds; JSON output is machine-lossless, console tables use 6
// significant digits. Exit codes: 0 success/accept, 1 reject, 2 error or
// infeasible input.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "elphi/elphi.hpp"

namespace {

Eigen::VectorXd parse_beta(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t pos = 0;
    vals.push_back(std::stod(tok, &pos));
    if (pos != tok.size()) throw std::invalid_argument("bad coefficient: " + tok);
  }
  if (vals.empty()) throw std::invalid_argument("empty coefficient vector");
  Eigen::VectorXd beta(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) beta[i] = vals[i];
  return beta;
}

void print_summary(const elphi::SimulationGrid& grid, double dale_d) {
  std::printf("%-6s %-6s %-8s %-6s %-6s %-10s %-10s %-7s %s\n", "model", "n", "a",
              "level", "approx", "accept", "stderr", "failed", "near");
  for (const auto& c : grid.cells) {
    std::printf("%-6d %-6d %-8.6g %-6.6g %-6s %-10.6g %-10.6g %-7ld %s\n",
                c.model_index + 1, c.n, c.a, c.level,
                elphi::to_string(c.approx).c_str(), c.acceptance_rate, c.mc_stderr,
                c.failed, c.flagged ? "*" : "");
  }
  std::printf("near = exact size inside the Dale band (d = %.6g)\n", dale_d);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"empirical phi-divergence tests for logistic regression"};
  app.require_subcommand(1);

  // --- gen-data ---
  auto* gen = app.add_subcommand("gen-data", "draw a synthetic dataset");
  int gen_model = 0;
  double gen_beta0 = 0.0, gen_beta1 = 0.0;
  int gen_n = 100;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--model", gen_model, "built-in design 1..4");
  gen->add_option("--beta0", gen_beta0, "intercept (with --beta1)");
  gen->add_option("--beta1", gen_beta1, "slope (with --beta0)");
  gen->add_option("--n", gen_n, "sample size")->required();
  gen->add_option("--seed", gen_seed, "stream seed");
  gen->add_option("--out", gen_out, "output CSV path (default stdout)");

  // --- fit ---
  auto* fit = app.add_subcommand("fit", "maximum likelihood fit");
  std::string fit_data;
  double fit_tol = 1e-10;
  int fit_max_iter = 100;
  fit->add_option("--data", fit_data, "dataset CSV")->required();
  fit->add_option("--tol", fit_tol, "residual tolerance");
  fit->add_option("--max-iter", fit_max_iter, "Newton iteration cap");

  // --- test ---
  auto* test = app.add_subcommand("test", "divergence test of beta = beta0");
  std::string test_data, test_beta0, test_phi = "power:a=0", test_approx = "chi2";
  double test_level = 0.95;
  elphi::SolverConfig test_solver;
  test->add_option("--data", test_data, "dataset CSV")->required();
  test->add_option("--beta0", test_beta0, "null value, comma separated")->required();
  test->add_option("--phi", test_phi, "divergence spec (power:a=.., hphi:..)");
  test->add_option("--level", test_level, "confidence level in (0,1)");
  test->add_option("--approx", test_approx, "critical value: chi2 | f");
  test->add_option("--n-start", test_solver.n_start, "multiplier solver starts");
  test->add_option("--tol", test_solver.tol, "multiplier residual tolerance");

  // --- power ---
  auto* power = app.add_subcommand("power", "asymptotic power approximation");
  std::string pw_beta0, pw_beta_star, pw_phi = "power:a=0", pw_sigma = "second-moment";
  double pw_level = 0.95;
  int pw_n = 0, pw_quad = 40;
  power->add_option("--beta0", pw_beta0, "null value")->required();
  power->add_option("--beta-star", pw_beta_star, "true alternative")->required();
  power->add_option("--n", pw_n, "sample size")->required();
  power->add_option("--level", pw_level, "test level in (0,1)");
  power->add_option("--phi", pw_phi, "divergence spec (power family)");
  power->add_option("--quad-order", pw_quad, "Gauss-Hermite order");
  power->add_option("--sigma-mode", pw_sigma, "second-moment | mean-outer");

  // --- samplesize ---
  auto* ssize = app.add_subcommand("samplesize", "minimum n for target power");
  std::string ss_beta0, ss_beta_star, ss_phi = "power:a=0", ss_sigma = "second-moment";
  double ss_level = 0.95, ss_target = 0.8;
  int ss_quad = 40;
  ssize->add_option("--beta0", ss_beta0, "null value")->required();
  ssize->add_option("--beta-star", ss_beta_star, "true alternative")->required();
  ssize->add_option("--target-power", ss_target, "target power in (0,1)")->required();
  ssize->add_option("--level", ss_level, "test level in (0,1)");
  ssize->add_option("--phi", ss_phi, "divergence spec (power family)");
  ssize->add_option("--quad-order", ss_quad, "Gauss-Hermite order");
  ssize->add_option("--sigma-mode", ss_sigma, "second-moment | mean-outer");

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "Monte Carlo coverage grid");
  std::string sim_config, sim_out, sim_format = "csv", sim_plot;
  int sim_threads = 0;
  sim->add_option("--config", sim_config, "config JSON path")->required();
  sim->add_option("--out", sim_out, "output prefix (writes <out>.csv and <out>.json)");
  sim->add_option("--format", sim_format, "stdout format when --out absent: csv | json");
  sim->add_option("--threads", sim_threads, "worker threads (overrides config)");
  sim->add_option("--plot-data", sim_plot, "prefix for per-(model,level) plot CSVs");

  // --- dale ---
  auto* dale = app.add_subcommand("dale", "Dale closeness interval for a size");
  double dale_alpha = 0.05, dale_d = 0.35;
  dale->add_option("--alpha", dale_alpha, "nominal size in (0,1)")->required();
  dale->add_option("--d", dale_d, "logit half-width");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      elphi::SimulationModel model(0.0, 1.0, 0.5);
      if (gen_model != 0) {
        auto presets = elphi::paper_models();
        if (gen_model < 1 || gen_model > static_cast<int>(presets.size()))
          throw std::invalid_argument("--model must be 1..4");
        model = presets[gen_model - 1];
      } else {
        elphi::GaussHermiteRule rule(40);
        double rate = rule.expect([&](double x) {
          return elphi::sigmoid(gen_beta0 + gen_beta1 * x);
        });
        model = elphi::SimulationModel(gen_beta0, gen_beta1, rate);
      }
      elphi::Dataset data = elphi::generate_sample(model, gen_n, gen_seed);
      if (gen_out.empty()) {
        elphi::write_dataset_csv(data, std::cout);
      } else {
        elphi::write_dataset_csv(data, gen_out);
      }
      return 0;
    }

    if (*fit) {
      elphi::Dataset data = elphi::read_dataset_csv(fit_data);
      Eigen::VectorXd init = Eigen::VectorXd::Zero(data.q());
      Eigen::VectorXd beta = elphi::fit_mle(data, init, fit_tol, fit_max_iter);
      double resid = elphi::score_sum(data, beta).lpNorm<Eigen::Infinity>();
      elphi::json out{{"beta", elphi::to_json(beta)}, {"score_residual", resid}};
      std::cout << out.dump() << "\n";
      return 0;
    }

    if (*test) {
      elphi::Dataset data = elphi::read_dataset_csv(test_data);
      Eigen::VectorXd beta0 = parse_beta(test_beta0);
      if (beta0.size() != data.q())
        throw std::invalid_argument("beta0 length does not match dataset columns");
      elphi::PhiSpec spec = elphi::parse_phi_spec(test_phi);
      elphi::TestReport rep =
          elphi::run_test(data, beta0, spec, test_level,
                          elphi::approximation_from_string(test_approx), test_solver);
      std::printf("%s H0 at level %.6g: statistic %.6g %s critical %.6g (p = %.6g)\n",
                  rep.reject ? "reject" : "accept", rep.level, rep.statistic,
                  rep.reject ? ">" : "<=", rep.critical_value, rep.p_value);
      std::cout << elphi::test_report_json(rep).dump() << "\n";
      return rep.reject ? 1 : 0;
    }

    if (*power || *ssize) {
      bool is_power = static_cast<bool>(*power);
      elphi::PhiSpec spec = elphi::parse_phi_spec(is_power ? pw_phi : ss_phi);
      if (spec.h)
        throw std::invalid_argument(
            "power analysis is defined for the plain phi statistics");
      std::string sigma_text = is_power ? pw_sigma : ss_sigma;
      elphi::SigmaMode mode;
      if (sigma_text == "second-moment") {
        mode = elphi::SigmaMode::second_moment;
      } else if (sigma_text == "mean-outer") {
        mode = elphi::SigmaMode::mean_outer;
      } else {
        throw std::invalid_argument("--sigma-mode must be second-moment or mean-outer");
      }
      elphi::AlternativeSpec alt(parse_beta(is_power ? pw_beta0 : ss_beta0),
                                 parse_beta(is_power ? pw_beta_star : ss_beta_star));
      if (is_power) {
        elphi::PowerResult pr =
            elphi::power_approx(alt, pw_n, pw_level, spec.phi, pw_quad, mode);
        std::cout << elphi::power_result_json(pr).dump() << "\n";
      } else {
        elphi::SampleSizeResult sr =
            elphi::sample_size(alt, ss_level, ss_target, spec.phi, ss_quad, mode);
        std::cout << elphi::sample_size_json(sr).dump() << "\n";
      }
      return 0;
    }

    if (*sim) {
      std::ifstream in(sim_config);
      if (!in) throw std::runtime_error("cannot open config: " + sim_config);
      elphi::json cfg_json = elphi::json::parse(in);
      elphi::SimulationConfig cfg = elphi::parse_simulation_config(cfg_json);
      if (sim_threads > 0) cfg.threads = sim_threads;
      elphi::SimulationGrid grid = elphi::run_grid(cfg);
      elphi::mark_near(grid, cfg.dale_d);
      if (!sim_out.empty()) {
        std::ofstream csv(sim_out + ".csv");
        if (!csv) throw std::runtime_error("cannot write: " + sim_out + ".csv");
        elphi::write_grid_csv(grid, csv);
        std::ofstream js(sim_out + ".json");
        if (!js) throw std::runtime_error("cannot write: " + sim_out + ".json");
        js << elphi::grid_json(grid).dump(2) << "\n";
      } else if (sim_format == "json") {
        std::cout << elphi::grid_json(grid).dump() << "\n";
      } else if (sim_format == "csv") {
        elphi::write_grid_csv(grid, std::cout);
      } else {
        throw std::invalid_argument("--format must be csv or json");
      }
      if (!sim_plot.empty()) elphi::write_plot_data(grid, sim_plot);
      if (!sim_out.empty()) print_summary(grid, cfg.dale_d);
      return 0;
    }

    if (*dale) {
      auto [lo, hi] = elphi::dale_interval(dale_alpha, dale_d);
      elphi::json out{{"alpha", dale_alpha}, {"d", dale_d}, {"lo", lo}, {"hi", hi}};
      std::cout << out.dump() << "\n";
      return 0;
    }
  } catch (const elphi::NoRoot& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
