// Apache License, Version 2.0, refer to LICENSE.txt
//
// Command-line planner: synthesises the collective prior from historical
// summaries, solves the ACC/ALC/APVC sample sizes, sweeps design parameters
// to CSV, and verifies solutions with the Monte Carlo oracle.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpssd/cpssd.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

void print_prior_table(const cpssd::DesignConfig& config, const cpssd::CollectivePrior& prior) {
  std::printf("collective prior synthesis (K=%zu)\n", prior.K());
  std::printf("  k        m_k      s_k^2      w_k        p_k     xi_k^2\n");
  for (std::size_t k = 0; k < prior.K(); ++k) {
    const auto& src = config.sources[k];
    const auto& term = prior.per_source[k];
    std::printf("%3zu  %9.4f  %9.4f  %7.3f  %9.4f  %9.4f\n", k + 1, src.m, src.v, src.w.w,
                term.p, term.xi2);
  }
  std::printf("collective prior: N(%.4f, %.4f)\n", prior.mean, prior.variance);
  const auto ci = cpssd::prior_credible_interval(prior, 0.95);
  std::printf("95%% credible interval: (%.4f, %.4f)\n", ci.lo, ci.hi);
}

void print_hellinger_matrix(const cpssd::DesignConfig& config) {
  const std::size_t n = config.sources.size();
  std::printf("pairwise squared Hellinger distances:\n     ");
  for (std::size_t j = 0; j < n; ++j) std::printf("%9zu", j + 1);
  std::printf("\n");
  for (std::size_t i = 0; i < n; ++i) {
    std::printf("%3zu  ", i + 1);
    for (std::size_t j = 0; j < n; ++j) {
      const double h2 = cpssd::hellinger_squared(
          cpssd::NormalParams(config.sources[i].m, config.sources[i].v),
          cpssd::NormalParams(config.sources[j].m, config.sources[j].v));
      std::printf("%9.5f", h2);
    }
    std::printf("\n");
  }
}

int cmd_prior(const std::string& config_path) {
  const auto config = cpssd::load_design_config(config_path);
  const auto prior =
      cpssd::build_collective_prior(config.sources, config.hyper, config.weight_rule);
  print_prior_table(config, prior);
  print_hellinger_matrix(config);
  return kExitOk;
}

int cmd_hellinger(const std::string& config_path) {
  const auto config = cpssd::load_design_config(config_path);
  print_hellinger_matrix(config);
  return kExitOk;
}

int cmd_ssd(const std::string& config_path) {
  const auto config = cpssd::load_design_config(config_path);
  cpssd::validate_criteria_against_variance(config);
  const auto prior =
      cpssd::build_collective_prior(config.sources, config.hyper, config.weight_rule);

  if (config.variance.is_known()) {
    std::printf("variance model: known sigma0^2 = %.4f\n", config.variance.sigma2());
  } else {
    std::printf("variance model: unknown, c = %g\n", config.variance.dof());
  }
  std::printf("allocation nA:nB = %d:%d, prior N(%.4f, %.4f)\n", config.allocation.ratio_A,
              config.allocation.ratio_B, prior.mean, prior.variance);
  std::printf("criterion   method       real_total    nA    nB   achieved\n");
  for (const auto& crit : config.criteria) {
    const auto result = cpssd::solve(prior, crit, config.variance, config.allocation);
    const char* method =
        result.method == cpssd::SSDResult::Method::closed_form ? "closed_form" : "search";
    char total[32] = "";
    if (result.real_total) {
      std::snprintf(total, sizeof(total), "%10.1f", *result.real_total);
    } else {
      std::snprintf(total, sizeof(total), "%10d", result.nA + result.nB);
    }
    std::printf("%-10s  %-11s  %s  %4d  %4d   %.6f%s\n", cpssd::criterion_name(crit), method,
                total, result.nA, result.nB, result.achieved,
                result.nA + result.nB == 0
                    ? "   (prior alone meets the criterion; no new experiment needed)"
                    : "");
  }
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& axis_name,
              const std::vector<double>& values, const std::vector<std::string>& mode_names,
              const std::string& out_path) {
  const auto config = cpssd::load_design_config(config_path);
  cpssd::SweepSpec spec;
  spec.axis = cpssd::parse_sweep_axis(axis_name);
  spec.values = values;
  for (const auto& name : mode_names) spec.modes.push_back(cpssd::parse_sweep_mode(name));
  spec.validate();
  if (spec.axis != cpssd::SweepAxis::c) cpssd::validate_criteria_against_variance(config);

  const auto rows = cpssd::run_sweep(config, spec);
  const std::string csv = cpssd::format_sweep_csv(spec.axis, rows);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot open output file: " << out_path << "\n";
    return kExitIo;
  }
  out << csv;
  out.close();
  if (!out) {
    std::cerr << "failed writing output file: " << out_path << "\n";
    return kExitIo;
  }
  std::printf("wrote %zu rows to %s\n", rows.size(), out_path.c_str());
  return kExitOk;
}

int cmd_verify(const std::string& config_path, int n_total, std::int64_t draws,
               std::uint64_t seed) {
  const auto config = cpssd::load_design_config(config_path);
  if (n_total < 0) throw cpssd::ValidationError("verify.n: must be >= 0");
  int nA = 0, nB = 0;
  if (n_total >= 2) {
    const auto split = cpssd::split_total(n_total, config.allocation);
    nA = split.first;
    nB = split.second;
  } else if (n_total == 1) {
    throw cpssd::ValidationError("verify.n: a one-unit experiment cannot fill both groups");
  }
  const auto prior =
      cpssd::build_collective_prior(config.sources, config.hyper, config.weight_rule);
  const cpssd::SimulationPlan plan{draws, seed};

  std::printf("monte carlo verification: nA=%d, nB=%d (draws=%lld, seed=%llu)\n", nA, nB,
              static_cast<long long>(draws), static_cast<unsigned long long>(seed));
  bool all_pass = true;
  for (const auto& crit : config.criteria) {
    if (const auto* acc = std::get_if<cpssd::AccCriterion>(&crit)) {
      const auto est = cpssd::simulate_average_coverage(prior, config.variance, nA, nB,
                                                        acc->l0, plan);
      const double target = 1.0 - acc->alpha;
      const bool pass = est.value >= target - 3.0 * est.std_error;
      all_pass = all_pass && pass;
      std::printf("  average coverage (l0=%g):           %.6f +/- %.6f  [>= %.3f at 3 SE: %s]\n",
                  acc->l0, est.value, est.std_error, target, pass ? "PASS" : "FAIL");
    } else if (const auto* alc = std::get_if<cpssd::AlcCriterion>(&crit)) {
      const auto est = cpssd::simulate_average_length(prior, config.variance, nA, nB,
                                                      alc->alpha0, plan);
      const bool pass = est.value <= alc->l + 3.0 * est.std_error;
      all_pass = all_pass && pass;
      std::printf("  average length (alpha0=%g):         %.6f +/- %.6f  [<= %.3f at 3 SE: %s]\n",
                  alc->alpha0, est.value, est.std_error, alc->l, pass ? "PASS" : "FAIL");
    } else if (const auto* apvc = std::get_if<cpssd::ApvcCriterion>(&crit)) {
      const auto est =
          cpssd::simulate_average_posterior_variance(prior, config.variance, nA, nB, plan);
      const bool pass = est.value <= apvc->eps0 + 3.0 * est.std_error;
      all_pass = all_pass && pass;
      std::printf("  average posterior variance:         %.6f +/- %.6f  [<= %.3f at 3 SE: %s]\n",
                  est.value, est.std_error, apvc->eps0, pass ? "PASS" : "FAIL");
    }
  }
  std::printf("overall: %s\n", all_pass ? "PASS" : "FAIL");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian two-group sample sizes from commensurate collective priors"};
  app.require_subcommand(1);

  std::string config_path;
  std::string axis_name;
  std::vector<double> values;
  std::vector<std::string> modes{"robust"};
  std::string out_path;
  int n_total = 0;
  std::int64_t draws = 100000;
  std::uint64_t seed = 20260809;

  auto* prior_cmd = app.add_subcommand("prior", "print the collective prior synthesis report");
  prior_cmd->add_option("--config", config_path, "design config JSON")->required();

  auto* ssd_cmd = app.add_subcommand("ssd", "solve the configured sample-size criteria");
  ssd_cmd->add_option("--config", config_path, "design config JSON")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "solve across an axis of design values, emit CSV");
  sweep_cmd->add_option("--config", config_path, "design config JSON")->required();
  sweep_cmd->add_option("--axis", axis_name, "one of alpha|l0|l|eps0|c|a02|b02")->required();
  sweep_cmd->add_option("--values", values, "comma-separated axis values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--modes", modes,
                        "subset of robust,no_robustification,no_borrowing,single_source,optimal")
      ->delimiter(',');
  sweep_cmd->add_option("--out", out_path, "output CSV path")->required();

  auto* verify_cmd = app.add_subcommand("verify", "Monte Carlo check of a candidate total n");
  verify_cmd->add_option("--config", config_path, "design config JSON")->required();
  verify_cmd->add_option("--n", n_total, "total sample size to verify")->required();
  verify_cmd->add_option("--draws", draws, "Monte Carlo draws");
  verify_cmd->add_option("--seed", seed, "RNG seed");

  auto* hellinger_cmd =
      app.add_subcommand("hellinger", "pairwise squared Hellinger distances between sources");
  hellinger_cmd->add_option("--config", config_path, "design config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (prior_cmd->parsed()) return cmd_prior(config_path);
    if (ssd_cmd->parsed()) return cmd_ssd(config_path);
    if (sweep_cmd->parsed()) return cmd_sweep(config_path, axis_name, values, modes, out_path);
    if (verify_cmd->parsed()) return cmd_verify(config_path, n_total, draws, seed);
    if (hellinger_cmd->parsed()) return cmd_hellinger(config_path);
  } catch (const cpssd::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const cpssd::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const cpssd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitValidation;
}
