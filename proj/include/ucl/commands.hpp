#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ucl/config.hpp"
#include "ucl/csv.hpp"
#include "ucl/errors.hpp"
#include "ucl/sim.hpp"
#include "ucl/svg.hpp"

namespace ucl {

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
  if (!out) throw std::runtime_error("cannot write output file: " + path);
}

inline const char* variant_name(PolicyParams::Variant v) {
  switch (v) {
    case PolicyParams::Variant::uninformative: return "uninformative";
    case PolicyParams::Variant::uncorrelated: return "uncorrelated";
    case PolicyParams::Variant::correlated: return "correlated";
  }
  return "unknown";
}

} // namespace detail

/// Runs the configured ensemble and writes the regret CSV (and optionally an
/// SVG chart of the mean curve against the logarithmic lower envelope).
inline int run_simulate(const ExperimentConfig& cfg, const std::string& out_path,
                        const std::optional<std::string>& plot_path,
                        int threads, std::ostream& log = std::cout) {
  const BanditInstance inst = resolved_instance(cfg);
  const GaussianPrior prior = resolved_prior(cfg, inst);
  const PolicyParams params = resolved_policy(cfg);

  const EnsembleResult ensemble =
      run_ensemble(inst, prior, params, cfg.run.horizon, cfg.run.runs,
                   cfg.run.seed, threads);
  const LaiRobbinsBound lower = lai_robbins_lower_bound(inst);

  detail::write_file(out_path, regret_csv(ensemble, lower));
  log << "simulate: " << detail::variant_name(params.variant) << " policy, "
      << ensemble.runs << " runs, T = " << ensemble.horizon
      << ", final mean regret " << detail::format_number(ensemble.final_mean_regret())
      << " (sem " << detail::format_number(ensemble.final_sem()) << ") -> "
      << out_path << "\n";
  if (ensemble.total_violations > 0)
    log << "simulate: warning: " << ensemble.total_violations
        << " posterior-envelope violations logged\n";

  if (plot_path) {
    std::vector<PlotSeries> series;
    series.push_back({std::string(detail::variant_name(params.variant)) +
                          " policy (mean of " + std::to_string(ensemble.runs) +
                          " runs)",
                      "#1f6fb2", ensemble.mean_cum_regret});
    series.push_back({"logarithmic lower envelope", "#c04a3b",
                      lower.curve(ensemble.horizon)});
    detail::write_file(*plot_path,
                       render_line_chart(series, "Mean cumulative regret",
                                         "t", "cumulative regret"));
    log << "simulate: plot -> " << *plot_path << "\n";
  }
  return 0;
}

/// Evaluates the expected-selection bound matching the configured variant and
/// writes the per-arm table.
inline int run_bounds(const ExperimentConfig& cfg, const std::string& out_path,
                      std::ostream& log = std::cout) {
  const BanditInstance inst = resolved_instance(cfg);
  const GaussianPrior prior = resolved_prior(cfg, inst);
  const BoundParams params = resolved_bound_params(cfg);

  BoundReport report;
  switch (cfg.prior.variant) {
    case PolicyParams::Variant::uncorrelated:
      report = uncorrelated_regret_bound(inst, prior, params, cfg.run.horizon);
      break;
    case PolicyParams::Variant::correlated:
      report = correlated_regret_bound(inst, prior, params, cfg.run.horizon);
      break;
    case PolicyParams::Variant::uninformative:
      throw config_error(
          "bound evaluation requires an informative prior variant");
  }

  detail::write_file(out_path, bounds_csv(report));
  log << "bounds: " << report.rows.size() << " suboptimal arms, T = "
      << report.horizon << ", regret bound "
      << detail::format_number(report.regret_bound()) << " -> " << out_path
      << "\n";
  return 0;
}

/// Runs the ensemble, evaluates the matching bound and compares per-arm
/// selection counts.  Exit 0 iff every suboptimal arm satisfies its bound.
inline int run_verify(const ExperimentConfig& cfg, const std::string& out_path,
                      int threads, std::ostream& log = std::cout) {
  if (cfg.policy.a != cfg.bounds.a)
    throw config_error(
        "verification requires policy.a == bounds.a: the bound describes the "
        "policy run with the same credibility exponent");
  if (cfg.prior.variant == PolicyParams::Variant::uninformative)
    throw config_error(
        "bound verification requires an informative prior variant");

  const BanditInstance inst = resolved_instance(cfg);
  const GaussianPrior prior = resolved_prior(cfg, inst);
  const PolicyParams params = resolved_policy(cfg);
  const BoundParams bound_params = resolved_bound_params(cfg);

  const bool correlated = cfg.prior.variant == PolicyParams::Variant::correlated;
  const BoundReport report =
      correlated
          ? correlated_regret_bound(inst, prior, bound_params, cfg.run.horizon)
          : uncorrelated_regret_bound(inst, prior, bound_params, cfg.run.horizon);

  const EnsembleResult ensemble =
      run_ensemble(inst, prior, params, cfg.run.horizon, cfg.run.runs,
                   cfg.run.seed, threads);
  const VerifyReport verdict = verify_bounds(ensemble, report, correlated);

  detail::write_file(out_path, verify_csv(verdict));
  for (const auto& row : verdict.rows)
    log << "verify: arm " << row.arm << " mean selections "
        << detail::format_number(row.empirical) << " (sem "
        << detail::format_number(row.sem) << ") vs bound "
        << detail::format_number(row.bound) << " -> "
        << (row.satisfied ? "ok" : "VIOLATED") << "\n";
  log << "verify: " << (verdict.all_satisfied() ? "all bounds satisfied"
                                                : "bound violation")
      << " -> " << out_path << "\n";
  return verdict.all_satisfied() ? 0 : 3;
}

/// Numeric inequality sweeps behind the regret analysis.  Exit 0 iff all
/// sampled points satisfy their inequalities.
inline int run_check(int grid_points, long samples,
                     std::ostream& log = std::cout) {
  const SweepReport tails = verify_gaussian_tail_bounds(grid_points);
  log << "check: tail and quantile sweeps: " << tails.points << " points, "
      << (tails.pass ? "pass" : "FAIL") << "\n";
  for (const auto& f : tails.failures) log << "check:   " << f << "\n";

  const SweepReport squares = verify_difference_of_squares(samples);
  log << "check: difference-of-squares sweep: " << squares.points
      << " points, " << (squares.pass ? "pass" : "FAIL") << "\n";
  for (const auto& f : squares.failures) log << "check:   " << f << "\n";

  return (tails.pass && squares.pass) ? 0 : 3;
}

} // namespace ucl
