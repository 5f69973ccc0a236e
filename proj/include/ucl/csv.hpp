#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "ucl/regret_bounds.hpp"
#include "ucl/sim.hpp"

namespace ucl {

namespace detail {

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

} // namespace detail

/// Per-step regret table: t, ensemble mean cumulative regret, its standard
/// error and the logarithmic lower envelope.
inline std::string regret_csv(const EnsembleResult& ensemble,
                              const LaiRobbinsBound& lower) {
  std::string out = "t,mean_cum_regret,sem,lai_robbins_lb\n";
  for (long t = 1; t <= ensemble.horizon; ++t) {
    const auto k = static_cast<std::size_t>(t - 1);
    out += std::to_string(t);
    out += ',';
    out += detail::format_number(ensemble.mean_cum_regret[k]);
    out += ',';
    out += detail::format_number(ensemble.sem_cum_regret[k]);
    out += ',';
    out += detail::format_number(lower(t));
    out += '\n';
  }
  return out;
}

/// Per-arm bound table: gap, prior gap, transient case and the two bound
/// pieces with their sum.
inline std::string bounds_csv(const BoundReport& report) {
  std::string out = "arm,delta_i,delta_m_i,case,eta_i,nhat_i,bound_total\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.arm);
    out += ',';
    out += detail::format_number(row.gap);
    out += ',';
    out += detail::format_number(row.prior_gap);
    out += ',';
    out += row.case_label;
    out += ',';
    out += detail::format_number(row.eta);
    out += ',';
    out += detail::format_number(row.nhat);
    out += ',';
    out += detail::format_number(row.total());
    out += '\n';
  }
  return out;
}

/// Per-arm comparison of empirical selection counts with their bound.
inline std::string verify_csv(const VerifyReport& report) {
  std::string out = "arm,empirical_n_i,bound,satisfied\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.arm);
    out += ',';
    out += detail::format_number(row.empirical);
    out += ',';
    out += detail::format_number(row.bound);
    out += ',';
    out += row.satisfied ? "true" : "false";
    out += '\n';
  }
  return out;
}

} // namespace ucl
