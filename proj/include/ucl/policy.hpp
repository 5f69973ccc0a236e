#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "ucl/inference.hpp"
#include "ucl/normal.hpp"

namespace ucl {

/// Default credibility scale sqrt(2 pi e).
inline double default_credibility_scale() {
  return std::sqrt(2.0 * std::numbers::pi_v<double> * std::numbers::e_v<double>);
}

struct PolicyParams {
  enum class Variant { uninformative, uncorrelated, correlated };
  Variant variant = Variant::correlated;
  double K = default_credibility_scale();
  double a = 1.0;
  double nu = 1.0; // initialization threshold: explore while var > sigma_s^2 / nu

  void validate() const {
    if (!(K > 0.0)) throw std::invalid_argument("policy scale K must be positive");
    if (!(a > 0.0)) throw std::invalid_argument("policy exponent a must be positive");
    if (!(nu > 0.0 && nu <= 1.0))
      throw std::invalid_argument("policy threshold nu must lie in (0, 1]");
  }
};

/// Credibility level at step t: alpha_t = 1 / (K t^a), clamped to 0.5 so the
/// quantile never goes negative.
inline double credibility_level(long t, const PolicyParams& params) {
  if (t < 1) throw std::invalid_argument("step index must be >= 1");
  const double alpha = 1.0 / (params.K * std::pow(static_cast<double>(t), params.a));
  return std::min(alpha, 0.5);
}

/// Upper credible limits Q_i = mu_i + sigma_i * quantile(1 - alpha_t) for
/// independent-arm posteriors.  Arms with unbounded uncertainty record +inf;
/// that value is a marker inspected before any finite comparison, never an
/// operand.
inline Eigen::VectorXd ucl_index(const PosteriorState& state, long t,
                                 const PolicyParams& params) {
  params.validate();
  if (params.variant == PolicyParams::Variant::correlated)
    throw std::invalid_argument("ucl_index expects an independent-arm variant");
  const double z = inv_norm_cdf(1.0 - credibility_level(t, params));
  Eigen::VectorXd q(state.n_arms);
  for (int i = 0; i < state.n_arms; ++i) {
    if (state.infinite_variance(i)) {
      q[i] = std::numeric_limits<double>::infinity();
    } else {
      q[i] = state.mu[i] + std::sqrt(state.var[i]) * z;
    }
  }
  return q;
}

/// Upper credible limits with the correlation-mass widening:
/// Q_i = mu_i + sigma_i * sqrt(sum_j rho_ij^2) * quantile(1 - alpha_t).
inline Eigen::VectorXd correlated_ucl_index(const PosteriorState& state, long t,
                                            const PolicyParams& params) {
  params.validate();
  if (params.variant != PolicyParams::Variant::correlated)
    throw std::invalid_argument("correlated_ucl_index expects the correlated variant");
  const double z = inv_norm_cdf(1.0 - credibility_level(t, params));
  const Eigen::VectorXd rho_norm = correlation_profile(state);
  Eigen::VectorXd q(state.n_arms);
  for (int i = 0; i < state.n_arms; ++i)
    q[i] = state.mu[i] + std::sqrt(state.var[i]) * rho_norm[i] * z;
  return q;
}

/// Pre-exploration rule: among arms whose posterior variance still exceeds
/// sigma_s^2 / nu, pick the one with the largest variance (lowest index on
/// ties).  Empty once every variance has fallen to the threshold.
inline std::optional<int> initialization_step(const PosteriorState& state,
                                              double nu) {
  if (!(nu > 0.0 && nu <= 1.0))
    throw std::invalid_argument("nu must lie in (0, 1]");
  const double threshold = state.sampling_variance / nu;
  std::optional<int> pick;
  for (int i = 0; i < state.n_arms; ++i) {
    if (state.var[i] > threshold && (!pick || state.var[i] > state.var[*pick]))
      pick = i;
  }
  return pick;
}

struct Decision {
  enum class Phase { initialization, ucb };
  int arm = 0;
  Eigen::VectorXd indices; // UCB-phase credible limits, or variances during
                           // the initialization phase
  Phase phase = Phase::ucb;
};

/// Full arm-selection rule for step t.  The correlated variant runs the
/// variance-driven initialization phase first; all variants break ties
/// toward the lowest arm index.
inline Decision select_arm(const PosteriorState& state, long t,
                           const PolicyParams& params) {
  params.validate();
  Decision d;
  if (params.variant == PolicyParams::Variant::correlated) {
    if (auto init = initialization_step(state, params.nu)) {
      d.arm = *init;
      d.indices = state.var;
      d.phase = Decision::Phase::initialization;
      return d;
    }
    d.indices = correlated_ucl_index(state, t, params);
  } else {
    d.indices = ucl_index(state, t, params);
    // Unsampled flat-prior arms are selected ahead of any finite index.
    for (int i = 0; i < state.n_arms; ++i) {
      if (state.infinite_variance(i)) {
        d.arm = i;
        return d;
      }
    }
  }
  int best = 0;
  for (int i = 1; i < state.n_arms; ++i)
    if (d.indices[i] > d.indices[best]) best = i;
  d.arm = best;
  return d;
}

} // namespace ucl
