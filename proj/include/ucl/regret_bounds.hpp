#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ucl/bandit.hpp"
#include "ucl/errors.hpp"
#include "ucl/inference.hpp"
#include "ucl/normal.hpp"
#include "ucl/policy.hpp"

namespace ucl {

struct BoundParams {
  double epsilon = 1.0 / std::sqrt(10.0);
  double a = 2.0;
  double K = default_credibility_scale();
  double nu = 1.0;

  void validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0))
      throw config_error("bound epsilon must lie in (0, 1)");
    if (!(a > 1.0)) throw config_error("bound exponent a must exceed 1");
    if (!(K > 0.0)) throw config_error("bound scale K must be positive");
    if (!(nu > 0.0 && nu <= 1.0))
      throw config_error("bound threshold nu must lie in (0, 1]");
  }
};

/// Per-arm pieces of an expected-selection bound: E[n_i(T)] <= eta + nhat.
struct BoundRow {
  int arm = 0;
  double gap = 0.0;       // Delta_i = m_star - m_i
  double prior_gap = 0.0; // Delta m_i = m_i - mu0_i
  std::string case_label;
  double eta = 0.0;
  double nhat = 0.0;

  double total() const { return eta + nhat; }
};

struct BoundReport {
  int optimal_arm = 0;
  long horizon = 0;
  std::vector<BoundRow> rows;
  double lai_robbins_coeff = 0.0;

  /// Sum of gap * (eta + nhat) over suboptimal arms.
  double regret_bound() const {
    double acc = 0.0;
    for (const auto& r : rows) acc += r.gap * r.total();
    return acc;
  }
};

namespace detail {

inline void require_unique_optimum(const BanditInstance& inst) {
  if (!inst.has_unique_optimum())
    throw config_error("bound evaluation requires a unique optimal arm");
}

/// eta = max(1, ceil((4 sigma_s^2 / gap^2)(2 ln K + 2 a ln T) - offset)).
inline double selection_count_cap(double gap, double sampling_variance,
                                  const BoundParams& params, long horizon,
                                  double offset) {
  const double scale = 4.0 * sampling_variance / (gap * gap);
  const double raw = scale * (2.0 * std::log(params.K) +
                              2.0 * params.a * std::log(static_cast<double>(horizon))) -
                     offset;
  return std::max(1.0, std::ceil(raw));
}

struct BoundConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double leading = 0.0; // 3 a c1 / (2 (3 a c1 - 4))
  double tail = 0.0;    // a / (K (a - 1))
};

inline BoundConstants bound_constants(double delta_sq,
                                      const BoundParams& params) {
  BoundConstants c;
  c.c1 = (1.0 - params.epsilon) / (1.0 + delta_sq - params.epsilon);
  c.c2 = (1.0 - params.epsilon) / delta_sq;
  const double product = 3.0 * params.a * c.c1;
  if (!(product > 4.0)) {
    const double min_a =
        4.0 * (1.0 + delta_sq - params.epsilon) / (3.0 * (1.0 - params.epsilon));
    std::ostringstream msg;
    msg << "bound exponent a = " << params.a
        << " is inadmissible for delta_sq = " << delta_sq
        << "; need a > " << min_a;
    throw config_error(msg.str());
  }
  c.leading = product / (2.0 * (product - 4.0));
  c.tail = params.a / (params.K * (params.a - 1.0));
  return c;
}

} // namespace detail

/// Expected-selection bound for the independent-arm policy with an
/// informative prior of common variance sigma0^2.  Each suboptimal arm is
/// classified by the signs of the prior gaps (m - mu0) at the optimal arm
/// and at the arm itself; under-estimated optima and over-estimated
/// suboptimal arms carry the transient exponential terms.
inline BoundReport uncorrelated_regret_bound(const BanditInstance& inst,
                                             const GaussianPrior& prior,
                                             const BoundParams& params,
                                             long horizon) {
  params.validate();
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (prior.uninformative)
    throw config_error("this bound requires an informative prior");
  if (prior.num_arms() != inst.num_arms())
    throw std::invalid_argument("prior/instance size mismatch");
  if (!prior.is_diagonal())
    throw config_error("this bound requires a diagonal prior covariance");
  const double sigma0_sq = prior.covariance(0, 0);
  for (int i = 1; i < prior.num_arms(); ++i)
    if (std::abs(prior.covariance(i, i) - sigma0_sq) > 1e-12 * sigma0_sq)
      throw config_error("this bound requires a common prior variance");
  detail::require_unique_optimum(inst);

  const double sv = inst.sampling_variance;
  const double delta_sq = sv / sigma0_sq;
  const auto consts = detail::bound_constants(delta_sq, params);
  const int star = inst.optimal_arm();
  const double dm_star = inst.means[star] - prior.mean[star];

  const double exp_star_a = std::exp(2.0 * delta_sq * dm_star * dm_star /
                                     (3.0 * params.a * sigma0_sq));
  const double exp_star_b =
      std::exp(2.0 * dm_star * dm_star / (3.0 * params.a * sigma0_sq));
  const double star_max = std::max(exp_star_a, exp_star_b);
  const double star_tail = consts.leading * std::exp(consts.c2 * delta_sq *
                                                     dm_star * dm_star /
                                                     (2.0 * sigma0_sq));

  BoundReport report;
  report.optimal_arm = star;
  report.horizon = horizon;

  for (int i = 0; i < inst.num_arms(); ++i) {
    if (i == star) continue;
    BoundRow row;
    row.arm = i;
    row.gap = inst.means[star] - inst.means[i];
    row.prior_gap = inst.means[i] - prior.mean[i];
    row.eta = detail::selection_count_cap(row.gap, sv, params, horizon, delta_sq);
    report.lai_robbins_coeff += 2.0 * sv / row.gap;

    const double dm = row.prior_gap;
    const double arm_exp = std::exp(2.0 * delta_sq * dm * dm /
                                    (3.0 * params.a * sigma0_sq * row.eta));
    const double arm_tail = consts.leading * std::exp(consts.c2 * delta_sq * dm * dm /
                                                      (2.0 * sigma0_sq * row.eta));
    if (dm_star > 0.0 && dm < 0.0) {
      row.case_label = "opt_under_sub_over";
      row.nhat = star_max + star_tail + arm_exp + arm_tail;
    } else if (dm_star > 0.0) {
      row.case_label = "opt_under_sub_under";
      row.nhat = star_max + star_tail + consts.tail;
    } else if (dm < 0.0) {
      row.case_label = "opt_over_sub_over";
      row.nhat = arm_exp + arm_tail + consts.tail;
    } else {
      row.case_label = "opt_over_sub_under";
      row.nhat = 2.0 * consts.tail;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

/// Prior-mismatch coefficients for the correlated bound:
/// beta_i = sqrt(sigma_s^2 (1 + delta_icond^2) / nu) *
///          sum_j sum_k |lambda0_kj| |mu0_j - m_j|.
inline Eigen::VectorXd beta_coefficients(const GaussianPrior& prior,
                                         const Eigen::VectorXd& true_means,
                                         double sampling_variance, double nu) {
  if (prior.uninformative)
    throw config_error("beta coefficients require an informative prior");
  if (true_means.size() != prior.num_arms())
    throw std::invalid_argument("beta_coefficients: size mismatch");
  if (!(nu > 0.0 && nu <= 1.0))
    throw std::invalid_argument("nu must lie in (0, 1]");

  const Eigen::MatrixXd lambda0 = prior.precision();
  const Eigen::VectorXd abs_col_sums = lambda0.cwiseAbs().colwise().sum();
  const double mismatch =
      abs_col_sums.dot((prior.mean - true_means).cwiseAbs());

  const int n = prior.num_arms();
  Eigen::VectorXd beta(n);
  for (int i = 0; i < n; ++i) {
    const double d2 = conditional_delta_sq(prior, i, sampling_variance);
    beta[i] = std::sqrt(sampling_variance * (1.0 + d2) / nu) * mismatch;
  }
  return beta;
}

/// Expected-selection bound (selections after the initialization phase) for
/// the correlated policy with an arbitrary SPD prior.  The transient terms
/// run through the prior-mismatch coefficients beta; the admissibility
/// constants are built from the worst-case conditional precision ratio.
inline BoundReport correlated_regret_bound(const BanditInstance& inst,
                                           const GaussianPrior& prior,
                                           const BoundParams& params,
                                           long horizon) {
  params.validate();
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (prior.uninformative)
    throw config_error("this bound requires an informative prior");
  if (prior.num_arms() != inst.num_arms())
    throw std::invalid_argument("prior/instance size mismatch");
  detail::require_unique_optimum(inst);

  const double sv = inst.sampling_variance;
  const int n = inst.num_arms();
  Eigen::VectorXd cond_delta_sq(n);
  for (int i = 0; i < n; ++i)
    cond_delta_sq[i] = conditional_delta_sq(prior, i, sv);
  const double delta_sq = cond_delta_sq.maxCoeff();
  const auto consts = detail::bound_constants(delta_sq, params);

  Eigen::VectorXd means(n);
  for (int i = 0; i < n; ++i) means[i] = inst.means[i];
  const Eigen::VectorXd beta = beta_coefficients(prior, means, sv, params.nu);

  const int star = inst.optimal_arm();
  const double beta_star_sq = beta[star] * beta[star];
  const double star_ratio = cond_delta_sq[star] / (1.0 + cond_delta_sq[star]);
  const double star_max =
      std::max(std::exp(2.0 * beta_star_sq * star_ratio / (3.0 * params.a * params.nu)),
               std::exp(2.0 * beta_star_sq / (3.0 * params.a)));

  BoundReport report;
  report.optimal_arm = star;
  report.horizon = horizon;

  for (int i = 0; i < n; ++i) {
    if (i == star) continue;
    BoundRow row;
    row.arm = i;
    row.gap = inst.means[star] - inst.means[i];
    row.prior_gap = inst.means[i] - prior.mean[i];
    row.case_label = "correlated";
    row.eta = detail::selection_count_cap(row.gap, sv, params, horizon, params.nu);
    report.lai_robbins_coeff += 2.0 * sv / row.gap;

    const double beta_i_sq = beta[i] * beta[i];
    const double arm_tail = consts.leading * std::exp(consts.c2 * beta_i_sq / 2.0);
    row.nhat = star_max + arm_tail + std::exp(2.0 * beta_i_sq / (3.0 * params.a)) +
               arm_tail;
    report.rows.push_back(std::move(row));
  }
  return report;
}

/// Asymptotic lower envelope on expected cumulative regret for consistent
/// policies on Gaussian arms with common noise: coeff * ln t with
/// coeff = sum over suboptimal arms of 2 sigma_s^2 / gap.
struct LaiRobbinsBound {
  double coeff = 0.0;

  double operator()(long t) const {
    return t < 1 ? 0.0 : coeff * std::log(static_cast<double>(t));
  }

  std::vector<double> curve(long horizon) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));
    for (long t = 1; t <= horizon; ++t) out.push_back((*this)(t));
    return out;
  }
};

inline LaiRobbinsBound lai_robbins_lower_bound(const BanditInstance& inst) {
  const int star = inst.optimal_arm();
  LaiRobbinsBound lb;
  for (int i = 0; i < inst.num_arms(); ++i) {
    const double gap = inst.means[star] - inst.means[i];
    if (gap > 0.0) lb.coeff += 2.0 * inst.sampling_variance / gap;
  }
  return lb;
}

/// Outcome of a numeric inequality sweep.
struct SweepReport {
  bool pass = true;
  long points = 0;
  std::vector<std::string> failures;

  void record_failure(const std::string& what) {
    pass = false;
    if (failures.size() < 8) failures.push_back(what);
  }
};

namespace detail {

inline bool leq_with_slack(double lhs, double rhs) {
  return lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs));
}

} // namespace detail

/// Sweeps the standard-normal tail sandwich and the quantile envelopes used
/// by the regret analysis:
///  - for w in [0, 10]:  lower <= P(Z >= w) <= upper1 <= upper2,
///  - for alpha below 1/sqrt(2 pi): quantile bracket between the
///    sqrt(-2 ln alpha) cap and the radicand-positive lower envelope
///    (the lower envelope's derivation breaks beyond its first zero at
///    alpha = 1/sqrt(2 pi), so the sweep stops there),
///  - for t in {1..10^4}, a in {1.5, 2, 3}:
///    quantile(1 - 1/(sqrt(2 pi e) t^a)) > sqrt((3a/2) ln t).
inline SweepReport verify_gaussian_tail_bounds(int grid_points = 10000) {
  SweepReport report;
  std::ostringstream msg;

  for (int k = 0; k < grid_points; ++k) {
    const double w = 10.0 * static_cast<double>(k) / (grid_points - 1);
    const double tail = norm_upper_tail(w);
    const double gauss = std::exp(-0.5 * w * w);
    const double upper1 = 2.0 * gauss /
                          (std::sqrt(two_pi) *
                           (w + std::sqrt(w * w + 8.0 / std::numbers::pi_v<double>)));
    const double upper2 = 0.5 * gauss;
    const double lower = std::sqrt(2.0 / std::numbers::pi_v<double>) * gauss /
                         (w + std::sqrt(w * w + 4.0));
    ++report.points;
    if (!detail::leq_with_slack(tail, upper1)) {
      msg.str("");
      msg << "tail above first upper bound at w = " << w;
      report.record_failure(msg.str());
    }
    if (!detail::leq_with_slack(upper1, upper2)) {
      msg.str("");
      msg << "upper bounds out of order at w = " << w;
      report.record_failure(msg.str());
    }
    if (!detail::leq_with_slack(lower, tail)) {
      msg.str("");
      msg << "tail below lower bound at w = " << w;
      report.record_failure(msg.str());
    }
  }

  const double alpha_cut = 1.0 / std::sqrt(two_pi);
  const double lo = std::log(1e-9);
  const double hi = std::log(0.5);
  for (int k = 0; k < grid_points; ++k) {
    const double alpha =
        std::exp(lo + (hi - lo) * static_cast<double>(k) / (grid_points - 1));
    const double z = inv_norm_cdf(1.0 - alpha);
    ++report.points;
    if (!detail::leq_with_slack(z, std::sqrt(-2.0 * std::log(alpha)))) {
      msg.str("");
      msg << "quantile above sqrt(-2 ln alpha) at alpha = " << alpha;
      report.record_failure(msg.str());
    }
    if (alpha < alpha_cut) {
      const double inner = two_pi * alpha * alpha;
      const double radicand = -std::log(inner * (1.0 - std::log(inner)));
      if (radicand > 0.0 &&
          !(z > std::sqrt(radicand) - 1e-12)) {
        msg.str("");
        msg << "quantile below lower envelope at alpha = " << alpha;
        report.record_failure(msg.str());
      }
    }
  }

  const double scale = default_credibility_scale();
  for (double a : {1.5, 2.0, 3.0}) {
    for (long t = 1; t <= 10000; ++t) {
      const double alpha = 1.0 / (scale * std::pow(static_cast<double>(t), a));
      const double z = inv_norm_cdf(1.0 - alpha);
      const double rhs = std::sqrt(1.5 * a * std::log(static_cast<double>(t)));
      ++report.points;
      if (!(z > rhs - 1e-12)) {
        msg.str("");
        msg << "credibility quantile fell below sqrt((3a/2) ln t) at t = " << t
            << ", a = " << a;
        report.record_failure(msg.str());
      }
    }
  }
  return report;
}

/// Samples admissible (c1, c2) pairs with (1 - c1)(1 + c2) >= 1 and checks
/// (x - y)^2 >= c1 x^2 - c2 y^2 on random x, y in [-1e6, 1e6].
inline SweepReport verify_difference_of_squares(long samples = 1000000,
                                                std::uint64_t seed = 2024) {
  SweepReport report;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> c1_draw(-3.0, 1.0);
  std::uniform_real_distribution<double> extra_draw(0.0, 3.0);
  std::uniform_real_distribution<double> xy_draw(-1e6, 1e6);
  std::ostringstream msg;

  for (long s = 0; s < samples; ++s) {
    double c1 = c1_draw(rng);
    if (c1 >= 1.0) continue; // inadmissible: (1 - c1)(1 + c2) < 1 for any c2
    const double c2 = c1 / (1.0 - c1) + extra_draw(rng);
    const double x = xy_draw(rng);
    const double y = xy_draw(rng);
    const double lhs = (x - y) * (x - y);
    const double rhs = c1 * x * x - c2 * y * y;
    ++report.points;
    const double slack = 1e-9 * (x * x + y * y + 1.0);
    if (!(lhs >= rhs - slack)) {
      msg.str("");
      msg << "difference-of-squares inequality failed at c1 = " << c1
          << ", c2 = " << c2 << ", x = " << x << ", y = " << y;
      report.record_failure(msg.str());
    }
  }
  return report;
}

} // namespace ucl
