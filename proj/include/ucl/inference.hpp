#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucl/errors.hpp"

namespace ucl {

/// Conjugate Gaussian prior over the arm means.  Either uninformative (flat,
/// no mean/covariance) or informative with an SPD covariance.
struct GaussianPrior {
  bool uninformative = false;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  int num_arms() const { return static_cast<int>(mean.size()); }

  static GaussianPrior flat(int n_arms) {
    if (n_arms < 1) throw std::invalid_argument("prior needs at least one arm");
    GaussianPrior p;
    p.uninformative = true;
    p.mean = Eigen::VectorXd::Zero(n_arms);
    return p;
  }

  static GaussianPrior informative(Eigen::VectorXd mean0,
                                   Eigen::MatrixXd covariance0) {
    if (mean0.size() < 1) throw std::invalid_argument("prior needs at least one arm");
    if (covariance0.rows() != mean0.size() || covariance0.cols() != mean0.size())
      throw std::invalid_argument("prior covariance shape mismatch");
    if (!covariance0.isApprox(covariance0.transpose(), 1e-12))
      throw std::invalid_argument("prior covariance must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(covariance0);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("prior covariance must be positive definite");
    GaussianPrior p;
    p.mean = std::move(mean0);
    p.covariance = std::move(covariance0);
    return p;
  }

  static GaussianPrior diagonal(Eigen::VectorXd mean0, double variance0,
                                int n_arms) {
    if (variance0 <= 0.0)
      throw std::invalid_argument("prior variance must be positive");
    return informative(std::move(mean0),
                       variance0 * Eigen::MatrixXd::Identity(n_arms, n_arms));
  }

  bool is_diagonal(double tol = 0.0) const {
    if (uninformative) return true;
    for (Eigen::Index i = 0; i < covariance.rows(); ++i)
      for (Eigen::Index j = 0; j < covariance.cols(); ++j)
        if (i != j && std::abs(covariance(i, j)) > tol) return false;
    return true;
  }

  /// Precision matrix of the prior (informative only).
  Eigen::MatrixXd precision() const {
    if (uninformative)
      throw std::invalid_argument("flat prior has no precision matrix");
    const Eigen::Index n = covariance.rows();
    return Eigen::LLT<Eigen::MatrixXd>(covariance).solve(
        Eigen::MatrixXd::Identity(n, n));
  }
};

/// Sequential Gaussian posterior over arm means.  Two storage layouts:
/// `diagonal` keeps per-arm scalars (flat priors and independent-arm priors),
/// `matrix` maintains the full covariance/precision pair with rank-one
/// updates, periodic re-synchronization and an accumulated information
/// vector.
class PosteriorState {
public:
  enum class Mode { diagonal, matrix };

  static constexpr int resync_interval = 256;

  Mode mode = Mode::diagonal;
  int n_arms = 0;
  double sampling_variance = 1.0;

  // Diagonal layout: per-arm precision ratio sampling_variance / prior
  // variance (zero for a flat prior).
  Eigen::VectorXd delta_sq;
  Eigen::VectorXd prior_mean;

  // Matrix layout.
  Eigen::MatrixXd Sigma;
  Eigen::MatrixXd Lambda;
  Eigen::VectorXd info; // accumulated information vector q(t)

  // Posterior summary, valid in both layouts.  Arms with unbounded
  // uncertainty (flat prior, never sampled) are flagged by
  // `infinite_variance`; their `var` slot holds +inf as a diagnostic value
  // that never enters index arithmetic.
  Eigen::VectorXd mu;
  Eigen::VectorXd var;

  std::vector<long> counts;
  Eigen::VectorXd reward_sums;

  static PosteriorState diagonal(const GaussianPrior& prior,
                                 double sampling_variance) {
    check_sampling_variance(sampling_variance);
    if (!prior.uninformative && !prior.is_diagonal())
      throw std::invalid_argument(
          "diagonal posterior layout requires a flat or diagonal prior");
    PosteriorState s;
    s.mode = Mode::diagonal;
    s.n_arms = prior.num_arms();
    s.sampling_variance = sampling_variance;
    s.counts.assign(static_cast<std::size_t>(s.n_arms), 0);
    s.reward_sums = Eigen::VectorXd::Zero(s.n_arms);
    if (prior.uninformative) {
      s.delta_sq = Eigen::VectorXd::Zero(s.n_arms);
      s.prior_mean = Eigen::VectorXd::Zero(s.n_arms);
      s.mu = Eigen::VectorXd::Zero(s.n_arms);
      s.var = Eigen::VectorXd::Constant(
          s.n_arms, std::numeric_limits<double>::infinity());
    } else {
      s.delta_sq = sampling_variance *
                   prior.covariance.diagonal().cwiseInverse();
      s.prior_mean = prior.mean;
      s.mu = prior.mean;
      s.var = prior.covariance.diagonal();
    }
    return s;
  }

  static PosteriorState matrix(const GaussianPrior& prior,
                               double sampling_variance) {
    check_sampling_variance(sampling_variance);
    if (prior.uninformative)
      throw std::invalid_argument("matrix posterior layout requires an informative prior");
    PosteriorState s;
    s.mode = Mode::matrix;
    s.n_arms = prior.num_arms();
    s.sampling_variance = sampling_variance;
    s.counts.assign(static_cast<std::size_t>(s.n_arms), 0);
    s.reward_sums = Eigen::VectorXd::Zero(s.n_arms);
    s.Sigma = prior.covariance;
    s.Lambda = prior.precision();
    s.info = s.Lambda * prior.mean;
    s.mu = prior.mean;
    s.var = s.Sigma.diagonal();
    s.prior_mean = prior.mean;
    return s;
  }

  bool infinite_variance(int arm) const {
    return mode == Mode::diagonal && delta_sq[arm] == 0.0 &&
           counts[static_cast<std::size_t>(arm)] == 0;
  }

  double empirical_mean(int arm) const {
    const long n = counts[static_cast<std::size_t>(arm)];
    return n == 0 ? 0.0 : reward_sums[arm] / static_cast<double>(n);
  }

  long total_count() const {
    long t = 0;
    for (long c : counts) t += c;
    return t;
  }

  /// Recompute Sigma from Lambda by a direct SPD solve, checking that the
  /// incrementally maintained copy has not drifted (matrix layout only).
  void resync() {
    if (mode != Mode::matrix) return;
    Eigen::LLT<Eigen::MatrixXd> llt(Lambda);
    if (llt.info() != Eigen::Success)
      throw numeric_error("posterior precision lost positive definiteness");
    const Eigen::MatrixXd solved =
        llt.solve(Eigen::MatrixXd::Identity(n_arms, n_arms));
    const double scale = solved.cwiseAbs().maxCoeff();
    const double drift = (Sigma - solved).cwiseAbs().maxCoeff();
    if (!(drift <= 1e-8 * scale))
      throw numeric_error(
          "covariance drifted from precision past tolerance: rel " +
          std::to_string(drift / scale));
    Sigma = solved;
    Sigma = ((Sigma + Sigma.transpose()) * 0.5).eval();
    mu = Sigma * info;
    var = Sigma.diagonal();
  }

  int updates_since_resync = 0;

private:
  static void check_sampling_variance(double v) {
    if (v <= 0.0)
      throw std::invalid_argument("sampling variance must be positive");
  }
};

/// Convenience constructor: flat priors get the diagonal layout, informative
/// priors the full matrix layout.
inline PosteriorState init_state(const GaussianPrior& prior,
                                 double sampling_variance) {
  return prior.uninformative
             ? PosteriorState::diagonal(prior, sampling_variance)
             : PosteriorState::matrix(prior, sampling_variance);
}

/// Folds one observed reward into the posterior.  The information vector
/// accumulates r * phi / sigma_s^2, the precision gains phi * phi^T /
/// sigma_s^2, and the covariance takes the matching rank-one downdate
/// Sigma' = Sigma - (Sigma phi phi^T Sigma) / (sigma_s^2 + phi^T Sigma phi),
/// re-symmetrized each step.
inline void information_update(PosteriorState& state, int arm, double reward) {
  if (arm < 0 || arm >= state.n_arms)
    throw std::out_of_range("information_update: arm index out of range");
  state.counts[static_cast<std::size_t>(arm)] += 1;
  state.reward_sums[arm] += reward;

  if (state.mode == PosteriorState::Mode::diagonal) {
    const double n = static_cast<double>(state.counts[static_cast<std::size_t>(arm)]);
    const double d2 = state.delta_sq[arm];
    if (d2 == 0.0) {
      state.mu[arm] = state.empirical_mean(arm);
      state.var[arm] = state.sampling_variance / n;
    } else {
      const double mbar = state.empirical_mean(arm);
      state.mu[arm] = (d2 * state.prior_mean[arm] + n * mbar) / (d2 + n);
      state.var[arm] = state.sampling_variance / (d2 + n);
    }
    return;
  }

  const double sv = state.sampling_variance;
  state.info[arm] += reward / sv;
  state.Lambda(arm, arm) += 1.0 / sv;

  const Eigen::VectorXd col = state.Sigma.col(arm);
  const double denom = sv + col[arm];
  state.Sigma.noalias() -= (col * col.transpose()) / denom;
  state.Sigma = ((state.Sigma + state.Sigma.transpose()) * 0.5).eval();

  state.mu.noalias() = state.Sigma * state.info;
  state.var = state.Sigma.diagonal();

  if (++state.updates_since_resync >= PosteriorState::resync_interval) {
    state.updates_since_resync = 0;
    state.resync();
  }
}

/// Standalone rank-one covariance downdate for a unit selection vector
/// on `arm`; returns the updated covariance without touching any state.
inline Eigen::MatrixXd covariance_rank1_update(const Eigen::MatrixXd& sigma,
                                               int arm,
                                               double sampling_variance) {
  if (arm < 0 || arm >= sigma.rows())
    throw std::out_of_range("covariance_rank1_update: arm index out of range");
  if (sampling_variance <= 0.0)
    throw std::invalid_argument("sampling variance must be positive");
  const Eigen::VectorXd col = sigma.col(arm);
  Eigen::MatrixXd out =
      sigma - (col * col.transpose()) / (sampling_variance + col[arm]);
  return ((out + out.transpose()) * 0.5).eval();
}

/// One-shot posterior from aggregate statistics: precision
/// Lambda0 + diag(n_i / sigma_s^2) and mean solved from
/// P^-1 m_bar + Lambda0 mu0.  Arms with zero counts contribute nothing
/// regardless of the empirical-mean placeholder stored for them.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd>
batch_posterior(const GaussianPrior& prior, const std::vector<long>& counts,
                const Eigen::VectorXd& empirical_means,
                double sampling_variance) {
  if (prior.uninformative)
    throw std::invalid_argument("batch_posterior requires an informative prior");
  const int n = prior.num_arms();
  if (static_cast<int>(counts.size()) != n || empirical_means.size() != n)
    throw std::invalid_argument("batch_posterior: size mismatch");
  if (sampling_variance <= 0.0)
    throw std::invalid_argument("sampling variance must be positive");

  const Eigen::MatrixXd lambda0 = prior.precision();
  Eigen::MatrixXd lambda = lambda0;
  Eigen::VectorXd rhs = lambda0 * prior.mean;
  for (int i = 0; i < n; ++i) {
    if (counts[static_cast<std::size_t>(i)] < 0)
      throw std::invalid_argument("batch_posterior: negative count");
    const double ni = static_cast<double>(counts[static_cast<std::size_t>(i)]);
    lambda(i, i) += ni / sampling_variance;
    rhs[i] += ni * empirical_means[i] / sampling_variance;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(lambda);
  if (llt.info() != Eigen::Success)
    throw numeric_error("batch posterior precision not positive definite");
  Eigen::VectorXd mu = llt.solve(rhs);
  Eigen::MatrixXd sigma = llt.solve(Eigen::MatrixXd::Identity(n, n));
  sigma = ((sigma + sigma.transpose()) * 0.5).eval();
  return {std::move(mu), std::move(sigma)};
}

/// Row norms of the correlation matrix: rho_norm[i] = sqrt(sum_j rho_ij^2).
/// Equals 1 for every arm when the covariance is diagonal.
inline Eigen::VectorXd correlation_profile(const PosteriorState& state) {
  Eigen::VectorXd out(state.n_arms);
  if (state.mode == PosteriorState::Mode::diagonal) {
    out.setOnes();
    return out;
  }
  const Eigen::VectorXd d = state.Sigma.diagonal();
  for (int i = 0; i < state.n_arms; ++i) {
    double acc = 0.0;
    for (int j = 0; j < state.n_arms; ++j) {
      const double r2 = state.Sigma(i, j) * state.Sigma(i, j) / (d[i] * d[j]);
      acc += r2;
    }
    out[i] = std::sqrt(acc);
  }
  return out;
}

/// Prior variance of arm `i` conditioned on exact knowledge of every other
/// arm (Schur complement of the leave-one-out block).
inline double conditional_variance(const GaussianPrior& prior, int arm) {
  if (prior.uninformative)
    throw std::invalid_argument("conditional_variance requires an informative prior");
  const int n = prior.num_arms();
  if (arm < 0 || arm >= n)
    throw std::out_of_range("conditional_variance: arm index out of range");
  if (n == 1) return prior.covariance(0, 0);

  Eigen::MatrixXd rest(n - 1, n - 1);
  Eigen::VectorXd cross(n - 1);
  for (int j = 0, jj = 0; j < n; ++j) {
    if (j == arm) continue;
    cross[jj] = prior.covariance(arm, j);
    for (int k = 0, kk = 0; k < n; ++k) {
      if (k == arm) continue;
      rest(jj, kk) = prior.covariance(j, k);
      ++kk;
    }
    ++jj;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(rest);
  if (llt.info() != Eigen::Success)
    throw numeric_error("conditional_variance: leave-one-out block not SPD");
  return prior.covariance(arm, arm) - cross.dot(llt.solve(cross));
}

/// sigma_s^2 divided by the conditional prior variance of `arm`.
inline double conditional_delta_sq(const GaussianPrior& prior, int arm,
                                   double sampling_variance) {
  if (sampling_variance <= 0.0)
    throw std::invalid_argument("sampling variance must be positive");
  return sampling_variance / conditional_variance(prior, arm);
}

/// Frequentist moments of the posterior-mean estimator at fixed counts:
/// bias (Lambda0 + P^-1)^-1 Lambda0 (mu0 - m) and covariance
/// (Lambda0 + P^-1)^-1 P^-1 (Lambda0 + P^-1)^-1.
struct EstimatorMoments {
  Eigen::VectorXd bias;
  Eigen::MatrixXd covariance;
};

inline EstimatorMoments estimator_moments(const GaussianPrior& prior,
                                          const std::vector<long>& counts,
                                          const Eigen::VectorXd& true_means,
                                          double sampling_variance) {
  if (prior.uninformative)
    throw std::invalid_argument("estimator_moments requires an informative prior");
  const int n = prior.num_arms();
  if (static_cast<int>(counts.size()) != n || true_means.size() != n)
    throw std::invalid_argument("estimator_moments: size mismatch");
  if (sampling_variance <= 0.0)
    throw std::invalid_argument("sampling variance must be positive");

  const Eigen::MatrixXd lambda0 = prior.precision();
  Eigen::VectorXd pinv_diag(n);
  for (int i = 0; i < n; ++i) {
    if (counts[static_cast<std::size_t>(i)] < 0)
      throw std::invalid_argument("estimator_moments: negative count");
    pinv_diag[i] =
        static_cast<double>(counts[static_cast<std::size_t>(i)]) / sampling_variance;
  }
  Eigen::MatrixXd lambda = lambda0;
  lambda.diagonal() += pinv_diag;
  Eigen::LLT<Eigen::MatrixXd> llt(lambda);
  if (llt.info() != Eigen::Success)
    throw numeric_error("estimator_moments: precision not positive definite");
  const Eigen::MatrixXd inv =
      llt.solve(Eigen::MatrixXd::Identity(n, n));

  EstimatorMoments m;
  m.bias = inv * (lambda0 * (prior.mean - true_means));
  m.covariance = inv * pinv_diag.asDiagonal() * inv;
  m.covariance = ((m.covariance + m.covariance.transpose()) * 0.5).eval();
  return m;
}

} // namespace ucl
