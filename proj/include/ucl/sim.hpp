#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ucl/bandit.hpp"
#include "ucl/errors.hpp"
#include "ucl/inference.hpp"
#include "ucl/policy.hpp"
#include "ucl/regret_bounds.hpp"

namespace ucl {

/// One logged breach of a runtime guarantee (recorded, never fatal).
struct InvariantViolation {
  long step = 0;
  int arm = 0;
  std::string kind;
  double value = 0.0;
  double bound = 0.0;
};

struct EpisodeResult {
  std::uint64_t seed = 0;
  long horizon = 0;
  long t_init = 0; // length of the initialization phase (correlated runs)
  std::vector<int> arms;
  std::vector<double> cum_regret;
  std::vector<long> counts;
  std::vector<long> post_init_counts;
  std::vector<InvariantViolation> violations;
};

namespace detail {

/// Precomputed quantities shared by every episode of an ensemble.
struct EpisodeContext {
  Eigen::VectorXd cond_delta_sq; // per-arm sigma_s^2 / conditional variance
};

inline EpisodeContext make_episode_context(const BanditInstance& inst,
                                           const GaussianPrior& prior) {
  EpisodeContext ctx;
  const int n = inst.num_arms();
  ctx.cond_delta_sq.resize(n);
  for (int i = 0; i < n; ++i)
    ctx.cond_delta_sq[i] =
        conditional_delta_sq(prior, i, inst.sampling_variance);
  return ctx;
}

inline void check_variant_prior(const PolicyParams& params,
                                const GaussianPrior& prior) {
  using V = PolicyParams::Variant;
  switch (params.variant) {
    case V::uninformative:
      if (!prior.uninformative)
        throw config_error("uninformative policy variant requires a flat prior");
      break;
    case V::uncorrelated: {
      if (prior.uninformative)
        throw config_error("uncorrelated policy variant requires an informative prior");
      if (!prior.is_diagonal())
        throw config_error("uncorrelated policy variant requires a diagonal prior");
      const double v0 = prior.covariance(0, 0);
      for (int i = 1; i < prior.num_arms(); ++i)
        if (std::abs(prior.covariance(i, i) - v0) > 1e-12 * v0)
          throw config_error(
              "uncorrelated policy variant requires a common prior variance");
      break;
    }
    case V::correlated:
      if (prior.uninformative)
        throw config_error("correlated policy variant requires an informative prior");
      break;
  }
}

/// Reused per-episode scratch for the envelope checks (avoids reallocating
/// N x N temporaries every step).
struct EnvelopeWorkspace {
  Eigen::MatrixXd sq;
  Eigen::VectorXd n_over_sv;
  Eigen::VectorXd sbar;
  Eigen::VectorXd dinv;
  Eigen::VectorXd rho_sq_sums;

  void resize(int n) {
    sq.resize(n, n);
    n_over_sv.resize(n);
    sbar.resize(n);
    dinv.resize(n);
    rho_sq_sums.resize(n);
  }
};

/// Variance-envelope checks for the correlated policy after the
/// initialization phase:
///   sigma_s^2 / (cond_delta_sq_i + n_i)  <=  var_i  <=  sigma_s^2 / (nu + k_i)
/// with n_i total selections and k_i post-initialization selections, plus the
/// estimator-covariance sandwich
///   n_i var_i^2 / sigma_s^2  <=  sbar_i  <=  var_i * sum_j rho_ij^2.
inline void check_variance_envelope(const PosteriorState& state,
                                    const EpisodeContext& ctx,
                                    const std::vector<long>& post_counts,
                                    double nu, long step,
                                    EnvelopeWorkspace& ws,
                                    std::vector<InvariantViolation>& out) {
  const double sv = state.sampling_variance;
  const int n = state.n_arms;
  constexpr double rel = 1e-7;

  for (int i = 0; i < n; ++i)
    ws.n_over_sv[i] =
        static_cast<double>(state.counts[static_cast<std::size_t>(i)]) / sv;
  ws.sq = state.Sigma.cwiseProduct(state.Sigma);
  ws.sbar.noalias() = ws.sq * ws.n_over_sv;
  ws.dinv = state.var.cwiseInverse();
  ws.rho_sq_sums.noalias() = ws.sq * ws.dinv;
  ws.rho_sq_sums.array() *= ws.dinv.array();

  for (int i = 0; i < n; ++i) {
    const double var = state.var[i];
    const double total = static_cast<double>(state.counts[static_cast<std::size_t>(i)]);
    const double post = static_cast<double>(post_counts[static_cast<std::size_t>(i)]);

    const double upper = sv / (nu + post);
    if (var > upper * (1.0 + rel))
      out.push_back({step, i, "variance_above_envelope", var, upper});

    const double lower = sv / (ctx.cond_delta_sq[i] + total);
    if (var < lower * (1.0 - rel))
      out.push_back({step, i, "variance_below_envelope", var, lower});

    const double sbar_lower = total * var * var / sv;
    if (ws.sbar[i] < sbar_lower * (1.0 - rel) - 1e-12)
      out.push_back({step, i, "estimator_variance_below_envelope", ws.sbar[i],
                     sbar_lower});

    const double sbar_upper = var * ws.rho_sq_sums[i];
    if (ws.sbar[i] > sbar_upper * (1.0 + rel) + 1e-12)
      out.push_back({step, i, "estimator_variance_above_envelope", ws.sbar[i],
                     sbar_upper});
  }
}

} // namespace detail

/// Runs one seeded episode of the configured policy.  Initialization-phase
/// steps count toward the horizon and the regret.  Correlated runs log
/// breaches of the initialization-length and variance-envelope guarantees.
inline EpisodeResult run_episode(const BanditInstance& inst,
                                 const GaussianPrior& prior,
                                 const PolicyParams& params, long horizon,
                                 std::uint64_t seed,
                                 const detail::EpisodeContext* shared_ctx = nullptr) {
  params.validate();
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (prior.num_arms() != inst.num_arms())
    throw config_error("prior/instance size mismatch");
  detail::check_variant_prior(params, prior);

  const bool correlated = params.variant == PolicyParams::Variant::correlated;
  std::optional<detail::EpisodeContext> local_ctx;
  const detail::EpisodeContext* ctx = shared_ctx;
  if (correlated && ctx == nullptr) {
    local_ctx = detail::make_episode_context(inst, prior);
    ctx = &*local_ctx;
  }

  PosteriorState state = correlated
                             ? PosteriorState::matrix(prior, inst.sampling_variance)
                             : PosteriorState::diagonal(prior, inst.sampling_variance);

  const int n = inst.num_arms();
  const int star = inst.optimal_arm();
  std::vector<double> gaps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) gaps[static_cast<std::size_t>(i)] = inst.means[star] - inst.means[i];

  EpisodeResult ep;
  ep.seed = seed;
  ep.horizon = horizon;
  ep.arms.reserve(static_cast<std::size_t>(horizon));
  ep.cum_regret.reserve(static_cast<std::size_t>(horizon));
  ep.counts.assign(static_cast<std::size_t>(n), 0);
  ep.post_init_counts.assign(static_cast<std::size_t>(n), 0);

  std::mt19937_64 rng(seed);
  double regret = 0.0;
  bool in_init = correlated;
  const double init_threshold = inst.sampling_variance / params.nu;
  detail::EnvelopeWorkspace ws;
  if (correlated) ws.resize(n);

  for (long t = 1; t <= horizon; ++t) {
    const Decision d = select_arm(state, t, params);

    if (correlated) {
      if (d.phase == Decision::Phase::initialization) {
        if (!in_init)
          ep.violations.push_back(
              {t, d.arm, "initialization_phase_resumed", 0.0, 0.0});
        ep.t_init += 1;
        if (ep.t_init > n)
          ep.violations.push_back({t, d.arm, "initialization_phase_overran",
                                   static_cast<double>(ep.t_init),
                                   static_cast<double>(n)});
      } else if (in_init) {
        // First post-initialization step: every variance must have reached
        // the exploration threshold.
        in_init = false;
        for (int i = 0; i < n; ++i)
          if (state.var[i] > init_threshold * (1.0 + 1e-7))
            ep.violations.push_back({t, i, "initialization_exit_variance",
                                     state.var[i], init_threshold});
      }
    }

    const double reward = sample_reward(inst, d.arm, rng);
    information_update(state, d.arm, reward);

    ep.arms.push_back(d.arm);
    ep.counts[static_cast<std::size_t>(d.arm)] += 1;
    if (!correlated || d.phase == Decision::Phase::ucb)
      ep.post_init_counts[static_cast<std::size_t>(d.arm)] += 1;
    regret += gaps[static_cast<std::size_t>(d.arm)];
    ep.cum_regret.push_back(regret);

    if (correlated && !in_init)
      detail::check_variance_envelope(state, *ctx, ep.post_init_counts,
                                      params.nu, t, ws, ep.violations);
  }

  if (state.mode == PosteriorState::Mode::matrix) state.resync();
  return ep;
}

struct EnsembleResult {
  long runs = 0;
  long horizon = 0;
  int n_arms = 0;
  long max_t_init = 0;
  long total_violations = 0;
  std::vector<double> mean_cum_regret;          // per step
  std::vector<double> sem_cum_regret;           // per step
  std::vector<double> mean_counts;              // per arm
  std::vector<double> mean_post_init_counts;    // per arm
  std::vector<std::vector<long>> per_run_counts;
  std::vector<std::vector<long>> per_run_post_init_counts;
  std::vector<double> per_run_final_regret;
  std::vector<std::uint64_t> seeds;
  std::vector<InvariantViolation> sample_violations; // first few, for reports

  double final_mean_regret() const { return mean_cum_regret.back(); }
  double final_sem() const { return sem_cum_regret.back(); }
};

/// Runs `runs` episodes with seeds seed0, seed0 + 1, ... and aggregates.
/// Episodes are distributed over threads; aggregation happens in run order,
/// so results are independent of the thread count.
inline EnsembleResult run_ensemble(const BanditInstance& inst,
                                   const GaussianPrior& prior,
                                   const PolicyParams& params, long horizon,
                                   long runs, std::uint64_t seed0,
                                   int threads = 0) {
  if (runs < 1) throw std::invalid_argument("ensemble needs at least one run");
  params.validate();
  detail::check_variant_prior(params, prior);

  std::optional<detail::EpisodeContext> ctx;
  if (params.variant == PolicyParams::Variant::correlated)
    ctx = detail::make_episode_context(inst, prior);
  const detail::EpisodeContext* ctx_ptr = ctx ? &*ctx : nullptr;

  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
  }
  threads = static_cast<int>(std::min<long>(threads, runs));

  std::vector<EpisodeResult> episodes(static_cast<std::size_t>(runs));
  std::atomic<long> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));

  auto worker = [&](int slot) {
    try {
      for (long r = next.fetch_add(1); r < runs; r = next.fetch_add(1))
        episodes[static_cast<std::size_t>(r)] =
            run_episode(inst, prior, params, horizon,
                        seed0 + static_cast<std::uint64_t>(r), ctx_ptr);
    } catch (...) {
      errors[static_cast<std::size_t>(slot)] = std::current_exception();
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int s = 0; s < threads; ++s) pool.emplace_back(worker, s);
    for (auto& th : pool) th.join();
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);

  const int n = inst.num_arms();
  EnsembleResult out;
  out.runs = runs;
  out.horizon = horizon;
  out.n_arms = n;
  out.mean_cum_regret.assign(static_cast<std::size_t>(horizon), 0.0);
  out.sem_cum_regret.assign(static_cast<std::size_t>(horizon), 0.0);
  out.mean_counts.assign(static_cast<std::size_t>(n), 0.0);
  out.mean_post_init_counts.assign(static_cast<std::size_t>(n), 0.0);
  out.per_run_counts.reserve(static_cast<std::size_t>(runs));
  out.per_run_post_init_counts.reserve(static_cast<std::size_t>(runs));
  out.per_run_final_regret.reserve(static_cast<std::size_t>(runs));
  out.seeds.reserve(static_cast<std::size_t>(runs));

  for (const auto& ep : episodes) {
    out.seeds.push_back(ep.seed);
    out.per_run_counts.push_back(ep.counts);
    out.per_run_post_init_counts.push_back(ep.post_init_counts);
    out.per_run_final_regret.push_back(ep.cum_regret.back());
    out.max_t_init = std::max(out.max_t_init, ep.t_init);
    out.total_violations += static_cast<long>(ep.violations.size());
    for (const auto& v : ep.violations)
      if (out.sample_violations.size() < 8) out.sample_violations.push_back(v);
    for (long t = 0; t < horizon; ++t)
      out.mean_cum_regret[static_cast<std::size_t>(t)] +=
          ep.cum_regret[static_cast<std::size_t>(t)];
    for (int i = 0; i < n; ++i) {
      out.mean_counts[static_cast<std::size_t>(i)] +=
          static_cast<double>(ep.counts[static_cast<std::size_t>(i)]);
      out.mean_post_init_counts[static_cast<std::size_t>(i)] +=
          static_cast<double>(ep.post_init_counts[static_cast<std::size_t>(i)]);
    }
  }
  const double nr = static_cast<double>(runs);
  for (auto& v : out.mean_cum_regret) v /= nr;
  for (auto& v : out.mean_counts) v /= nr;
  for (auto& v : out.mean_post_init_counts) v /= nr;

  if (runs > 1) {
    for (long t = 0; t < horizon; ++t) {
      double m2 = 0.0;
      const double mean = out.mean_cum_regret[static_cast<std::size_t>(t)];
      for (const auto& ep : episodes) {
        const double d = ep.cum_regret[static_cast<std::size_t>(t)] - mean;
        m2 += d * d;
      }
      out.sem_cum_regret[static_cast<std::size_t>(t)] =
          std::sqrt(m2 / (nr * (nr - 1.0)));
    }
  }
  return out;
}

struct VerifyRow {
  int arm = 0;
  double empirical = 0.0; // mean selections of this arm
  double sem = 0.0;
  double bound = 0.0; // eta + nhat
  bool satisfied = false;
};

struct VerifyReport {
  bool post_init_counts = false;
  std::vector<VerifyRow> rows;

  bool all_satisfied() const {
    for (const auto& r : rows)
      if (!r.satisfied) return false;
    return true;
  }
};

/// Compares ensemble selection counts against a bound report:
/// mean n_i - 3 SEM <= eta_i + nhat_i per suboptimal arm.  Correlated bounds
/// count selections after the initialization phase.
inline VerifyReport verify_bounds(const EnsembleResult& ensemble,
                                  const BoundReport& bounds,
                                  bool post_init_counts) {
  VerifyReport report;
  report.post_init_counts = post_init_counts;
  const auto& table = post_init_counts ? ensemble.per_run_post_init_counts
                                       : ensemble.per_run_counts;
  const double nr = static_cast<double>(ensemble.runs);

  for (const auto& row : bounds.rows) {
    VerifyRow v;
    v.arm = row.arm;
    v.bound = row.total();
    double mean = 0.0;
    for (const auto& run : table)
      mean += static_cast<double>(run[static_cast<std::size_t>(row.arm)]);
    mean /= nr;
    v.empirical = mean;
    if (ensemble.runs > 1) {
      double m2 = 0.0;
      for (const auto& run : table) {
        const double d =
            static_cast<double>(run[static_cast<std::size_t>(row.arm)]) - mean;
        m2 += d * d;
      }
      v.sem = std::sqrt(m2 / (nr * (nr - 1.0)));
    }
    v.satisfied = mean - 3.0 * v.sem <= v.bound;
    report.rows.push_back(v);
  }
  return report;
}

} // namespace ucl
