#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <vector>

#include "ucl/bandit.hpp"
#include "ucl/errors.hpp"
#include "ucl/sim.hpp"

namespace {

ucl::PolicyParams flat_params() {
  ucl::PolicyParams p;
  p.variant = ucl::PolicyParams::Variant::uninformative;
  return p;
}

ucl::BanditInstance simple_instance(std::vector<double> means, double sv = 10.0) {
  ucl::BanditInstance inst;
  inst.means = std::move(means);
  inst.sampling_variance = sv;
  return inst;
}

/// 2 x 2 grid with one good cell at (0, 0): means (8, 5, 5, 5).
ucl::BanditInstance small_grid() {
  ucl::RewardSurfaceSpec spec;
  spec.rows = 2;
  spec.cols = 2;
  spec.base_value = 5.0;
  spec.patches = {{0, 0, 0.6, 8.0}};
  return ucl::make_grid_surface(spec, 10.0);
}

ucl::GaussianPrior small_grid_prior(const ucl::BanditInstance& inst,
                                    double length_scale = 1.0) {
  const Eigen::MatrixXd kernel = ucl::exponential_kernel(inst, 10.0, length_scale);
  return ucl::GaussianPrior::informative(
      Eigen::VectorXd::Constant(inst.num_arms(), 6.0), kernel);
}

ucl::PolicyParams correlated_params(double nu = 1.0) {
  ucl::PolicyParams p;
  p.variant = ucl::PolicyParams::Variant::correlated;
  p.nu = nu;
  return p;
}

double dot_counts(const std::vector<double>& gaps, const std::vector<long>& counts) {
  double acc = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i)
    acc += gaps[i] * static_cast<double>(counts[i]);
  return acc;
}

} // namespace

TEST_CASE("single-arm episode accrues no regret") {
  const auto inst = simple_instance({2.0}, 1.0);
  const auto ep = ucl::run_episode(inst, ucl::GaussianPrior::flat(1),
                                   flat_params(), 50, 7);
  CHECK(ep.counts[0] == 50);
  CHECK(ep.arms.size() == 50);
  CHECK(ep.t_init == 0);
  for (double r : ep.cum_regret) CHECK(r == 0.0);
  CHECK(ucl::lai_robbins_lower_bound(inst).coeff == 0.0);
}

TEST_CASE("flat prior visits every arm once before comparing") {
  const auto inst = simple_instance({1.0, 5.0, 3.0, 2.0});
  const auto ep = ucl::run_episode(inst, ucl::GaussianPrior::flat(4),
                                   flat_params(), 40, 11);
  REQUIRE(ep.arms.size() == 40);
  CHECK(ep.arms[0] == 0);
  CHECK(ep.arms[1] == 1);
  CHECK(ep.arms[2] == 2);
  CHECK(ep.arms[3] == 3);
  for (long c : ep.counts) CHECK(c >= 1);
}

TEST_CASE("cumulative regret matches the selection counts") {
  const auto inst = simple_instance({4.0, 2.5, 1.0});
  const auto ep = ucl::run_episode(inst, ucl::GaussianPrior::flat(3),
                                   flat_params(), 600, 5);
  const std::vector<double> gaps = {0.0, 1.5, 3.0};
  const double expected = dot_counts(gaps, ep.counts);
  CHECK(ep.cum_regret.back() == Catch::Approx(expected).epsilon(1e-9));
  CHECK(std::accumulate(ep.counts.begin(), ep.counts.end(), 0L) == 600);

  for (std::size_t t = 1; t < ep.cum_regret.size(); ++t)
    CHECK(ep.cum_regret[t] >= ep.cum_regret[t - 1]);
}

TEST_CASE("episodes are reproducible from the seed") {
  const auto inst = simple_instance({4.0, 2.5, 1.0});
  const auto a = ucl::run_episode(inst, ucl::GaussianPrior::flat(3),
                                  flat_params(), 400, 123);
  const auto b = ucl::run_episode(inst, ucl::GaussianPrior::flat(3),
                                  flat_params(), 400, 123);
  CHECK(a.arms == b.arms);
  CHECK(a.cum_regret == b.cum_regret);

  const auto c = ucl::run_episode(inst, ucl::GaussianPrior::flat(3),
                                  flat_params(), 400, 124);
  CHECK(a.arms != c.arms); // different reward stream
}

TEST_CASE("ensemble aggregation is independent of the thread count") {
  const auto inst = simple_instance({4.0, 2.5, 1.0});
  const auto prior = ucl::GaussianPrior::flat(3);
  const auto one = ucl::run_ensemble(inst, prior, flat_params(), 300, 6, 42, 1);
  const auto four = ucl::run_ensemble(inst, prior, flat_params(), 300, 6, 42, 4);

  CHECK(one.mean_cum_regret == four.mean_cum_regret);
  CHECK(one.sem_cum_regret == four.sem_cum_regret);
  CHECK(one.per_run_final_regret == four.per_run_final_regret);
  CHECK(one.mean_counts == four.mean_counts);
  CHECK(one.seeds == four.seeds);
}

TEST_CASE("ensemble bookkeeping") {
  const auto inst = simple_instance({4.0, 2.5});
  const auto prior = ucl::GaussianPrior::flat(2);
  const auto ens = ucl::run_ensemble(inst, prior, flat_params(), 200, 3, 10, 1);

  CHECK(ens.runs == 3);
  CHECK(ens.horizon == 200);
  CHECK(ens.n_arms == 2);
  REQUIRE(ens.seeds.size() == 3);
  CHECK(ens.seeds[0] == 10);
  CHECK(ens.seeds[1] == 11);
  CHECK(ens.seeds[2] == 12);
  CHECK(ens.mean_cum_regret.size() == 200);
  CHECK(ens.final_mean_regret() == ens.mean_cum_regret.back());

  // single-run ensemble reproduces the bare episode
  const auto solo = ucl::run_ensemble(inst, prior, flat_params(), 200, 1, 10, 1);
  const auto ep = ucl::run_episode(inst, prior, flat_params(), 200, 10);
  CHECK(solo.mean_cum_regret == ep.cum_regret);
  for (double s : solo.sem_cum_regret) CHECK(s == 0.0);

  // two-run standard error has a closed form
  const auto pair = ucl::run_ensemble(inst, prior, flat_params(), 200, 2, 10, 1);
  const auto ep2 = ucl::run_episode(inst, prior, flat_params(), 200, 11);
  const double expected_sem =
      std::abs(ep.cum_regret.back() - ep2.cum_regret.back()) / 2.0;
  CHECK(pair.final_sem() == Catch::Approx(expected_sem).epsilon(1e-12));
}

TEST_CASE("correlated episodes honour the runtime guarantees") {
  const auto inst = small_grid();
  const auto prior = small_grid_prior(inst);
  const auto ens =
      ucl::run_ensemble(inst, prior, correlated_params(), 2000, 5, 42, 1);

  CHECK(ens.total_violations == 0);
  CHECK(ens.max_t_init == 1); // one pull settles every variance on this grid
  for (const auto& counts : ens.per_run_counts)
    CHECK(std::accumulate(counts.begin(), counts.end(), 0L) == 2000);
  for (const auto& post : ens.per_run_post_init_counts)
    CHECK(std::accumulate(post.begin(), post.end(), 0L) == 1999);

  // the one initialization pull lands on the lowest-index tied-variance arm
  const auto ep = ucl::run_episode(inst, prior, correlated_params(), 100, 42);
  CHECK(ep.t_init == 1);
  CHECK(ep.arms[0] == 0);
  CHECK(ep.counts[0] == ep.post_init_counts[0] + 1);
}

TEST_CASE("looser exploration threshold skips initialization") {
  const auto inst = small_grid();
  const auto prior = small_grid_prior(inst);
  // nu = 0.5 lifts the threshold to 2 sigma_s^2, above every prior variance
  const auto ep = ucl::run_episode(inst, prior, correlated_params(0.5), 100, 42);
  CHECK(ep.t_init == 0);
  CHECK(ep.counts == ep.post_init_counts);
}

TEST_CASE("verification tables switch between count conventions") {
  const auto inst = small_grid();
  const auto prior = small_grid_prior(inst);
  const auto ens =
      ucl::run_ensemble(inst, prior, correlated_params(), 500, 4, 42, 1);

  ucl::BoundReport fake;
  ucl::BoundRow row;
  row.arm = 0; // the arm that absorbs the initialization pull
  row.eta = 1e9;
  fake.rows.push_back(row);

  const auto with_init = ucl::verify_bounds(ens, fake, false);
  const auto post_only = ucl::verify_bounds(ens, fake, true);
  CHECK(with_init.rows[0].empirical ==
        Catch::Approx(post_only.rows[0].empirical + 1.0).epsilon(1e-12));
  CHECK(with_init.rows[0].satisfied);
  CHECK(with_init.all_satisfied());

  ucl::BoundReport hopeless;
  row.eta = 0.0;
  row.nhat = -1e9;
  hopeless.rows.push_back(row);
  CHECK_FALSE(ucl::verify_bounds(ens, hopeless, false).all_satisfied());
}

TEST_CASE("policy variant and prior shape must agree") {
  const auto inst = small_grid();
  const auto full = small_grid_prior(inst);
  const auto flat = ucl::GaussianPrior::flat(4);
  const auto diag =
      ucl::GaussianPrior::diagonal(Eigen::VectorXd::Constant(4, 6.0), 10.0, 4);
  ucl::PolicyParams uncor;
  uncor.variant = ucl::PolicyParams::Variant::uncorrelated;

  CHECK_THROWS_AS(ucl::run_episode(inst, flat, correlated_params(), 10, 1),
                  ucl::config_error);
  CHECK_THROWS_AS(ucl::run_episode(inst, full, uncor, 10, 1), ucl::config_error);
  CHECK_THROWS_AS(ucl::run_episode(inst, full, flat_params(), 10, 1),
                  ucl::config_error);
  CHECK_THROWS_AS(ucl::run_episode(inst, diag, flat_params(), 10, 1),
                  ucl::config_error);
  CHECK_NOTHROW(ucl::run_episode(inst, diag, uncor, 10, 1));

  // per-arm prior variances must match for the independent-arm variant
  Eigen::MatrixXd mixed = Eigen::MatrixXd::Zero(4, 4);
  mixed.diagonal() << 10.0, 10.0, 20.0, 10.0;
  const auto mixed_prior =
      ucl::GaussianPrior::informative(Eigen::VectorXd::Constant(4, 6.0), mixed);
  CHECK_THROWS_AS(ucl::run_episode(inst, mixed_prior, uncor, 10, 1),
                  ucl::config_error);

  const auto wrong_size = ucl::GaussianPrior::flat(3);
  CHECK_THROWS_AS(ucl::run_episode(inst, wrong_size, flat_params(), 10, 1),
                  ucl::config_error);
}

TEST_CASE("degenerate run arguments are rejected") {
  const auto inst = simple_instance({1.0, 0.0});
  const auto prior = ucl::GaussianPrior::flat(2);
  CHECK_THROWS_AS(ucl::run_episode(inst, prior, flat_params(), 0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(ucl::run_ensemble(inst, prior, flat_params(), 10, 0, 1, 1),
                  std::invalid_argument);
}

TEST_CASE("informative priors steer early play toward believed-good arms") {
  // a sharply informative prior on arm 1 makes it the first finite choice
  const auto inst = simple_instance({4.0, 2.5});
  Eigen::VectorXd mu(2);
  mu << 0.0, 50.0;
  const auto prior = ucl::GaussianPrior::diagonal(mu, 0.01, 2);
  ucl::PolicyParams p;
  p.variant = ucl::PolicyParams::Variant::uncorrelated;
  const auto ep = ucl::run_episode(inst, prior, p, 5, 3);
  CHECK(ep.arms[0] == 1);
}
