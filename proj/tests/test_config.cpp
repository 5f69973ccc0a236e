#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ucl/commands.hpp"
#include "ucl/config.hpp"
#include "ucl/csv.hpp"
#include "ucl/errors.hpp"
#include "ucl/svg.hpp"

namespace {

void expect_config_error(const std::string& text, const std::string& needle) {
  try {
    ucl::parse_config(text);
    FAIL("expected a config error for: " << text);
  } catch (const ucl::config_error& err) {
    INFO("message: " << err.what());
    CHECK(std::string(err.what()).find(needle) != std::string::npos);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "ucl_config_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

long count_lines(const std::string& text) {
  return std::count(text.begin(), text.end(), '\n');
}

} // namespace

TEST_CASE("empty config yields the defaults") {
  const auto cfg = ucl::parse_config("{}");
  CHECK(cfg == ucl::ExperimentConfig{});
  CHECK(cfg.run.horizon == 5000);
  CHECK(cfg.run.runs == 100);
  CHECK(cfg.run.seed == 42);
  CHECK(cfg.sampling_variance == 10.0);
  CHECK(cfg.prior.variant == ucl::PolicyParams::Variant::correlated);
  CHECK(cfg.policy.a == 1.0);
  CHECK(cfg.bounds.a == 2.0);
}

TEST_CASE("default surface is a graded mound and basin") {
  const auto inst = ucl::resolved_instance(ucl::ExperimentConfig{});
  REQUIRE(inst.num_arms() == 100);
  CHECK(inst.sampling_variance == 10.0);

  CHECK(inst.means[22] == 60.0); // grid cell (2, 2)
  CHECK(inst.means[23] == 52.0); // one step out
  CHECK(inst.means[0] == 44.0);  // outer ring of the mound
  CHECK(inst.means[77] == 2.0);  // basin centre (7, 7)
  CHECK(inst.means[55] == 20.0); // outer ring of the basin
  CHECK(inst.means[50] == 30.0); // background

  CHECK(inst.optimal_arm() == 22);
  CHECK(inst.has_unique_optimum());

  const auto count_value = [&](double v) {
    return std::count(inst.means.begin(), inst.means.end(), v);
  };
  CHECK(count_value(60.0) == 1);
  CHECK(count_value(52.0) == 8);
  CHECK(count_value(44.0) == 16);
  CHECK(count_value(2.0) == 1);
  CHECK(count_value(10.0) == 8);
  CHECK(count_value(20.0) == 16);
  CHECK(count_value(30.0) == 50);
}

TEST_CASE("patch-aligned prior marks cells above the background") {
  const ucl::ExperimentConfig cfg;
  const auto inst = ucl::resolved_instance(cfg);
  const auto prior = ucl::resolved_prior(cfg, inst);
  REQUIRE_FALSE(prior.uninformative);

  CHECK(prior.mean[22] == 100.0);
  CHECK(prior.mean[0] == 100.0);  // the whole mound counts as promising
  CHECK(prior.mean[77] == 0.0);   // the basin does not
  CHECK(prior.mean[50] == 0.0);   // neither does the background

  CHECK(prior.covariance(22, 22) == Catch::Approx(10.0 + 1e-7).epsilon(1e-12));
  CHECK(prior.covariance(22, 23) ==
        Catch::Approx(10.0 * std::exp(-0.5)).epsilon(1e-12));
  CHECK(prior.covariance(22, 23) == prior.covariance(23, 22));
}

TEST_CASE("unknown keys are rejected by their dotted path") {
  expect_config_error(R"({"polcy": {}})", "polcy");
  expect_config_error(R"({"policy": {"kappa": 1}})", "policy.kappa");
  expect_config_error(R"({"prior": {"mean": {"hgh": 1}}})", "prior.mean.hgh");
  expect_config_error(
      R"({"surface": {"patches": [{"row": 0, "col": 0, "r": 1}]}})",
      "surface.patches[0].r");
  expect_config_error(R"({"run": {"horizon": 10}})", "run.horizon");
  expect_config_error(R"({"prior": {"kernel": {"scale": 2}}})",
                      "prior.kernel.scale");
}

TEST_CASE("invalid values are rejected with their key") {
  expect_config_error("{", "config is not valid JSON");
  expect_config_error("[1, 2]", "must be a JSON object");
  expect_config_error(R"({"policy": {"K": 0}})", "policy.K");
  expect_config_error(R"({"policy": {"nu": 2}})", "policy.nu");
  expect_config_error(R"({"policy": {"a": "fast"}})", "policy.a");
  expect_config_error(R"({"bounds": {"epsilon": 1.5}})", "bounds.epsilon");
  expect_config_error(R"({"bounds": {"a": 1.0}})", "bounds.a");
  expect_config_error(R"({"run": {"T": 0}})", "run.T");
  expect_config_error(R"({"run": {"T": 1.5}})", "must be an integer");
  expect_config_error(R"({"run": {"seed": -1}})", "run.seed");
  expect_config_error(R"({"sampling_variance": 0})", "sampling_variance");
  expect_config_error(R"({"prior": {"sigma0_sq": -1}})", "prior.sigma0_sq");
  expect_config_error(R"({"prior": {"variant": "banana"}})", "prior.variant");
  expect_config_error(R"({"prior": {"mean": {"mode": "banana"}}})",
                      "prior.mean.mode");
  expect_config_error(R"({"prior": {"mean": {"mode": "explicit"}}})",
                      "prior.mean.values");
  expect_config_error(
      R"({"surface": {"patches": [{"row": 0, "col": 0, "radius": 0}]}})",
      "surface.patches[0].radius");
  expect_config_error(R"({"means": []})", "means");
  expect_config_error(R"({"means": ["x"]})", "array of numbers");
  expect_config_error(R"({"surface": {}, "means": [1]})", "mutually exclusive");
}

TEST_CASE("explicit means restrict the prior variants") {
  const std::string base = R"({"means": [3, 1], "prior": {"variant": ")";

  const auto correlated = ucl::parse_config(base + "correlated\"}}");
  const auto inst = ucl::resolved_instance(correlated);
  CHECK(inst.means == std::vector<double>{3.0, 1.0});
  CHECK_FALSE(inst.coords.has_value());
  CHECK_THROWS_AS(ucl::resolved_prior(correlated, inst), ucl::config_error);

  auto uncorrelated = ucl::parse_config(base + "uncorrelated\"}}");
  CHECK_THROWS_AS(ucl::resolved_prior(uncorrelated, inst), ucl::config_error);

  uncorrelated.prior.mean.mode = ucl::MeanSpec::Mode::uniform;
  uncorrelated.prior.mean.value = 2.0;
  const auto diag = ucl::resolved_prior(uncorrelated, inst);
  CHECK(diag.is_diagonal());
  CHECK(diag.mean[0] == 2.0);

  const auto flat =
      ucl::parse_config(base + "uninformative\"}}");
  CHECK(ucl::resolved_prior(flat, inst).uninformative);
}

TEST_CASE("presets rewrite the prior block") {
  ucl::ExperimentConfig cfg;
  cfg.prior.sigma0_sq = 10.0;

  ucl::apply_preset(cfg, ucl::Preset::ill_informed);
  CHECK(cfg.prior.variant == ucl::PolicyParams::Variant::correlated);
  CHECK(cfg.prior.mean.mode == ucl::MeanSpec::Mode::uniform);
  CHECK(cfg.prior.mean.value == 30.0);
  CHECK(cfg.prior.length_scale == 4.0);

  ucl::apply_preset(cfg, ucl::Preset::well_informed);
  CHECK(cfg.prior.mean.mode == ucl::MeanSpec::Mode::patch_aligned);
  CHECK(cfg.prior.mean.high == 100.0);
  CHECK(cfg.prior.length_scale == 2.0);

  ucl::apply_preset(cfg, ucl::Preset::uninformative);
  CHECK(cfg.prior.variant == ucl::PolicyParams::Variant::uninformative);

  CHECK(ucl::preset_from_name("well-informed") == ucl::Preset::well_informed);
  CHECK(ucl::preset_from_name("ill-informed") == ucl::Preset::ill_informed);
  CHECK(ucl::preset_from_name("uninformative") == ucl::Preset::uninformative);
  CHECK_FALSE(ucl::preset_from_name("wellinformed").has_value());
}

TEST_CASE("config serialization round trips") {
  const ucl::ExperimentConfig defaults;
  CHECK(ucl::parse_config(ucl::serialize(defaults)) == defaults);
  CHECK(ucl::serialize(defaults) == ucl::serialize(defaults));

  ucl::ExperimentConfig cfg;
  cfg.surface.rows = 3;
  cfg.surface.cols = 4;
  cfg.surface.base_value = 1.5;
  cfg.surface.patches = {{0.0, 1.0, 1.2, 9.0}};
  cfg.sampling_variance = 2.5;
  cfg.prior.variant = ucl::PolicyParams::Variant::uncorrelated;
  cfg.prior.mean.mode = ucl::MeanSpec::Mode::uniform;
  cfg.prior.mean.value = 4.5;
  cfg.prior.sigma0_sq = 3.25;
  cfg.prior.length_scale = 1.75;
  cfg.policy.K = 7.5;
  cfg.policy.a = 2.0;
  cfg.policy.nu = 0.5;
  cfg.bounds.epsilon = 0.25;
  cfg.bounds.a = 5.0;
  cfg.run.horizon = 77;
  cfg.run.runs = 3;
  cfg.run.seed = 9;
  CHECK(ucl::parse_config(ucl::serialize(cfg)) == cfg);

  ucl::ExperimentConfig explicit_cfg;
  explicit_cfg.explicit_means = std::vector<double>{5.0, 2.0, 0.5};
  explicit_cfg.prior.variant = ucl::PolicyParams::Variant::uncorrelated;
  explicit_cfg.prior.mean.mode = ucl::MeanSpec::Mode::explicit_values;
  explicit_cfg.prior.mean.values = {5.5, 1.5, 0.0};
  CHECK(ucl::parse_config(ucl::serialize(explicit_cfg)) == explicit_cfg);

  ucl::ExperimentConfig preset_cfg;
  ucl::apply_preset(preset_cfg, ucl::Preset::ill_informed);
  CHECK(ucl::parse_config(ucl::serialize(preset_cfg)) == preset_cfg);
}

TEST_CASE("number formatting uses ten significant digits") {
  CHECK(ucl::detail::format_number(1.0) == "1");
  CHECK(ucl::detail::format_number(0.25) == "0.25");
  CHECK(ucl::detail::format_number(1.0 / 3.0) == "0.3333333333");
  CHECK(ucl::detail::format_number(1e-7) == "1e-07");
  CHECK(ucl::detail::format_number(0.0) == "0");
}

TEST_CASE("csv tables carry the documented headers") {
  ucl::BanditInstance inst;
  inst.means = {1.0, 0.0};
  inst.sampling_variance = 4.0;
  ucl::PolicyParams params;
  params.variant = ucl::PolicyParams::Variant::uninformative;
  const auto ens =
      ucl::run_ensemble(inst, ucl::GaussianPrior::flat(2), params, 30, 2, 1, 1);
  const auto lower = ucl::lai_robbins_lower_bound(inst);

  const std::string regret = ucl::regret_csv(ens, lower);
  const std::string regret_header = "t,mean_cum_regret,sem,lai_robbins_lb\n";
  CHECK(regret.substr(0, regret_header.size()) == regret_header);
  CHECK(count_lines(regret) == 31);
  CHECK(regret.find("\n1,") != std::string::npos);

  ucl::BoundReport bounds;
  ucl::BoundRow row;
  row.arm = 1;
  row.gap = 2.5;
  row.prior_gap = -1.0;
  row.case_label = "opt_under_sub_over";
  row.eta = 3.0;
  row.nhat = 0.5;
  bounds.rows.push_back(row);
  CHECK(ucl::bounds_csv(bounds) ==
        "arm,delta_i,delta_m_i,case,eta_i,nhat_i,bound_total\n"
        "1,2.5,-1,opt_under_sub_over,3,0.5,3.5\n");

  ucl::VerifyReport verdict;
  verdict.rows.push_back({2, 12.25, 0.5, 20.0, true});
  verdict.rows.push_back({3, 40.0, 0.5, 20.0, false});
  CHECK(ucl::verify_csv(verdict) ==
        "arm,empirical_n_i,bound,satisfied\n"
        "2,12.25,20,true\n"
        "3,40,20,false\n");
}

TEST_CASE("line chart renders standalone svg") {
  std::vector<ucl::PlotSeries> series;
  series.push_back({"policy A & B", "#1f6fb2", {0.0, 1.0, 2.5, 3.0}});
  series.push_back({"envelope", "#c04a3b", {0.0, 0.5, 1.0, 1.5}});
  const std::string svg =
      ucl::render_line_chart(series, "regret <demo>", "t", "cumulative regret");

  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.rfind("</svg>") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("policy A &amp; B") != std::string::npos);
  CHECK(svg.find("regret &lt;demo&gt;") != std::string::npos);
  CHECK(svg.find("#c04a3b") != std::string::npos);
}

TEST_CASE("simulate command writes deterministic artifacts") {
  auto cfg = ucl::parse_config(
      R"({"means": [1, 0], "prior": {"variant": "uninformative"},
          "run": {"T": 60, "runs": 4, "seed": 5}})");
  const auto dir = scratch_dir();
  const auto csv_path = dir / "regret.csv";
  const auto svg_path = dir / "regret.svg";

  std::ostringstream log;
  CHECK(ucl::run_simulate(cfg, csv_path.string(), svg_path.string(), 1, log) == 0);
  CHECK(log.str().find("simulate:") != std::string::npos);

  const std::string first = read_file(csv_path);
  CHECK(count_lines(first) == 61);
  const std::string chart = read_file(svg_path);
  CHECK(chart.find("<svg") != std::string::npos);

  CHECK(ucl::run_simulate(cfg, csv_path.string(), std::nullopt, 1, log) == 0);
  CHECK(read_file(csv_path) == first);
  CHECK(ucl::run_simulate(cfg, csv_path.string(), std::nullopt, 2, log) == 0);
  CHECK(read_file(csv_path) == first); // thread count cannot leak into output
}

TEST_CASE("bounds command needs an informative prior") {
  auto cfg = ucl::parse_config(R"({"means": [1, 0]})");
  ucl::apply_preset(cfg, ucl::Preset::uninformative);
  std::ostringstream log;
  CHECK_THROWS_AS(
      ucl::run_bounds(cfg, (scratch_dir() / "b.csv").string(), log),
      ucl::config_error);
}

TEST_CASE("bounds command writes the per-arm table") {
  auto cfg = ucl::parse_config(
      R"({"means": [10, 5],
          "prior": {"variant": "uncorrelated",
                    "mean": {"mode": "explicit", "values": [8, 7]}},
          "bounds": {"a": 4},
          "run": {"T": 1000}})");
  const auto path = scratch_dir() / "bounds.csv";
  std::ostringstream log;
  CHECK(ucl::run_bounds(cfg, path.string(), log) == 0);
  const std::string table = read_file(path);
  CHECK(table.find("arm,delta_i,") == 0);
  CHECK(table.find("opt_under_sub_over") != std::string::npos);
  CHECK(count_lines(table) == 2);
}

TEST_CASE("verify command demands matching exponents") {
  auto cfg = ucl::parse_config(
      R"({"means": [10, 5],
          "prior": {"variant": "uncorrelated",
                    "mean": {"mode": "uniform", "value": 8}},
          "policy": {"a": 1}, "bounds": {"a": 4}})");
  std::ostringstream log;
  CHECK_THROWS_AS(
      ucl::run_verify(cfg, (scratch_dir() / "v.csv").string(), 1, log),
      ucl::config_error);
}

TEST_CASE("verify command compares counts against the bound") {
  auto cfg = ucl::parse_config(
      R"({"means": [10, 5],
          "prior": {"variant": "uncorrelated",
                    "mean": {"mode": "uniform", "value": 8}},
          "policy": {"a": 4}, "bounds": {"a": 4},
          "run": {"T": 300, "runs": 20, "seed": 3}})");
  const auto path = scratch_dir() / "verify.csv";
  std::ostringstream log;
  const int rc = ucl::run_verify(cfg, path.string(), 1, log);
  CHECK(rc == 0);
  const std::string table = read_file(path);
  CHECK(table.find("arm,empirical_n_i,bound,satisfied\n") == 0);
  CHECK(table.find(",true") != std::string::npos);
  CHECK(log.str().find("all bounds satisfied") != std::string::npos);
}

TEST_CASE("check command reports sweep outcomes") {
  std::ostringstream log;
  CHECK(ucl::run_check(200, 20000, log) == 0);
  CHECK(log.str().find("tail and quantile sweeps") != std::string::npos);
  CHECK(log.str().find("difference-of-squares sweep") != std::string::npos);
  CHECK(log.str().find("FAIL") == std::string::npos);
}
