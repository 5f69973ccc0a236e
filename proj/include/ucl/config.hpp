#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ucl/bandit.hpp"
#include "ucl/errors.hpp"
#include "ucl/inference.hpp"
#include "ucl/policy.hpp"
#include "ucl/regret_bounds.hpp"

namespace ucl {

/// Prior mean specification.  patch_aligned marks every cell whose surface
/// value exceeds the base value with `high` and the rest with `low`.
struct MeanSpec {
  enum class Mode { patch_aligned, uniform, explicit_values };
  Mode mode = Mode::patch_aligned;
  double high = 100.0;
  double low = 0.0;
  double value = 30.0;               // uniform mode
  std::vector<double> values;        // explicit mode

  friend bool operator==(const MeanSpec&, const MeanSpec&) = default;
};

struct PriorConfig {
  PolicyParams::Variant variant = PolicyParams::Variant::correlated;
  MeanSpec mean;
  double sigma0_sq = 10.0;
  double length_scale = 2.0; // exponential kernel, correlated variant only

  friend bool operator==(const PriorConfig&, const PriorConfig&) = default;
};

struct PolicyConfig {
  double K = default_credibility_scale();
  double a = 1.0;
  double nu = 1.0;

  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

struct BoundsConfig {
  double epsilon = 1.0 / std::sqrt(10.0);
  double a = 2.0;

  friend bool operator==(const BoundsConfig&, const BoundsConfig&) = default;
};

struct RunConfig {
  long horizon = 5000;
  long runs = 100;
  std::uint64_t seed = 42;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Default reward surface: a 10x10 grid with a graded high mound around
/// (2,2) peaking at a single cell and a graded low basin around (7,7).
/// Concentric patches are listed innermost first so the tie rule of
/// make_grid_surface turns them into rings.
inline RewardSurfaceSpec default_surface() {
  RewardSurfaceSpec spec;
  spec.rows = 10;
  spec.cols = 10;
  spec.base_value = 30.0;
  spec.patches = {
      {2, 2, 0.9, 60.0}, {2, 2, 1.9, 52.0}, {2, 2, 2.9, 44.0},
      {7, 7, 0.9, 2.0},  {7, 7, 1.9, 10.0}, {7, 7, 2.9, 20.0},
  };
  return spec;
}

struct ExperimentConfig {
  RewardSurfaceSpec surface = default_surface();
  std::optional<std::vector<double>> explicit_means; // replaces the surface
  double sampling_variance = 10.0;
  PriorConfig prior;
  PolicyConfig policy;
  BoundsConfig bounds;
  RunConfig run;

  friend bool operator==(const ExperimentConfig&,
                         const ExperimentConfig&) = default;
};

enum class Preset { well_informed, ill_informed, uninformative };

/// Replaces the prior block with one of the three benchmark scenarios.
inline void apply_preset(ExperimentConfig& cfg, Preset preset) {
  cfg.prior = PriorConfig{};
  switch (preset) {
    case Preset::well_informed:
      cfg.prior.variant = PolicyParams::Variant::correlated;
      cfg.prior.mean.mode = MeanSpec::Mode::patch_aligned;
      cfg.prior.mean.high = 100.0;
      cfg.prior.mean.low = 0.0;
      cfg.prior.length_scale = 2.0;
      break;
    case Preset::ill_informed:
      cfg.prior.variant = PolicyParams::Variant::correlated;
      cfg.prior.mean.mode = MeanSpec::Mode::uniform;
      cfg.prior.mean.value = 30.0;
      cfg.prior.length_scale = 4.0;
      break;
    case Preset::uninformative:
      cfg.prior.variant = PolicyParams::Variant::uninformative;
      break;
  }
}

inline std::optional<Preset> preset_from_name(const std::string& name) {
  if (name == "well-informed") return Preset::well_informed;
  if (name == "ill-informed") return Preset::ill_informed;
  if (name == "uninformative") return Preset::uninformative;
  return std::nullopt;
}

namespace detail {

using json = nlohmann::json;

inline std::string joined_path(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline void reject_unknown_keys(const json& obj, const std::string& path,
                                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* name : allowed)
      if (item.key() == name) {
        known = true;
        break;
      }
    if (!known)
      throw config_error("unknown config key: " + joined_path(path, item.key()));
  }
}

inline double expect_number(const json& obj, const std::string& path,
                            const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number())
    throw config_error("config key " + joined_path(path, key) +
                       " must be a number");
  return v.get<double>();
}

inline long expect_integer(const json& obj, const std::string& path,
                           const char* key, long fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer())
    throw config_error("config key " + joined_path(path, key) +
                       " must be an integer");
  return v.get<long>();
}

inline std::string expect_string(const json& obj, const std::string& path,
                                 const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string())
    throw config_error("config key " + joined_path(path, key) +
                       " must be a string");
  return v.get<std::string>();
}

inline void require_positive(double value, const std::string& dotted) {
  if (!(value > 0.0))
    throw config_error("config key " + dotted + " must be positive");
}

inline std::vector<double> expect_number_array(const json& v,
                                               const std::string& dotted) {
  if (!v.is_array())
    throw config_error("config key " + dotted + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number())
      throw config_error("config key " + dotted +
                         " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline RewardSurfaceSpec parse_surface(const json& obj) {
  reject_unknown_keys(obj, "surface", {"rows", "cols", "base_value", "patches"});
  RewardSurfaceSpec def = default_surface();
  RewardSurfaceSpec spec;
  spec.rows = static_cast<int>(expect_integer(obj, "surface", "rows", def.rows));
  spec.cols = static_cast<int>(expect_integer(obj, "surface", "cols", def.cols));
  spec.base_value = expect_number(obj, "surface", "base_value", def.base_value);
  if (spec.rows < 1 || spec.cols < 1)
    throw config_error("config keys surface.rows and surface.cols must be positive");
  if (!obj.contains("patches")) {
    spec.patches = def.patches;
    return spec;
  }
  const auto& arr = obj.at("patches");
  if (!arr.is_array())
    throw config_error("config key surface.patches must be an array");
  spec.patches.clear();
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const auto& p = arr[k];
    const std::string path = "surface.patches[" + std::to_string(k) + "]";
    if (!p.is_object())
      throw config_error("config key " + path + " must be an object");
    reject_unknown_keys(p, path, {"row", "col", "radius", "value"});
    RewardSurfaceSpec::Patch patch;
    patch.row = expect_number(p, path, "row", 0.0);
    patch.col = expect_number(p, path, "col", 0.0);
    patch.radius = expect_number(p, path, "radius", 0.0);
    patch.value = expect_number(p, path, "value", 0.0);
    require_positive(patch.radius, path + ".radius");
    spec.patches.push_back(patch);
  }
  return spec;
}

inline MeanSpec parse_mean_spec(const json& obj) {
  reject_unknown_keys(obj, "prior.mean",
                      {"mode", "high", "low", "value", "values"});
  MeanSpec def;
  MeanSpec spec;
  const std::string mode =
      expect_string(obj, "prior.mean", "mode", "patch_aligned");
  if (mode == "patch_aligned")
    spec.mode = MeanSpec::Mode::patch_aligned;
  else if (mode == "uniform")
    spec.mode = MeanSpec::Mode::uniform;
  else if (mode == "explicit")
    spec.mode = MeanSpec::Mode::explicit_values;
  else
    throw config_error(
        "config key prior.mean.mode must be one of "
        "\"patch_aligned\", \"uniform\", \"explicit\"");
  spec.high = expect_number(obj, "prior.mean", "high", def.high);
  spec.low = expect_number(obj, "prior.mean", "low", def.low);
  spec.value = expect_number(obj, "prior.mean", "value", def.value);
  if (obj.contains("values"))
    spec.values = expect_number_array(obj.at("values"), "prior.mean.values");
  if (spec.mode == MeanSpec::Mode::explicit_values && spec.values.empty())
    throw config_error(
        "config key prior.mean.values is required for explicit mode");
  return spec;
}

inline PolicyParams::Variant parse_variant(const std::string& name) {
  if (name == "uninformative") return PolicyParams::Variant::uninformative;
  if (name == "uncorrelated") return PolicyParams::Variant::uncorrelated;
  if (name == "correlated") return PolicyParams::Variant::correlated;
  throw config_error(
      "config key prior.variant must be one of "
      "\"uninformative\", \"uncorrelated\", \"correlated\"");
}

} // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  using detail::expect_integer;
  using detail::expect_number;
  using detail::expect_string;
  using nlohmann::json;

  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    throw config_error(std::string("config is not valid JSON: ") + err.what());
  }
  if (!root.is_object()) throw config_error("config must be a JSON object");

  detail::reject_unknown_keys(root, "",
                              {"surface", "means", "sampling_variance",
                               "prior", "policy", "bounds", "run"});
  if (root.contains("surface") && root.contains("means"))
    throw config_error(
        "config keys surface and means are mutually exclusive");

  ExperimentConfig cfg;
  if (root.contains("surface")) {
    const auto& s = root.at("surface");
    if (!s.is_object()) throw config_error("config key surface must be an object");
    cfg.surface = detail::parse_surface(s);
  }
  if (root.contains("means")) {
    cfg.explicit_means =
        detail::expect_number_array(root.at("means"), "means");
    if (cfg.explicit_means->empty())
      throw config_error("config key means must not be empty");
  }

  cfg.sampling_variance = expect_number(root, "", "sampling_variance",
                                        cfg.sampling_variance);
  detail::require_positive(cfg.sampling_variance, "sampling_variance");

  if (root.contains("prior")) {
    const auto& p = root.at("prior");
    if (!p.is_object()) throw config_error("config key prior must be an object");
    detail::reject_unknown_keys(p, "prior",
                                {"variant", "mean", "sigma0_sq", "kernel"});
    cfg.prior.variant = detail::parse_variant(
        expect_string(p, "prior", "variant", "correlated"));
    if (p.contains("mean")) {
      const auto& m = p.at("mean");
      if (!m.is_object())
        throw config_error("config key prior.mean must be an object");
      cfg.prior.mean = detail::parse_mean_spec(m);
    }
    cfg.prior.sigma0_sq =
        expect_number(p, "prior", "sigma0_sq", cfg.prior.sigma0_sq);
    detail::require_positive(cfg.prior.sigma0_sq, "prior.sigma0_sq");
    if (p.contains("kernel")) {
      const auto& k = p.at("kernel");
      if (!k.is_object())
        throw config_error("config key prior.kernel must be an object");
      detail::reject_unknown_keys(k, "prior.kernel", {"length_scale"});
      cfg.prior.length_scale = expect_number(k, "prior.kernel", "length_scale",
                                             cfg.prior.length_scale);
      detail::require_positive(cfg.prior.length_scale,
                               "prior.kernel.length_scale");
    }
  }

  if (root.contains("policy")) {
    const auto& p = root.at("policy");
    if (!p.is_object()) throw config_error("config key policy must be an object");
    detail::reject_unknown_keys(p, "policy", {"K", "a", "nu"});
    cfg.policy.K = expect_number(p, "policy", "K", cfg.policy.K);
    cfg.policy.a = expect_number(p, "policy", "a", cfg.policy.a);
    cfg.policy.nu = expect_number(p, "policy", "nu", cfg.policy.nu);
    detail::require_positive(cfg.policy.K, "policy.K");
    detail::require_positive(cfg.policy.a, "policy.a");
    if (!(cfg.policy.nu > 0.0 && cfg.policy.nu <= 1.0))
      throw config_error("config key policy.nu must lie in (0, 1]");
  }

  if (root.contains("bounds")) {
    const auto& b = root.at("bounds");
    if (!b.is_object()) throw config_error("config key bounds must be an object");
    detail::reject_unknown_keys(b, "bounds", {"epsilon", "a"});
    cfg.bounds.epsilon = expect_number(b, "bounds", "epsilon", cfg.bounds.epsilon);
    cfg.bounds.a = expect_number(b, "bounds", "a", cfg.bounds.a);
    if (!(cfg.bounds.epsilon > 0.0 && cfg.bounds.epsilon < 1.0))
      throw config_error("config key bounds.epsilon must lie in (0, 1)");
    if (!(cfg.bounds.a > 1.0))
      throw config_error("config key bounds.a must exceed 1");
  }

  if (root.contains("run")) {
    const auto& r = root.at("run");
    if (!r.is_object()) throw config_error("config key run must be an object");
    detail::reject_unknown_keys(r, "run", {"T", "runs", "seed"});
    cfg.run.horizon = expect_integer(r, "run", "T", cfg.run.horizon);
    cfg.run.runs = expect_integer(r, "run", "runs", cfg.run.runs);
    const long seed = expect_integer(r, "run", "seed",
                                     static_cast<long>(cfg.run.seed));
    if (cfg.run.horizon < 1)
      throw config_error("config key run.T must be at least 1");
    if (cfg.run.runs < 1)
      throw config_error("config key run.runs must be at least 1");
    if (seed < 0) throw config_error("config key run.seed must be nonnegative");
    cfg.run.seed = static_cast<std::uint64_t>(seed);
  }

  return cfg;
}

inline std::string serialize(const ExperimentConfig& cfg) {
  using nlohmann::json;
  json root;
  if (cfg.explicit_means) {
    root["means"] = *cfg.explicit_means;
  } else {
    json patches = json::array();
    for (const auto& p : cfg.surface.patches)
      patches.push_back({{"row", p.row},
                         {"col", p.col},
                         {"radius", p.radius},
                         {"value", p.value}});
    root["surface"] = {{"rows", cfg.surface.rows},
                       {"cols", cfg.surface.cols},
                       {"base_value", cfg.surface.base_value},
                       {"patches", patches}};
  }
  root["sampling_variance"] = cfg.sampling_variance;

  json mean;
  switch (cfg.prior.mean.mode) {
    case MeanSpec::Mode::patch_aligned:
      mean = {{"mode", "patch_aligned"},
              {"high", cfg.prior.mean.high},
              {"low", cfg.prior.mean.low}};
      break;
    case MeanSpec::Mode::uniform:
      mean = {{"mode", "uniform"}, {"value", cfg.prior.mean.value}};
      break;
    case MeanSpec::Mode::explicit_values:
      mean = {{"mode", "explicit"}, {"values", cfg.prior.mean.values}};
      break;
  }
  const char* variant = "correlated";
  if (cfg.prior.variant == PolicyParams::Variant::uninformative)
    variant = "uninformative";
  else if (cfg.prior.variant == PolicyParams::Variant::uncorrelated)
    variant = "uncorrelated";
  root["prior"] = {{"variant", variant},
                   {"mean", mean},
                   {"sigma0_sq", cfg.prior.sigma0_sq},
                   {"kernel", {{"length_scale", cfg.prior.length_scale}}}};
  root["policy"] = {{"K", cfg.policy.K}, {"a", cfg.policy.a}, {"nu", cfg.policy.nu}};
  root["bounds"] = {{"epsilon", cfg.bounds.epsilon}, {"a", cfg.bounds.a}};
  root["run"] = {{"T", cfg.run.horizon},
                 {"runs", cfg.run.runs},
                 {"seed", static_cast<long>(cfg.run.seed)}};
  return root.dump(2) + "\n";
}

/// Builds the bandit instance the config describes.
inline BanditInstance resolved_instance(const ExperimentConfig& cfg) {
  if (cfg.explicit_means) {
    BanditInstance inst;
    inst.means = *cfg.explicit_means;
    inst.sampling_variance = cfg.sampling_variance;
    return inst;
  }
  return make_grid_surface(cfg.surface, cfg.sampling_variance);
}

/// Builds the prior the config describes for the given instance.
inline GaussianPrior resolved_prior(const ExperimentConfig& cfg,
                                    const BanditInstance& inst) {
  const int n = inst.num_arms();
  if (cfg.prior.variant == PolicyParams::Variant::uninformative)
    return GaussianPrior::flat(n);

  Eigen::VectorXd mean(n);
  switch (cfg.prior.mean.mode) {
    case MeanSpec::Mode::patch_aligned: {
      if (cfg.explicit_means)
        throw config_error(
            "config key prior.mean.mode: patch_aligned requires a surface");
      for (int i = 0; i < n; ++i)
        mean[i] = inst.means[i] > cfg.surface.base_value ? cfg.prior.mean.high
                                                         : cfg.prior.mean.low;
      break;
    }
    case MeanSpec::Mode::uniform:
      mean.setConstant(cfg.prior.mean.value);
      break;
    case MeanSpec::Mode::explicit_values: {
      if (static_cast<int>(cfg.prior.mean.values.size()) != n)
        throw config_error(
            "config key prior.mean.values must have one entry per arm");
      mean = Eigen::Map<const Eigen::VectorXd>(
          cfg.prior.mean.values.data(),
          static_cast<Eigen::Index>(cfg.prior.mean.values.size()));
      break;
    }
  }

  if (cfg.prior.variant == PolicyParams::Variant::uncorrelated)
    return GaussianPrior::diagonal(mean, cfg.prior.sigma0_sq, n);

  if (!inst.coords)
    throw config_error(
        "config key prior.variant: correlated requires a grid surface");
  return GaussianPrior::informative(
      mean, exponential_kernel(inst, cfg.prior.sigma0_sq,
                               cfg.prior.length_scale));
}

inline PolicyParams resolved_policy(const ExperimentConfig& cfg) {
  PolicyParams params;
  params.variant = cfg.prior.variant;
  params.K = cfg.policy.K;
  params.a = cfg.policy.a;
  params.nu = cfg.policy.nu;
  params.validate();
  return params;
}

inline BoundParams resolved_bound_params(const ExperimentConfig& cfg) {
  BoundParams params;
  params.epsilon = cfg.bounds.epsilon;
  params.a = cfg.bounds.a;
  params.K = cfg.policy.K;
  params.nu = cfg.policy.nu;
  params.validate();
  return params;
}

} // namespace ucl
