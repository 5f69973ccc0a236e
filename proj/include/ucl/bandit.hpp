#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace ucl {

/// Piecewise-constant reward landscape over a rows x cols grid.  Cells inside
/// a patch take the patch value; the rest take base_value.
struct RewardSurfaceSpec {
  struct Patch {
    double row = 0.0;
    double col = 0.0;
    double radius = 0.0;
    double value = 0.0;

    friend bool operator==(const Patch&, const Patch&) = default;
  };
  int rows = 0;
  int cols = 0;
  double base_value = 0.0;
  std::vector<Patch> patches;

  friend bool operator==(const RewardSurfaceSpec&,
                         const RewardSurfaceSpec&) = default;
};

/// A set of Gaussian arms: true means, optional spatial coordinates (present
/// for grid-built instances) and the common sampling variance.
struct BanditInstance {
  std::vector<double> means;
  std::optional<std::vector<std::array<double, 2>>> coords;
  double sampling_variance = 1.0;

  int num_arms() const { return static_cast<int>(means.size()); }

  /// Lowest-index arm attaining the maximal mean.
  int optimal_arm() const {
    if (means.empty()) throw std::invalid_argument("instance has no arms");
    int best = 0;
    for (int i = 1; i < num_arms(); ++i)
      if (means[i] > means[best]) best = i;
    return best;
  }

  bool has_unique_optimum() const {
    const int star = optimal_arm();
    for (int i = 0; i < num_arms(); ++i)
      if (i != star && means[i] == means[star]) return false;
    return true;
  }
};

/// Expands a surface spec into a row-major arm list with grid coordinates.
/// A cell takes the value of the containing patch with the nearest center
/// (ties resolved toward the earlier patch in the list).
inline BanditInstance make_grid_surface(const RewardSurfaceSpec& spec,
                                        double sampling_variance) {
  if (spec.rows < 1 || spec.cols < 1)
    throw std::invalid_argument("surface grid must have positive dimensions");
  if (sampling_variance <= 0.0)
    throw std::invalid_argument("sampling variance must be positive");
  for (const auto& p : spec.patches)
    if (p.radius <= 0.0)
      throw std::invalid_argument("surface patch radius must be positive");

  BanditInstance inst;
  inst.sampling_variance = sampling_variance;
  inst.means.reserve(static_cast<std::size_t>(spec.rows) * spec.cols);
  std::vector<std::array<double, 2>> coords;
  coords.reserve(inst.means.capacity());

  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      double value = spec.base_value;
      double best_dist = std::numeric_limits<double>::infinity();
      for (const auto& p : spec.patches) {
        const double d = std::hypot(r - p.row, c - p.col);
        if (d <= p.radius && d < best_dist) {
          best_dist = d;
          value = p.value;
        }
      }
      inst.means.push_back(value);
      coords.push_back({static_cast<double>(r), static_cast<double>(c)});
    }
  }
  inst.coords = std::move(coords);
  return inst;
}

/// One noisy reward draw from the given arm.
inline double sample_reward(const BanditInstance& inst, int arm,
                            std::mt19937_64& rng) {
  if (arm < 0 || arm >= inst.num_arms())
    throw std::out_of_range("sample_reward: arm index out of range");
  std::normal_distribution<double> noise(0.0, std::sqrt(inst.sampling_variance));
  return inst.means[static_cast<std::size_t>(arm)] + noise(rng);
}

/// Exponentially decaying covariance over arm coordinates:
/// K[i][j] = prior_variance * exp(-dist(i,j) / length_scale), with a small
/// diagonal jitter (1e-8 * prior_variance) so downstream factorizations stay
/// positive definite.
inline Eigen::MatrixXd exponential_kernel(const BanditInstance& inst,
                                          double prior_variance,
                                          double length_scale) {
  if (!inst.coords)
    throw std::invalid_argument("exponential_kernel: instance has no coordinates");
  if (prior_variance <= 0.0 || length_scale <= 0.0)
    throw std::invalid_argument("exponential_kernel: parameters must be positive");

  const auto& xy = *inst.coords;
  const int n = inst.num_arms();
  Eigen::MatrixXd k(n, n);
  for (int i = 0; i < n; ++i) {
    k(i, i) = prior_variance;
    for (int j = i + 1; j < n; ++j) {
      const double d = std::hypot(xy[i][0] - xy[j][0], xy[i][1] - xy[j][1]);
      k(i, j) = k(j, i) = prior_variance * std::exp(-d / length_scale);
    }
  }
  k.diagonal().array() += 1e-8 * prior_variance;
  return k;
}

} // namespace ucl
