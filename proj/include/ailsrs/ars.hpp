#pragma once

#include "ailsrs/envs.hpp"
#include "ailsrs/numerics.hpp"
#include "ailsrs/policy.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace ailsrs {

struct ArsConfig {
  double alpha = 0.02;
  double nu = 0.03;
  int n_directions = 320;

  void validate() const {
    if (!(alpha > 0.0) || !(nu > 0.0) || n_directions < 1)
      throw std::invalid_argument("ars config: alpha and nu must be > 0 and n_directions >= 1");
  }
};

/// Returns of the antithetic pair theta +- nu * delta.
template <typename Scalar>
struct DirectionResult {
  MatrixX<Scalar> delta;
  Scalar r_plus = Scalar(0);
  Scalar r_minus = Scalar(0);
};

/// Population standard deviation of all 2N returns.
template <typename Scalar>
Scalar reward_std(std::span<const DirectionResult<Scalar>> results) {
  if (results.empty()) throw std::invalid_argument("reward_std: no results");
  Scalar sum = Scalar(0);
  for (const auto& r : results) sum += r.r_plus + r.r_minus;
  const Scalar count = Scalar(2) * static_cast<Scalar>(results.size());
  const Scalar mean = sum / count;
  Scalar sq = Scalar(0);
  for (const auto& r : results) sq += (r.r_plus - mean) * (r.r_plus - mean) + (r.r_minus - mean) * (r.r_minus - mean);
  return std::sqrt(sq / count);
}

/// theta + alpha / (N sigma_R) * sum_i (r+_i - r-_i) delta_i, summed in index order.
///
/// A degenerate sigma_R below 1e-12 leaves theta unchanged. `fixed_sigma`
/// replaces sigma_R (1 gives the unscaled basic random search step).
template <typename Scalar>
MatrixX<Scalar> ars_update(const MatrixX<Scalar>& theta, std::span<const DirectionResult<Scalar>> results,
                           Scalar alpha, std::optional<Scalar> fixed_sigma = std::nullopt) {
  if (results.empty()) throw std::invalid_argument("ars_update: no direction results");
  for (const auto& r : results)
    if (r.delta.rows() != theta.rows() || r.delta.cols() != theta.cols())
      throw DimensionError("ars_update: delta shape differs from theta");
  const Scalar sigma = fixed_sigma ? *fixed_sigma : reward_std(results);
  if (sigma < Scalar(1e-12)) return theta;
  MatrixX<Scalar> step = MatrixX<Scalar>::Zero(theta.rows(), theta.cols());
  for (const auto& r : results) step += (r.r_plus - r.r_minus) * r.delta;
  return theta + (alpha / (static_cast<Scalar>(results.size()) * sigma)) * step;
}

template <typename Scalar>
MatrixX<Scalar> ars_update(const MatrixX<Scalar>& theta, const std::vector<DirectionResult<Scalar>>& results,
                           Scalar alpha, std::optional<Scalar> fixed_sigma = std::nullopt) {
  return ars_update(theta, std::span<const DirectionResult<Scalar>>(results), alpha, fixed_sigma);
}

/// N standard-normal (p x n) directions; direction i of `iteration` draws from
/// its own substream, so any subset can be regenerated independently.
std::vector<Matrix> sample_directions(std::uint64_t seed, std::uint64_t iteration, int count,
                                      Eigen::Index action_dim, Eigen::Index state_dim);

struct DirectionEvaluation {
  std::vector<DirectionResult<double>> results;
  // 2N trajectories ordered (0,+), (0,-), (1,+), ...
  std::vector<Trajectory> trajectories;
  // Environment returns matching `trajectories`, for logging only.
  std::vector<double> env_returns;

  std::size_t visited_states() const;
};

/// Rolls out theta +- nu * delta_i once each. Pair i of `iteration` resets
/// from its own RNG substream, shared by the + and - rollout. Results are
/// stored by index.
DirectionEvaluation evaluate_directions(const LinearPolicy<double>& policy, const std::vector<Matrix>& deltas,
                                        double nu, const EnvSpec& spec,
                                        const ObservationNormalizer<double>& normalizer,
                                        RewardSource reward_source, std::uint64_t seed, std::uint64_t iteration,
                                        unsigned threads = 0);

}  // namespace ailsrs
