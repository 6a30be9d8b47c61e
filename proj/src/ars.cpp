#include "ailsrs/ars.hpp"

#include "ailsrs/parallel.hpp"

namespace ailsrs {

std::vector<Matrix> sample_directions(std::uint64_t seed, std::uint64_t iteration, int count,
                                      Eigen::Index action_dim, Eigen::Index state_dim) {
  if (count < 1 || action_dim < 1 || state_dim < 1)
    throw std::invalid_argument("sample_directions: count and dimensions must be >= 1");
  std::vector<Matrix> deltas;
  deltas.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng = rng_new(seed, {stream::kDirection, iteration, static_cast<std::uint64_t>(i)});
    deltas.push_back(gaussian_matrix(rng, action_dim, state_dim));
  }
  return deltas;
}

std::size_t DirectionEvaluation::visited_states() const {
  std::size_t total = 0;
  for (const auto& t : trajectories) total += static_cast<std::size_t>(t.length());
  return total;
}

DirectionEvaluation evaluate_directions(const LinearPolicy<double>& policy, const std::vector<Matrix>& deltas,
                                        double nu, const EnvSpec& spec,
                                        const ObservationNormalizer<double>& normalizer,
                                        RewardSource reward_source, std::uint64_t seed, std::uint64_t iteration,
                                        unsigned threads) {
  if (deltas.empty()) throw std::invalid_argument("evaluate_directions: no directions");
  const std::size_t n = deltas.size();
  std::vector<RolloutResult> slots(2 * n);

  parallel_for(2 * n, threads, [&](std::size_t task) {
    const std::size_t i = task / 2;
    const int sign = (task % 2 == 0) ? 1 : -1;
    const LinearPolicy<double> perturbed = perturb(policy, deltas[i], nu, sign);
    // Both members of a pair start from the same initial state.
    Rng rng = rng_new(seed, {stream::kRollout, iteration, static_cast<std::uint64_t>(i)});
    slots[task] = rollout(spec, perturbed, normalizer, reward_source, rng, true);
  });

  DirectionEvaluation out;
  out.results.reserve(n);
  out.trajectories.reserve(2 * n);
  out.env_returns.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.results.push_back({deltas[i], slots[2 * i].disc_return, slots[2 * i + 1].disc_return});
  }
  for (auto& slot : slots) {
    out.env_returns.push_back(slot.env_return);
    out.trajectories.push_back(std::move(slot.trajectory));
  }
  return out;
}

}  // namespace ailsrs
