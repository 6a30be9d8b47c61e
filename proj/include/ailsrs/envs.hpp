#pragma once

#include "ailsrs/discriminator.hpp"
#include "ailsrs/numerics.hpp"
#include "ailsrs/policy.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ailsrs {

struct EnvSpec {
  std::string name;
  Eigen::Index state_dim = 0;
  Eigen::Index action_dim = 0;
  int horizon = 0;
  double action_clip = 0.0;
};

/// Names accepted by make_env.
const std::vector<std::string>& env_names();

/// Throws std::invalid_argument listing valid names.
EnvSpec env_spec(std::string_view name);

/// A single-threaded episode of one of the built-in environments.
class Env {
 public:
  explicit Env(EnvSpec spec);

  const EnvSpec& spec() const { return spec_; }
  int steps_taken() const { return steps_; }
  bool done() const { return steps_ >= spec_.horizon; }

  Vector reset(Rng& rng);

  // Start from a given physical state (lqr2d/pointmass2d: observation; pendulum: (angle, velocity)).
  Vector reset_to(const Vector& physical_state);

  struct StepResult {
    Vector state;
    double reward = 0.0;
    bool done = false;
  };

  /// Clips the action to +-action_clip, advances one step. Throws once done.
  StepResult step(const Vector& action);

  Vector observation() const;

 private:
  EnvSpec spec_;
  Vector physical_;
  int steps_ = 0;
};

Env make_env(std::string_view name);

struct Trajectory {
  Matrix states;       // T x n, the state each action was taken in
  Matrix actions;      // T x p, after clipping
  Vector env_rewards;  // T

  Eigen::Index length() const { return states.rows(); }
  bool operator==(const Trajectory&) const = default;
};

/// Rows of [state, action] for every step.
Matrix state_action_rows(const Trajectory& trajectory);

/// Either the environment reward or -log(1 - D) from a frozen discriminator.
struct RewardSource {
  const MlpDiscriminator<double>* discriminator = nullptr;

  static RewardSource environment() { return {}; }
  static RewardSource from(const MlpDiscriminator<double>& disc) { return {&disc}; }
  bool uses_discriminator() const { return discriminator != nullptr; }
};

struct RolloutResult {
  Trajectory trajectory;
  // Sum of discriminator rewards; equals env_return for the environment source.
  double disc_return = 0.0;
  double env_return = 0.0;
};

/// One full episode. The normalizer is read, never mutated.
RolloutResult rollout(const EnvSpec& spec, const LinearPolicy<double>& policy,
                      const ObservationNormalizer<double>& normalizer, RewardSource reward_source, Rng& rng,
                      bool record_states = true);

struct RiccatiSolution {
  LinearPolicy<double> policy;  // theta = -K
  ObservationNormalizer<double> normalizer;  // identity (count 0)
  Matrix gain;                  // K, action = -K s
  Matrix cost_to_go;            // P
  double recurrence_residual = 0.0;
  double optimal_return = 0.0;  // mean over seeded evaluation episodes
};

/// Stationary LQR gain for lqr2d (Q = I, R = 0.1) by iterating the Riccati
/// recurrence to a 1e-12 fixed point, with its mean return over `episodes`
/// evaluation episodes of `seed`.
RiccatiSolution riccati_optimal(const EnvSpec& spec, std::uint64_t seed = 0, int episodes = 100);

// Stream tags for label-derived RNG substreams.
namespace stream {
inline constexpr std::uint64_t kEvaluation = 1;
inline constexpr std::uint64_t kDirection = 2;
inline constexpr std::uint64_t kRollout = 3;
inline constexpr std::uint64_t kDiscriminatorTrain = 4;
inline constexpr std::uint64_t kDiscriminatorInit = 5;
inline constexpr std::uint64_t kBehaviorCloning = 6;
}  // namespace stream

}  // namespace ailsrs
