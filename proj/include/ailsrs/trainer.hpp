#pragma once

#include "ailsrs/ars.hpp"
#include "ailsrs/demo_io.hpp"
#include "ailsrs/discriminator.hpp"
#include "ailsrs/envs.hpp"
#include "ailsrs/policy.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ailsrs {

/// Library defaults follow the published hyperparameter table; desk-scale
/// runs override them through config files or flags.
struct TrainerConfig {
  ArsConfig ars;
  int max_iterations = 100000;
  int rollout_max_steps = 1000;
  double disc_lr = kDiscLearningRate;
  int disc_iters = 3;
  int disc_batch = 0;  // 0: episode length (env horizon after the rollout cap)
  int eval_every = 10;
  int eval_episodes = 10;
  std::uint64_t seed = 1;
  // Early stop once evaluation reaches this fraction of the expert return.
  std::optional<double> target_frac;
  // Mean-subtract observations before scaling (see ObservationNormalizer).
  bool center_observations = false;
  unsigned threads = 0;
  bool record_wall_time = false;

  void validate() const;
};

struct MetricsRow {
  int iteration = 0;
  double mean_disc_return = 0.0;
  double sigma_r = 0.0;
  std::optional<double> disc_loss;
  std::optional<double> eval_env_return_mean;
  std::optional<double> eval_env_return_std;
  std::optional<double> wall_ms;
};

/// CSV with a fixed header; reals as shortest round-trip decimals, absent values empty.
std::string format_metrics_csv(const std::vector<MetricsRow>& rows);

struct EvalResult {
  double mean = 0.0;
  double std = 0.0;
};

/// Environment-reward episodes with a frozen normalizer; population mean and std.
EvalResult evaluate(const LinearPolicy<double>& policy, const ObservationNormalizer<double>& normalizer,
                    const EnvSpec& spec, int episodes, std::uint64_t seed);

/// Whether `value` is within (1 - fraction) * |reference| below `reference`.
/// For positive references this is value >= fraction * reference; for the
/// negative returns of cost-type tasks it bounds the excess cost.
bool reaches_fraction(double value, double reference, double fraction);

/// The training horizon: the environment horizon capped by rollout_max_steps.
EnvSpec training_spec(const EnvSpec& spec, const TrainerConfig& config);

struct TrainedPolicy {
  LinearPolicy<double> policy;
  ObservationNormalizer<double> normalizer;
};

struct ExpertResult {
  TrainedPolicy trained;
  std::vector<MetricsRow> metrics;
  EvalResult final_eval;
};

/// Plain ARS on the environment reward, starting from theta = 0.
ExpertResult train_expert(const EnvSpec& spec, const TrainerConfig& config, int iterations);

struct AilsrsState {
  LinearPolicy<double> policy;
  ObservationNormalizer<double> normalizer;
  MlpDiscriminator<double> disc;
  AdamState<double> adam;
};

/// Fresh state: zero (or provided) policy, Glorot-initialized discriminator.
AilsrsState make_ailsrs_state(const EnvSpec& spec, const TrainerConfig& config,
                              const std::optional<TrainedPolicy>& init = std::nullopt);

/// Everything one outer iteration produced.
struct IterationOutput {
  MetricsRow metrics;
  DirectionEvaluation evaluation;
};

/// One outer step: sample directions, 2N rollouts scored by a snapshot of the
/// discriminator, train the discriminator on those rollouts against the
/// expert pool, update theta from the pre-training discriminator returns,
/// then fold every visited state into the normalizer.
IterationOutput ailsrs_iteration(AilsrsState& state, const Matrix& expert_pool, const EnvSpec& spec,
                                 const TrainerConfig& config, int iteration);

struct AilsrsResult {
  TrainedPolicy trained;
  MlpDiscriminator<double> disc;
  std::vector<MetricsRow> metrics;
  std::optional<int> target_reached_at;
  EvalResult final_eval;
};

using IterationCallback = std::function<void(const MetricsRow&, const AilsrsState&)>;

/// AILSRS on `expert`; the environment reward is used only for evaluation.
/// `expert_reference` is the return that target_frac is measured against
/// (defaults to the demonstrations' mean stored return).
AilsrsResult train_ailsrs(const EnvSpec& spec, const TrajectorySet& expert, const TrainerConfig& config,
                          const std::optional<TrainedPolicy>& init = std::nullopt,
                          std::optional<double> expert_reference = std::nullopt,
                          const IterationCallback& on_iteration = {});

}  // namespace ailsrs
