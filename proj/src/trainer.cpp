#include "ailsrs/trainer.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace ailsrs {
namespace {

using Clock = std::chrono::steady_clock;

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void append_optional(std::string& out, const std::optional<double>& v) {
  out += ',';
  if (v) out += shortest(*v);
}

double mean_of(const std::vector<double>& xs) {
  double total = 0.0;
  for (double x : xs) total += x;
  return total / static_cast<double>(xs.size());
}

void fold_states(ObservationNormalizer<double>& normalizer, const std::vector<Trajectory>& trajectories) {
  for (const auto& t : trajectories)
    for (Eigen::Index r = 0; r < t.states.rows(); ++r) normalizer.observe(t.states.row(r).transpose());
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

void TrainerConfig::validate() const {
  ars.validate();
  if (max_iterations < 1 || rollout_max_steps < 1 || !(disc_lr > 0.0) || disc_iters < 0 || disc_batch < 0 ||
      eval_every < 1 || eval_episodes < 1)
    throw std::invalid_argument("trainer config: iteration counts, steps and rates must be positive");
  if (target_frac && !(*target_frac > 0.0)) throw std::invalid_argument("trainer config: target_frac must be > 0");
}

std::string format_metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = "iteration,mean_disc_return,sigma_r,disc_loss,eval_env_return_mean,eval_env_return_std,wall_ms\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iteration);
    out += ',' + shortest(r.mean_disc_return);
    out += ',' + shortest(r.sigma_r);
    append_optional(out, r.disc_loss);
    append_optional(out, r.eval_env_return_mean);
    append_optional(out, r.eval_env_return_std);
    append_optional(out, r.wall_ms);
    out += '\n';
  }
  return out;
}

EvalResult evaluate(const LinearPolicy<double>& policy, const ObservationNormalizer<double>& normalizer,
                    const EnvSpec& spec, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
  std::vector<double> returns;
  returns.reserve(static_cast<std::size_t>(episodes));
  double total = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    Rng rng = rng_new(seed, {stream::kEvaluation, static_cast<std::uint64_t>(ep)});
    returns.push_back(rollout(spec, policy, normalizer, RewardSource::environment(), rng, false).env_return);
    total += returns.back();
  }
  EvalResult out;
  out.mean = total / episodes;
  double sq = 0.0;
  for (double r : returns) sq += (r - out.mean) * (r - out.mean);
  out.std = std::sqrt(sq / episodes);
  return out;
}

bool reaches_fraction(double value, double reference, double fraction) {
  return value >= reference - (1.0 - fraction) * std::abs(reference);
}

EnvSpec training_spec(const EnvSpec& spec, const TrainerConfig& config) {
  EnvSpec capped = spec;
  capped.horizon = std::min(spec.horizon, config.rollout_max_steps);
  return capped;
}

// ---------------------------------------------------------------------------

ExpertResult train_expert(const EnvSpec& spec, const TrainerConfig& config, int iterations) {
  if (iterations < 1) throw std::invalid_argument("train_expert: iterations must be >= 1");
  config.ars.validate();
  const EnvSpec train_spec = training_spec(spec, config);
  ExpertResult out;
  TrainedPolicy& trained = out.trained;
  trained.policy = LinearPolicy<double>::zeros(spec.action_dim, spec.state_dim);
  trained.normalizer = ObservationNormalizer<double>(spec.state_dim, config.center_observations);

  for (int it = 1; it <= iterations; ++it) {
    const auto start = Clock::now();
    const auto iteration = static_cast<std::uint64_t>(it);
    const auto deltas =
        sample_directions(config.seed, iteration, config.ars.n_directions, spec.action_dim, spec.state_dim);
    const DirectionEvaluation eval = evaluate_directions(trained.policy, deltas, config.ars.nu, train_spec,
                                                         trained.normalizer, RewardSource::environment(),
                                                         config.seed, iteration, config.threads);
    MetricsRow row;
    row.iteration = it;
    row.mean_disc_return = mean_of(eval.env_returns);
    row.sigma_r = reward_std<double>(eval.results);
    trained.policy.theta = ars_update(trained.policy.theta, eval.results, config.ars.alpha);
    fold_states(trained.normalizer, eval.trajectories);
    if (it % config.eval_every == 0 || it == iterations) {
      const EvalResult e = evaluate(trained.policy, trained.normalizer, spec, config.eval_episodes, config.seed);
      row.eval_env_return_mean = e.mean;
      row.eval_env_return_std = e.std;
    }
    if (config.record_wall_time) row.wall_ms = elapsed_ms(start);
    out.metrics.push_back(row);
  }
  out.final_eval = evaluate(trained.policy, trained.normalizer, spec, config.eval_episodes, config.seed);
  return out;
}

// ---------------------------------------------------------------------------

AilsrsState make_ailsrs_state(const EnvSpec& spec, const TrainerConfig& config,
                              const std::optional<TrainedPolicy>& init) {
  AilsrsState state;
  if (init) {
    if (init->policy.state_dim() != spec.state_dim || init->policy.action_dim() != spec.action_dim ||
        init->normalizer.dim() != spec.state_dim)
      throw DimensionError("train_ailsrs: initial policy does not match environment " + spec.name);
    state.policy = init->policy;
    state.normalizer = init->normalizer;
  } else {
    state.policy = LinearPolicy<double>::zeros(spec.action_dim, spec.state_dim);
    state.normalizer = ObservationNormalizer<double>(spec.state_dim, config.center_observations);
  }
  Rng rng = rng_new(config.seed, {stream::kDiscriminatorInit});
  state.disc = disc_init<double>(spec.state_dim, spec.action_dim, rng);
  state.adam = AdamState<double>(state.disc.parameter_count());
  return state;
}

IterationOutput ailsrs_iteration(AilsrsState& state, const Matrix& expert_pool, const EnvSpec& spec,
                                 const TrainerConfig& config, int iteration) {
  if (expert_pool.rows() == 0) throw std::invalid_argument("ailsrs_iteration: expert pool is empty");
  if (expert_pool.cols() != spec.state_dim + spec.action_dim)
    throw DimensionError("ailsrs_iteration: expert pool width does not match environment");
  const auto iter = static_cast<std::uint64_t>(iteration);

  const auto deltas =
      sample_directions(config.seed, iter, config.ars.n_directions, spec.action_dim, spec.state_dim);

  // Every rollout of the iteration is scored by the same discriminator.
  IterationOutput out;
  out.evaluation = evaluate_directions(state.policy, deltas, config.ars.nu, spec, state.normalizer,
                                       RewardSource::from(state.disc), config.seed, iter, config.threads);
  const DirectionEvaluation& eval = out.evaluation;

  Eigen::Index sampled_rows = 0;
  for (const auto& t : eval.trajectories) sampled_rows += t.length();
  Matrix sampled_pool(sampled_rows, expert_pool.cols());
  Eigen::Index offset = 0;
  for (const auto& t : eval.trajectories) {
    sampled_pool.middleRows(offset, t.length()) << t.states, t.actions;
    offset += t.length();
  }
  DiscTrainOptions disc_options;
  disc_options.iters = config.disc_iters;
  disc_options.lr = config.disc_lr;
  disc_options.batch_size = config.disc_batch > 0 ? config.disc_batch : spec.horizon;
  Rng disc_rng = rng_new(config.seed, {stream::kDiscriminatorTrain, iter});
  const double disc_loss = disc_train(state.disc, state.adam, expert_pool, sampled_pool, disc_options, disc_rng);

  MetricsRow& row = out.metrics;
  row.iteration = iteration;
  double total = 0.0;
  for (const auto& r : eval.results) total += r.r_plus + r.r_minus;
  row.mean_disc_return = total / (2.0 * static_cast<double>(eval.results.size()));
  row.sigma_r = reward_std<double>(eval.results);
  row.disc_loss = disc_loss;

  state.policy.theta = ars_update(state.policy.theta, eval.results, config.ars.alpha);
  fold_states(state.normalizer, eval.trajectories);
  return out;
}

AilsrsResult train_ailsrs(const EnvSpec& spec, const TrajectorySet& expert, const TrainerConfig& config,
                          const std::optional<TrainedPolicy>& init, std::optional<double> expert_reference,
                          const IterationCallback& on_iteration) {
  config.validate();
  if (expert.trajectories.empty()) throw std::invalid_argument("train_ailsrs: expert set is empty");
  if (expert.state_dim != spec.state_dim || expert.action_dim != spec.action_dim)
    throw DimensionError("train_ailsrs: demonstrations are " + std::to_string(expert.state_dim) + "x" +
                         std::to_string(expert.action_dim) + " but " + spec.name + " is " +
                         std::to_string(spec.state_dim) + "x" + std::to_string(spec.action_dim));
  const EnvSpec train_spec = training_spec(spec, config);
  const Matrix expert_pool = state_action_rows(expert);
  const double reference = expert_reference ? *expert_reference : mean_env_return(expert);

  AilsrsState state = make_ailsrs_state(spec, config, init);
  AilsrsResult out;
  for (int it = 1; it <= config.max_iterations; ++it) {
    const auto start = Clock::now();
    IterationOutput step = ailsrs_iteration(state, expert_pool, train_spec, config, it);
    MetricsRow& row = step.metrics;
    bool stop = false;
    if (it % config.eval_every == 0 || it == config.max_iterations) {
      const EvalResult e = evaluate(state.policy, state.normalizer, spec, config.eval_episodes, config.seed);
      row.eval_env_return_mean = e.mean;
      row.eval_env_return_std = e.std;
      if (config.target_frac && reaches_fraction(e.mean, reference, *config.target_frac)) {
        out.target_reached_at = it;
        stop = true;
      }
    }
    if (config.record_wall_time) row.wall_ms = elapsed_ms(start);
    out.metrics.push_back(row);
    if (on_iteration) on_iteration(row, state);
    if (stop) break;
  }
  out.trained = {state.policy, state.normalizer};
  out.disc = state.disc;
  out.final_eval = evaluate(state.policy, state.normalizer, spec, config.eval_episodes, config.seed);
  return out;
}

}  // namespace ailsrs
