#include "ailsrs/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ailsrs {
namespace {

constexpr double kLqrDt = 0.1;
constexpr double kLqrActionCost = 0.1;
constexpr double kPointDt = 0.1;
constexpr double kPointActionCost = 0.01;
constexpr double kGravity = 10.0;
constexpr double kLength = 1.0;
constexpr double kMass = 1.0;
constexpr double kPendulumDt = 0.05;
constexpr double kMaxSpeed = 8.0;

Matrix lqr_a() {
  Matrix a(2, 2);
  a << 1.0, kLqrDt, 0.0, 1.0;
  return a;
}

Matrix lqr_b() {
  Matrix b(2, 1);
  b << 0.0, kLqrDt;
  return b;
}

double wrap_angle(double phi) {
  const double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(phi + std::numbers::pi, two_pi);
  if (w < 0.0) w += two_pi;
  return w - std::numbers::pi;
}

}  // namespace

const std::vector<std::string>& env_names() {
  static const std::vector<std::string> names = {"lqr2d", "pointmass2d", "pendulum"};
  return names;
}

EnvSpec env_spec(std::string_view name) {
  if (name == "lqr2d") return {"lqr2d", 2, 1, 100, 10.0};
  if (name == "pointmass2d") return {"pointmass2d", 4, 2, 200, 1.0};
  if (name == "pendulum") return {"pendulum", 3, 1, 200, 2.0};
  std::string valid;
  for (const auto& n : env_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown environment '" + std::string(name) + "' (valid: " + valid + ")");
}

Env make_env(std::string_view name) { return Env(env_spec(name)); }

Env::Env(EnvSpec spec) : spec_(std::move(spec)) {
  physical_ = Vector::Zero(spec_.name == "pendulum" ? 2 : spec_.state_dim);
}

Vector Env::reset(Rng& rng) {
  steps_ = 0;
  if (spec_.name == "lqr2d") {
    physical_ = Vector(2);
    physical_ << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
  } else if (spec_.name == "pointmass2d") {
    physical_ = Vector::Zero(4);
    physical_[0] = rng.uniform(-1.0, 1.0);
    physical_[1] = rng.uniform(-1.0, 1.0);
  } else {
    physical_ = Vector(2);
    physical_[0] = rng.uniform(-std::numbers::pi, std::numbers::pi);
    physical_[1] = rng.uniform(-1.0, 1.0);
  }
  return observation();
}

Vector Env::reset_to(const Vector& physical_state) {
  if (physical_state.size() != physical_.size()) throw DimensionError("reset_to: state dimension mismatch");
  steps_ = 0;
  physical_ = physical_state;
  return observation();
}

Vector Env::observation() const {
  if (spec_.name != "pendulum") return physical_;
  Vector obs(3);
  obs << std::cos(physical_[0]), std::sin(physical_[0]), physical_[1];
  return obs;
}

Env::StepResult Env::step(const Vector& action) {
  if (done()) throw std::logic_error("step called after the episode finished");
  if (action.size() != spec_.action_dim) throw DimensionError("step: action dimension mismatch");
  const Vector a = action.cwiseMax(-spec_.action_clip).cwiseMin(spec_.action_clip);

  double reward = 0.0;
  if (spec_.name == "lqr2d") {
    reward = -(physical_.squaredNorm() + kLqrActionCost * a.squaredNorm());
    physical_ = lqr_a() * physical_ + lqr_b() * a;
  } else if (spec_.name == "pointmass2d") {
    reward = -(physical_.head<2>().squaredNorm() + kPointActionCost * a.squaredNorm());
    const Vector pos = physical_.head<2>() + kPointDt * physical_.tail<2>();
    const Vector vel = physical_.tail<2>() + kPointDt * a;
    physical_ << pos, vel;
  } else {
    const double phi = physical_[0];
    const double phi_dot = physical_[1];
    const double u = a[0];
    reward = -(std::pow(wrap_angle(phi), 2) + 0.1 * phi_dot * phi_dot + 0.001 * u * u);
    const double accel = kGravity / kLength * std::sin(phi) + u / (kMass * kLength * kLength);
    const double new_dot = std::clamp(phi_dot + accel * kPendulumDt, -kMaxSpeed, kMaxSpeed);
    physical_[0] = phi + new_dot * kPendulumDt;
    physical_[1] = new_dot;
  }
  ++steps_;
  return {observation(), reward, done()};
}

Matrix state_action_rows(const Trajectory& trajectory) {
  Matrix rows(trajectory.length(), trajectory.states.cols() + trajectory.actions.cols());
  rows << trajectory.states, trajectory.actions;
  return rows;
}

RolloutResult rollout(const EnvSpec& spec, const LinearPolicy<double>& policy,
                      const ObservationNormalizer<double>& normalizer, RewardSource reward_source, Rng& rng,
                      bool record_states) {
  if (policy.state_dim() != spec.state_dim || policy.action_dim() != spec.action_dim)
    throw DimensionError("rollout: policy shape does not match environment " + spec.name);
  const bool need_states = record_states || reward_source.uses_discriminator();

  Env env(spec);
  Vector state = env.reset(rng);
  RolloutResult result;
  Trajectory& traj = result.trajectory;
  if (need_states) {
    traj.states.resize(spec.horizon, spec.state_dim);
    traj.actions.resize(spec.horizon, spec.action_dim);
  }
  traj.env_rewards.resize(spec.horizon);

  int t = 0;
  while (!env.done()) {
    const Vector action = act(policy, normalizer, state).cwiseMax(-spec.action_clip).cwiseMin(spec.action_clip);
    if (need_states) {
      traj.states.row(t) = state.transpose();
      traj.actions.row(t) = action.transpose();
    }
    auto step = env.step(action);
    traj.env_rewards[t] = step.reward;
    result.env_return += step.reward;
    state = std::move(step.state);
    ++t;
  }
  if (need_states) {
    traj.states.conservativeResize(t, Eigen::NoChange);
    traj.actions.conservativeResize(t, Eigen::NoChange);
  }
  traj.env_rewards.conservativeResize(t);

  if (reward_source.uses_discriminator()) {
    // The discriminator is frozen during the episode, so rewards can be scored in one batch.
    const DiscActivations<double> scored = forward_batch(*reward_source.discriminator, state_action_rows(traj));
    double total = 0.0;
    for (Eigen::Index k = 0; k < scored.out.size(); ++k) total += disc_reward_from_output(scored.out[k]);
    result.disc_return = total;
  } else {
    result.disc_return = result.env_return;
  }
  if (!record_states) {
    traj.states.resize(0, spec.state_dim);
    traj.actions.resize(0, spec.action_dim);
  }
  return result;
}

RiccatiSolution riccati_optimal(const EnvSpec& spec, std::uint64_t seed, int episodes) {
  if (spec.name != "lqr2d") throw std::invalid_argument("riccati_optimal: only defined for lqr2d");
  const Matrix a = lqr_a();
  const Matrix b = lqr_b();
  const Matrix q = Matrix::Identity(2, 2);
  const Matrix r = Matrix::Constant(1, 1, kLqrActionCost);

  auto riccati_step = [&](const Matrix& p) -> Matrix {
    const Matrix btpa = b.transpose() * p * a;
    const Matrix inner = r + b.transpose() * p * b;
    return q + a.transpose() * p * a - btpa.transpose() * inner.ldlt().solve(btpa);
  };

  Matrix p = q;
  for (int it = 0; it < 1000000; ++it) {
    Matrix next = riccati_step(p);
    const double change = (next - p).cwiseAbs().maxCoeff();
    p = std::move(next);
    if (change < 1e-12) break;
  }

  RiccatiSolution sol;
  sol.cost_to_go = p;
  sol.recurrence_residual = (riccati_step(p) - p).cwiseAbs().maxCoeff();
  sol.gain = (r + b.transpose() * p * b).ldlt().solve(b.transpose() * p * a);
  sol.policy = LinearPolicy<double>(-sol.gain);
  sol.normalizer = ObservationNormalizer<double>(spec.state_dim);

  double total = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    Rng rng = rng_new(seed, {stream::kEvaluation, static_cast<std::uint64_t>(ep)});
    total += rollout(spec, sol.policy, sol.normalizer, RewardSource::environment(), rng, false).env_return;
  }
  sol.optimal_return = episodes > 0 ? total / episodes : 0.0;
  return sol;
}

}  // namespace ailsrs
