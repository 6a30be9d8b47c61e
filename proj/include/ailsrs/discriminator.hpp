#pragma once

#include "ailsrs/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ailsrs {

inline constexpr Eigen::Index kDiscHidden = 100;
inline constexpr double kDiscLearningRate = 0.00025;
inline constexpr double kRewardClamp = 1e-6;

/// D(s, a) = sigmoid(w3 . tanh(W2 tanh(W1 [s; a] + b1) + b2) + b3).
///
/// The same layout doubles as the container for gradients of the loss.
template <typename Scalar>
struct MlpDiscriminator {
  MatrixX<Scalar> w1;  // hidden x input
  VectorX<Scalar> b1;
  MatrixX<Scalar> w2;  // hidden x hidden
  VectorX<Scalar> b2;
  VectorX<Scalar> w3;  // hidden (single output row)
  Scalar b3 = Scalar(0);

  static MlpDiscriminator zeros(Eigen::Index input_dim, Eigen::Index hidden = kDiscHidden) {
    MlpDiscriminator d;
    d.w1 = MatrixX<Scalar>::Zero(hidden, input_dim);
    d.b1 = VectorX<Scalar>::Zero(hidden);
    d.w2 = MatrixX<Scalar>::Zero(hidden, hidden);
    d.b2 = VectorX<Scalar>::Zero(hidden);
    d.w3 = VectorX<Scalar>::Zero(hidden);
    d.b3 = Scalar(0);
    return d;
  }

  Eigen::Index input_dim() const { return w1.cols(); }
  Eigen::Index hidden() const { return w1.rows(); }
  Eigen::Index parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + 1; }

  // Flat order follows storage: w1 (row-major), b1, w2 (row-major), b2, w3, b3.
  VectorX<Scalar> to_vector() const {
    VectorX<Scalar> flat(parameter_count());
    Eigen::Index k = 0;
    auto put = [&](const auto& block) {
      flat.segment(k, block.size()) = Eigen::Map<const VectorX<Scalar>>(block.data(), block.size());
      k += block.size();
    };
    put(w1);
    put(b1);
    put(w2);
    put(b2);
    put(w3);
    flat[k] = b3;
    return flat;
  }

  void assign(const VectorX<Scalar>& flat) {
    if (flat.size() != parameter_count()) throw DimensionError("discriminator: flat parameter length mismatch");
    Eigen::Index k = 0;
    auto take = [&](auto& block) {
      Eigen::Map<VectorX<Scalar>>(block.data(), block.size()) = flat.segment(k, block.size());
      k += block.size();
    };
    take(w1);
    take(b1);
    take(w2);
    take(b2);
    take(w3);
    b3 = flat[k];
  }
};

/// Glorot-uniform weights, zero biases.
template <typename Scalar>
MlpDiscriminator<Scalar> disc_init(Eigen::Index state_dim, Eigen::Index action_dim, Rng& rng,
                                   Eigen::Index hidden = kDiscHidden) {
  if (state_dim < 1 || action_dim < 1) throw DimensionError("disc_init: state and action dims must be >= 1");
  auto d = MlpDiscriminator<Scalar>::zeros(state_dim + action_dim, hidden);
  auto fill = [&rng](auto& w) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = static_cast<Scalar>(rng.uniform(-bound, bound));
  };
  fill(d.w1);
  fill(d.w2);
  // w3 is a 1 x hidden layer.
  const double bound3 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  for (Eigen::Index k = 0; k < hidden; ++k) d.w3[k] = static_cast<Scalar>(rng.uniform(-bound3, bound3));
  return d;
}

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  // Split on sign so exp never overflows.
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

/// Activations for a batch of inputs (one per row).
template <typename Scalar>
struct DiscActivations {
  MatrixX<Scalar> h1;  // batch x hidden
  MatrixX<Scalar> h2;  // batch x hidden
  VectorX<Scalar> out;  // batch, in (0, 1)
};

template <typename Scalar>
DiscActivations<Scalar> forward_batch(const MlpDiscriminator<Scalar>& disc, const MatrixX<Scalar>& inputs) {
  if (inputs.cols() != disc.input_dim()) throw DimensionError("discriminator: input dimension mismatch");
  DiscActivations<Scalar> act;
  act.h1 = ((inputs * disc.w1.transpose()).rowwise() + disc.b1.transpose()).array().tanh();
  act.h2 = ((act.h1 * disc.w2.transpose()).rowwise() + disc.b2.transpose()).array().tanh();
  const VectorX<Scalar> logits = (act.h2 * disc.w3).array() + disc.b3;
  act.out = logits.unaryExpr([](Scalar z) { return sigmoid(z); });
  return act;
}

template <typename Scalar, typename StateDerived, typename ActionDerived>
Scalar forward(const MlpDiscriminator<Scalar>& disc, const Eigen::MatrixBase<StateDerived>& state,
               const Eigen::MatrixBase<ActionDerived>& action) {
  if (state.size() + action.size() != disc.input_dim())
    throw DimensionError("discriminator: state + action dimension mismatch");
  VectorX<Scalar> x(disc.input_dim());
  x << state, action;
  const VectorX<Scalar> h1 = (disc.w1 * x + disc.b1).array().tanh();
  const VectorX<Scalar> h2 = (disc.w2 * h1 + disc.b2).array().tanh();
  return sigmoid(disc.w3.dot(h2) + disc.b3);
}

// ---------------------------------------------------------------------------
// Least-squares loss with expert target 1 and policy target 0.

template <typename Scalar>
void check_batches(const MatrixX<Scalar>& expert, const MatrixX<Scalar>& sampled) {
  if (expert.rows() == 0 || sampled.rows() == 0)
    throw std::invalid_argument("lsgan: expert and sampled batches must be nonempty");
}

template <typename Scalar>
Scalar lsgan_loss_from_outputs(const VectorX<Scalar>& expert_out, const VectorX<Scalar>& sampled_out) {
  const Scalar expert_term = (expert_out.array() - Scalar(1)).square().mean();
  const Scalar sampled_term = sampled_out.array().square().mean();
  return Scalar(0.5) * expert_term + Scalar(0.5) * sampled_term;
}

template <typename Scalar>
Scalar lsgan_loss(const MlpDiscriminator<Scalar>& disc, const MatrixX<Scalar>& expert,
                  const MatrixX<Scalar>& sampled) {
  check_batches(expert, sampled);
  return lsgan_loss_from_outputs<Scalar>(forward_batch(disc, expert).out, forward_batch(disc, sampled).out);
}

namespace detail {

// Accumulates the gradient of 0.5 * mean((D - target)^2) over `inputs` into `grad`.
template <typename Scalar>
void accumulate_lsgan_grad(const MlpDiscriminator<Scalar>& disc, const MatrixX<Scalar>& inputs, Scalar target,
                           MlpDiscriminator<Scalar>& grad) {
  const DiscActivations<Scalar> act = forward_batch(disc, inputs);
  const Scalar scale = Scalar(1) / static_cast<Scalar>(inputs.rows());
  const VectorX<Scalar> d_logit =
      (scale * (act.out.array() - target) * act.out.array() * (Scalar(1) - act.out.array())).matrix();
  grad.w3 += act.h2.transpose() * d_logit;
  grad.b3 += d_logit.sum();
  const MatrixX<Scalar> d_pre2 = ((d_logit * disc.w3.transpose()).array() * (Scalar(1) - act.h2.array().square())).matrix();
  grad.w2 += d_pre2.transpose() * act.h1;
  grad.b2 += d_pre2.colwise().sum().transpose();
  const MatrixX<Scalar> d_pre1 = ((d_pre2 * disc.w2).array() * (Scalar(1) - act.h1.array().square())).matrix();
  grad.w1 += d_pre1.transpose() * inputs;
  grad.b1 += d_pre1.colwise().sum().transpose();
}

}  // namespace detail

/// Exact gradient of lsgan_loss by backpropagation.
template <typename Scalar>
MlpDiscriminator<Scalar> lsgan_grad(const MlpDiscriminator<Scalar>& disc, const MatrixX<Scalar>& expert,
                                    const MatrixX<Scalar>& sampled) {
  check_batches(expert, sampled);
  auto grad = MlpDiscriminator<Scalar>::zeros(disc.input_dim(), disc.hidden());
  detail::accumulate_lsgan_grad(disc, expert, Scalar(1), grad);
  detail::accumulate_lsgan_grad(disc, sampled, Scalar(0), grad);
  return grad;
}

// ---------------------------------------------------------------------------
// Training

struct DiscTrainOptions {
  int iters = 3;
  Eigen::Index batch_size = 1;
  double lr = kDiscLearningRate;
};

/// Adam on the least-squares loss, each step drawing `batch_size` rows with
/// replacement from both pools. Returns the mean pre-step batch loss; with
/// zero iterations, the loss of one drawn batch without updating.
template <typename Scalar>
Scalar disc_train(MlpDiscriminator<Scalar>& disc, AdamState<Scalar>& adam, const MatrixX<Scalar>& expert_pool,
                  const MatrixX<Scalar>& sampled_pool, const DiscTrainOptions& options, Rng& rng) {
  if (expert_pool.rows() == 0 || sampled_pool.rows() == 0)
    throw std::invalid_argument("disc_train: expert and sampled pools must be nonempty");
  if (options.batch_size < 1) throw std::invalid_argument("disc_train: batch_size must be >= 1");
  if (adam.m.size() == 0) adam = AdamState<Scalar>(disc.parameter_count());

  auto draw = [&rng, &options](const MatrixX<Scalar>& pool) {
    MatrixX<Scalar> batch(options.batch_size, pool.cols());
    for (Eigen::Index k = 0; k < options.batch_size; ++k)
      batch.row(k) = pool.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(pool.rows()))));
    return batch;
  };

  if (options.iters <= 0) {
    const MatrixX<Scalar> expert = draw(expert_pool);
    const MatrixX<Scalar> sampled = draw(sampled_pool);
    return lsgan_loss(disc, expert, sampled);
  }

  Scalar total = Scalar(0);
  for (int it = 0; it < options.iters; ++it) {
    const MatrixX<Scalar> expert = draw(expert_pool);
    const MatrixX<Scalar> sampled = draw(sampled_pool);
    total += lsgan_loss(disc, expert, sampled);
    VectorX<Scalar> params = disc.to_vector();
    adam_step(adam, params, lsgan_grad(disc, expert, sampled).to_vector(), static_cast<Scalar>(options.lr));
    disc.assign(params);
  }
  return total / static_cast<Scalar>(options.iters);
}

// ---------------------------------------------------------------------------
// Reward

/// -log(1 - D) with D clamped at 1 - 1e-6, so the value stays in [0, ~13.8155].
template <typename Scalar>
Scalar disc_reward_from_output(Scalar d) {
  return -std::log1p(-std::min(d, Scalar(1) - Scalar(kRewardClamp)));
}

template <typename Scalar, typename StateDerived, typename ActionDerived>
Scalar disc_reward(const MlpDiscriminator<Scalar>& disc, const Eigen::MatrixBase<StateDerived>& state,
                   const Eigen::MatrixBase<ActionDerived>& action) {
  return disc_reward_from_output(forward(disc, state, action));
}

}  // namespace ailsrs
