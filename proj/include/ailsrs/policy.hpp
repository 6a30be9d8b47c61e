#pragma once

#include "ailsrs/numerics.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ailsrs {

inline constexpr double kVarianceFloor = 1e-8;

/// Deterministic linear policy a = theta * z, theta is (action_dim x state_dim).
template <typename Scalar>
struct LinearPolicy {
  MatrixX<Scalar> theta;

  LinearPolicy() = default;
  explicit LinearPolicy(MatrixX<Scalar> t) : theta(std::move(t)) {}
  static LinearPolicy zeros(Eigen::Index action_dim, Eigen::Index state_dim) {
    return LinearPolicy(MatrixX<Scalar>::Zero(action_dim, state_dim));
  }

  Eigen::Index action_dim() const { return theta.rows(); }
  Eigen::Index state_dim() const { return theta.cols(); }
};

/// Running mean / diagonal variance of visited states.
///
/// Centered mode whitens as (s - mu) / sd. Uncentered mode divides by sd
/// only; it keeps the origin a fixed point of every linear policy, whereas
/// centering makes s = mu one.
template <typename Scalar>
struct ObservationNormalizer {
  RunningStats<Scalar> stats;
  bool centered = true;

  ObservationNormalizer() = default;
  explicit ObservationNormalizer(Eigen::Index state_dim, bool center = true) : stats(state_dim), centered(center) {}

  Eigen::Index dim() const { return stats.dim(); }
  std::int64_t count() const { return stats.count; }

  // Identity until at least two observations have been folded in.
  template <typename Derived>
  VectorX<Scalar> whiten(const Eigen::MatrixBase<Derived>& s) const {
    if (s.size() != dim()) throw DimensionError("normalizer: state dimension mismatch");
    if (stats.count < 2) return s;
    const VectorX<Scalar> sd = stats.variance().cwiseMax(Scalar(kVarianceFloor)).cwiseSqrt();
    if (!centered) return s.cwiseQuotient(sd);
    return (s - stats.mean).cwiseQuotient(sd);
  }

  // Rows of `states` whitened.
  MatrixX<Scalar> whiten_rows(const MatrixX<Scalar>& states) const {
    if (states.cols() != dim()) throw DimensionError("normalizer: state dimension mismatch");
    if (stats.count < 2) return states;
    const VectorX<Scalar> sd = stats.variance().cwiseMax(Scalar(kVarianceFloor)).cwiseSqrt();
    if (!centered) return states.array().rowwise() / sd.transpose().array();
    return (states.rowwise() - stats.mean.transpose()).array().rowwise() / sd.transpose().array();
  }

  template <typename Derived>
  void observe(const Eigen::MatrixBase<Derived>& s) {
    welford_update(stats, s);
  }
};

template <typename Scalar, typename Derived>
VectorX<Scalar> act(const LinearPolicy<Scalar>& policy, const ObservationNormalizer<Scalar>& normalizer,
                    const Eigen::MatrixBase<Derived>& state) {
  if (state.size() != policy.state_dim() || normalizer.dim() != policy.state_dim())
    throw DimensionError("act: state dimension does not match policy");
  return policy.theta * normalizer.whiten(state);
}

/// theta + sign * nu * delta; the input policy is left untouched.
template <typename Scalar>
LinearPolicy<Scalar> perturb(const LinearPolicy<Scalar>& policy, const MatrixX<Scalar>& delta, Scalar nu,
                             int sign) {
  if (delta.rows() != policy.theta.rows() || delta.cols() != policy.theta.cols())
    throw DimensionError("perturb: delta shape differs from theta");
  if (!(nu > Scalar(0))) throw std::invalid_argument("perturb: nu must be > 0");
  if (sign != 1 && sign != -1) throw std::invalid_argument("perturb: sign must be +1 or -1");
  return LinearPolicy<Scalar>(policy.theta + Scalar(sign) * nu * delta);
}

// ---------------------------------------------------------------------------
// Behavior cloning

/// Paired expert states (rows, n columns) and actions (rows, p columns).
template <typename Scalar>
struct BcDataset {
  MatrixX<Scalar> states;
  MatrixX<Scalar> actions;

  Eigen::Index size() const { return states.rows(); }
};

template <typename Scalar>
void validate(const BcDataset<Scalar>& data, const ObservationNormalizer<Scalar>& normalizer) {
  if (data.size() == 0) throw std::invalid_argument("behavior cloning: dataset is empty");
  if (data.actions.rows() != data.states.rows())
    throw DimensionError("behavior cloning: states and actions have different lengths");
  if (normalizer.dim() != data.states.cols())
    throw DimensionError("behavior cloning: normalizer dimension differs from state dimension");
}

template <typename Scalar>
Scalar bc_loss(const MatrixX<Scalar>& theta, const MatrixX<Scalar>& whitened, const MatrixX<Scalar>& actions) {
  return (whitened * theta.transpose() - actions).squaredNorm() / static_cast<Scalar>(whitened.rows());
}

struct BcFitOptions {
  int epochs = 2000;
  double lr = 0.01;
  // 0 means full batch.
  Eigen::Index batch_size = 0;
};

template <typename Scalar>
struct BcFitResult {
  LinearPolicy<Scalar> policy;
  // Full-dataset loss after each epoch.
  std::vector<Scalar> loss_history;
};

/// Mean squared error regression of actions on whitened states, optimized with Adam.
template <typename Scalar>
BcFitResult<Scalar> bc_fit(const BcDataset<Scalar>& data, const ObservationNormalizer<Scalar>& normalizer,
                           const BcFitOptions& options, Rng& rng) {
  validate(data, normalizer);
  if (options.epochs < 0) throw std::invalid_argument("bc_fit: epochs must be >= 0");
  const MatrixX<Scalar> z = normalizer.whiten_rows(data.states);
  const Eigen::Index rows = z.rows();
  const Eigen::Index batch = (options.batch_size <= 0 || options.batch_size >= rows) ? rows : options.batch_size;

  BcFitResult<Scalar> result{LinearPolicy<Scalar>::zeros(data.actions.cols(), data.states.cols()), {}};
  MatrixX<Scalar>& theta = result.policy.theta;
  AdamState<Scalar> adam(theta.size());
  const Scalar lr = static_cast<Scalar>(options.lr);

  auto gradient = [&](const MatrixX<Scalar>& zb, const MatrixX<Scalar>& yb) -> MatrixX<Scalar> {
    const MatrixX<Scalar> residual = zb * theta.transpose() - yb;
    return (Scalar(2) / static_cast<Scalar>(zb.rows())) * residual.transpose() * zb;
  };

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    if (batch == rows) {
      adam_step(adam, theta, gradient(z, data.actions), lr);
    } else {
      std::vector<Eigen::Index> order(static_cast<std::size_t>(rows));
      for (Eigen::Index i = 0; i < rows; ++i) order[static_cast<std::size_t>(i)] = i;
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
      for (Eigen::Index start = 0; start < rows; start += batch) {
        const Eigen::Index len = std::min(batch, rows - start);
        MatrixX<Scalar> zb(len, z.cols());
        MatrixX<Scalar> yb(len, data.actions.cols());
        for (Eigen::Index k = 0; k < len; ++k) {
          zb.row(k) = z.row(order[static_cast<std::size_t>(start + k)]);
          yb.row(k) = data.actions.row(order[static_cast<std::size_t>(start + k)]);
        }
        adam_step(adam, theta, gradient(zb, yb), lr);
      }
    }
    result.loss_history.push_back(bc_loss(theta, z, data.actions));
  }
  return result;
}

/// Ridge least squares: theta^T solves (Z^T Z + ridge I) A = Z^T Y.
template <typename Scalar>
LinearPolicy<Scalar> bc_closed_form(const BcDataset<Scalar>& data, const ObservationNormalizer<Scalar>& normalizer,
                                    Scalar ridge) {
  validate(data, normalizer);
  if (ridge < Scalar(0)) throw std::invalid_argument("bc_closed_form: ridge must be >= 0");
  const MatrixX<Scalar> z = normalizer.whiten_rows(data.states);
  const Eigen::Index n = z.cols();
  const MatrixX<Scalar> gram = z.transpose() * z + ridge * MatrixX<Scalar>::Identity(n, n);
  const Eigen::PartialPivLU<MatrixX<Scalar>> lu(gram);
  if (!(lu.rcond() > Scalar(1e-13)))
    throw std::runtime_error("bc_closed_form: normal equations are singular; use ridge > 0");
  const MatrixX<Scalar> solution = lu.solve(z.transpose() * data.actions);
  return LinearPolicy<Scalar>(solution.transpose());
}

}  // namespace ailsrs
