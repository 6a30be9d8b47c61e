#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace ailsrs {

// Dense row-major matrix; all policy parameters and perturbations live here.
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.allFinite();
}

// ---------------------------------------------------------------------------
// splitmix64 stream with label-derived substreams.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  Rng(std::uint64_t seed, std::span<const std::uint64_t> labels) : state_(splitmix64_mix(seed)) {
    for (std::uint64_t label : labels) state_ = splitmix64_mix(state_ ^ splitmix64_mix(label + kGolden));
  }
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> labels = {})
      : Rng(seed, std::span<const std::uint64_t>(labels.begin(), labels.size())) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return splitmix64_mix(state_);
  }

  // Uniform on (0, 1].
  double uniform_open_closed() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // Uniform on [lo, hi].
  double uniform(double lo, double hi) { return lo + (hi - lo) * (uniform_open_closed()); }

  // Box-Muller; the second variate of each pair is cached.
  double gaussian() {
    if (cached_) {
      double z = *cached_;
      cached_.reset();
      return z;
    }
    const double u1 = uniform_open_closed();
    const double u2 = uniform_open_closed();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(angle);
    return r * std::cos(angle);
  }

  // Uniform index in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

 private:
  std::uint64_t state_;
  std::optional<double> cached_;
};

inline Rng rng_new(std::uint64_t seed, std::span<const std::uint64_t> labels) { return Rng(seed, labels); }
inline Rng rng_new(std::uint64_t seed, std::initializer_list<std::uint64_t> labels = {}) {
  return Rng(seed, labels);
}

template <typename Scalar = double>
MatrixX<Scalar> gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 1 || cols < 1) throw DimensionError("gaussian_matrix: rows and cols must be >= 1");
  MatrixX<Scalar> m(rows, cols);
  // RowMajor storage, so data() order is the row-major fill order.
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<Scalar>(rng.gaussian());
  return m;
}

// ---------------------------------------------------------------------------
// Adam

template <typename Scalar>
struct AdamState {
  std::int64_t step = 0;
  VectorX<Scalar> m;
  VectorX<Scalar> v;
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar eps = Scalar(1e-8);

  AdamState() = default;
  explicit AdamState(Eigen::Index n) : m(VectorX<Scalar>::Zero(n)), v(VectorX<Scalar>::Zero(n)) {}
};

/// Bias-corrected Adam step, in place on `params`.
template <typename Scalar, typename ParamDerived, typename GradDerived>
void adam_step(AdamState<Scalar>& state, Eigen::MatrixBase<ParamDerived>& params,
               const Eigen::MatrixBase<GradDerived>& grads, Scalar lr) {
  const Eigen::Index n = params.size();
  if (grads.size() != n || state.m.size() != n || state.v.size() != n)
    throw DimensionError("adam_step: params, grads and moments must have equal length");
  if (!(lr > Scalar(0))) throw std::invalid_argument("adam_step: lr must be > 0");
  ++state.step;
  state.m = state.beta1 * state.m + (Scalar(1) - state.beta1) * grads.derived().reshaped();
  state.v = state.beta2 * state.v + (Scalar(1) - state.beta2) * grads.derived().reshaped().cwiseAbs2();
  const Scalar bc1 = Scalar(1) - std::pow(state.beta1, Scalar(state.step));
  const Scalar bc2 = Scalar(1) - std::pow(state.beta2, Scalar(state.step));
  auto flat = params.derived().reshaped();
  flat.array() -= lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + state.eps);
}

// ---------------------------------------------------------------------------
// Welford running statistics (population variance).

template <typename Scalar>
struct RunningStats {
  std::int64_t count = 0;
  VectorX<Scalar> mean;
  VectorX<Scalar> m2;

  RunningStats() = default;
  explicit RunningStats(Eigen::Index dim) : mean(VectorX<Scalar>::Zero(dim)), m2(VectorX<Scalar>::Zero(dim)) {}

  Eigen::Index dim() const { return mean.size(); }

  VectorX<Scalar> variance() const {
    if (count == 0) return VectorX<Scalar>::Zero(dim());
    return m2 / static_cast<Scalar>(count);
  }
};

template <typename Scalar, typename Derived>
void welford_update(RunningStats<Scalar>& stats, const Eigen::MatrixBase<Derived>& x) {
  if (stats.count == 0 && stats.dim() == 0) {
    stats.mean = VectorX<Scalar>::Zero(x.size());
    stats.m2 = VectorX<Scalar>::Zero(x.size());
  }
  if (x.size() != stats.dim()) throw DimensionError("welford_update: dimension mismatch");
  ++stats.count;
  const VectorX<Scalar> delta = x - stats.mean;
  stats.mean += delta / static_cast<Scalar>(stats.count);
  stats.m2 += delta.cwiseProduct(x - stats.mean);
}

// ---------------------------------------------------------------------------
// Central finite differences, test oracle for hand-derived gradients.

template <typename Scalar>
VectorX<Scalar> finite_diff(const std::function<Scalar(const VectorX<Scalar>&)>& f, const VectorX<Scalar>& x,
                            Scalar eps) {
  if (!(eps > Scalar(0))) throw std::invalid_argument("finite_diff: eps must be > 0");
  VectorX<Scalar> g(x.size());
  VectorX<Scalar> probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + eps;
    const Scalar up = f(probe);
    probe[i] = x[i] - eps;
    const Scalar down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (Scalar(2) * eps);
  }
  return g;
}

}  // namespace ailsrs
