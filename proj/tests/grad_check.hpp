#pragma once

#include "ailsrs/discriminator.hpp"

#include <algorithm>
#include <cmath>

namespace ailsrs::testing {

// Central differences of lsgan_loss in every parameter. A single-parameter
// perturbation only changes one hidden unit (or the logit), so each probe
// recomputes just the affected part of the forward pass.
class LsganFiniteDiff {
 public:
  LsganFiniteDiff(const MlpDiscriminator<double>& disc, const Matrix& expert, const Matrix& sampled)
      : disc_(disc), expert_(cache(expert)), sampled_(cache(sampled)) {}

  Vector gradient(double eps) const {
    Vector g(disc_.parameter_count());
    Eigen::Index k = 0;
    const Eigen::Index n = disc_.input_dim();
    const Eigen::Index h = disc_.hidden();
    for (Eigen::Index i = 0; i < h; ++i)
      for (Eigen::Index j = 0; j < n; ++j) g[k++] = central(eps, [&](double d) { return layer1(i, j, d); });
    for (Eigen::Index i = 0; i < h; ++i) g[k++] = central(eps, [&](double d) { return layer1(i, -1, d); });
    for (Eigen::Index i = 0; i < h; ++i)
      for (Eigen::Index j = 0; j < h; ++j) g[k++] = central(eps, [&](double d) { return layer2(i, j, d); });
    for (Eigen::Index i = 0; i < h; ++i) g[k++] = central(eps, [&](double d) { return layer2(i, -1, d); });
    for (Eigen::Index i = 0; i < h; ++i) g[k++] = central(eps, [&](double d) { return layer3(i, d); });
    g[k++] = central(eps, [&](double d) { return layer3(-1, d); });
    return g;
  }

 private:
  struct Cached {
    Matrix inputs;
    Matrix pre1, h1, pre2, h2;
    Vector logits;
    double target = 0.0;
  };

  Cached cache(const Matrix& inputs) const {
    Cached c;
    c.inputs = inputs;
    c.pre1 = (inputs * disc_.w1.transpose()).rowwise() + disc_.b1.transpose();
    c.h1 = c.pre1.array().tanh();
    c.pre2 = (c.h1 * disc_.w2.transpose()).rowwise() + disc_.b2.transpose();
    c.h2 = c.pre2.array().tanh();
    c.logits = (c.h2 * disc_.w3).array() + disc_.b3;
    return c;
  }

  template <typename F>
  static double central(double eps, F f) {
    return (f(eps) - f(-eps)) / (2.0 * eps);
  }

  static double term(const Vector& logits, double target) {
    double sum = 0.0;
    for (Eigen::Index r = 0; r < logits.size(); ++r) {
      const double d = sigmoid(logits[r]);
      sum += (d - target) * (d - target);
    }
    return 0.5 * sum / static_cast<double>(logits.size());
  }

  double loss(const Vector& expert_logits, const Vector& sampled_logits) const {
    return term(expert_logits, 1.0) + term(sampled_logits, 0.0);
  }

  // Logits after adding `delta` to w1(i, j) (j < 0: b1(i)).
  Vector logits_layer1(const Cached& c, Eigen::Index i, Eigen::Index j, double delta) const {
    Vector logits = c.logits;
    for (Eigen::Index r = 0; r < c.inputs.rows(); ++r) {
      const double shift = j < 0 ? delta : delta * c.inputs(r, j);
      const double dh1 = std::tanh(c.pre1(r, i) + shift) - c.h1(r, i);
      double z = disc_.b3;
      for (Eigen::Index u = 0; u < disc_.hidden(); ++u) z += disc_.w3[u] * std::tanh(c.pre2(r, u) + disc_.w2(u, i) * dh1);
      logits[r] = z;
    }
    return logits;
  }

  Vector logits_layer2(const Cached& c, Eigen::Index i, Eigen::Index j, double delta) const {
    Vector logits = c.logits;
    for (Eigen::Index r = 0; r < c.h1.rows(); ++r) {
      const double shift = j < 0 ? delta : delta * c.h1(r, j);
      logits[r] += disc_.w3[i] * (std::tanh(c.pre2(r, i) + shift) - c.h2(r, i));
    }
    return logits;
  }

  Vector logits_layer3(const Cached& c, Eigen::Index i, double delta) const {
    Vector logits = c.logits;
    for (Eigen::Index r = 0; r < c.h2.rows(); ++r) logits[r] += i < 0 ? delta : delta * c.h2(r, i);
    return logits;
  }

  double layer1(Eigen::Index i, Eigen::Index j, double d) const {
    return loss(logits_layer1(expert_, i, j, d), logits_layer1(sampled_, i, j, d));
  }
  double layer2(Eigen::Index i, Eigen::Index j, double d) const {
    return loss(logits_layer2(expert_, i, j, d), logits_layer2(sampled_, i, j, d));
  }
  double layer3(Eigen::Index i, double d) const {
    return loss(logits_layer3(expert_, i, d), logits_layer3(sampled_, i, d));
  }

  const MlpDiscriminator<double>& disc_;
  Cached expert_;
  Cached sampled_;
};

// Largest |a - b| / max(|a|, |b|, floor) over entries.
inline double max_relative_error(const Vector& a, const Vector& b, double floor) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace ailsrs::testing
