/*
 * Copyright 2026 The privrec Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Training of the modality weights.
//
// The objective is the mean binary log-loss of sigmoid(u_i . v_j) against the
// engagement label of every interaction, where v_j is the fused vector under
// the weights being trained and u_i is the user's interest vector computed
// once at the initial weights and then held fixed. Because v_j is linear in
// the weights, each interaction reduces to three projections
// (u_i . visual_j, u_i . text_j, u_i . audio_j) and the loss is a logistic
// regression over the weights. Weights are parameterized as softmax(theta),
// which keeps every iterate on the simplex.

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "privrec/errors.hpp"
#include "privrec/feature_store.hpp"
#include "privrec/fusion.hpp"
#include "privrec/scoring.hpp"

namespace privrec {

struct TrainingConfig {
  double step_size = 0.1;
  int steps = 200;
  double half_life = std::numeric_limits<double>::infinity();
};

class WeightTrainingProblem {
 public:
  WeightTrainingProblem(const Catalog& catalog, const FusionWeights& initial,
                        double half_life = std::numeric_limits<double>::infinity()) {
    FusedCatalog fused(catalog, initial);
    std::vector<Vector> users;
    users.reserve(catalog.users().size());
    for (const auto& id : catalog.users()) users.push_back(build_user_vector(id, fused, half_life).values);

    bool any_pos = false;
    bool any_neg = false;
    for (const auto& ev : catalog.interactions()) {
      const auto u = catalog.find_user(ev.user_id);
      const auto v = catalog.find_video(ev.video_id);
      if (!u || !v) continue;
      const auto& video = catalog.videos()[*v];
      const Vector& uv = users[*u];
      Row row;
      row.projection = {dot(uv, video.visual), dot(uv, video.text), dot(uv, video.audio)};
      row.label = ev.positive() ? 1.0 : 0.0;
      any_pos |= ev.positive();
      any_neg |= !ev.positive();
      rows_.push_back(row);
    }
    if (!any_pos || !any_neg) {
      throw DataError("weight training needs at least one positive and one negative interaction");
    }
  }

  std::size_t size() const noexcept { return rows_.size(); }

  double loss(const std::array<double, 3>& w) const {
    double total = 0.0;
    for (const auto& r : rows_) {
      const double z = w[0] * r.projection[0] + w[1] * r.projection[1] + w[2] * r.projection[2];
      // log(1 + e^z) - y z, evaluated without overflow
      const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
      total += softplus - r.label * z;
    }
    return total / static_cast<double>(rows_.size());
  }

  double loss(const FusionWeights& w) const { return loss(w.as_array()); }

  /// Gradient of the loss with respect to (alpha, beta, gamma).
  std::array<double, 3> gradient(const std::array<double, 3>& w) const {
    std::array<double, 3> g{0.0, 0.0, 0.0};
    for (const auto& r : rows_) {
      const double z = w[0] * r.projection[0] + w[1] * r.projection[1] + w[2] * r.projection[2];
      const double residual = sigmoid(z) - r.label;
      for (int k = 0; k < 3; ++k) g[k] += residual * r.projection[k];
    }
    for (double& x : g) x /= static_cast<double>(rows_.size());
    return g;
  }

 private:
  struct Row {
    std::array<double, 3> projection;
    double label;
  };
  std::vector<Row> rows_;
};

namespace detail {

inline std::array<double, 3> softmax(const std::array<double, 3>& theta) {
  const double m = std::max({theta[0], theta[1], theta[2]});
  std::array<double, 3> w{};
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    w[k] = std::exp(theta[k] - m);
    total += w[k];
  }
  for (double& x : w) x /= total;
  return w;
}

}  // namespace detail

/// Full-batch gradient descent on the softmax parameters. Returns the iterate
/// with the lowest training loss seen, which is `initial` itself when no step
/// improves on it (and always when `config.steps == 0`).
inline FusionWeights train_weights(const Catalog& catalog, const FusionWeights& initial,
                                   const TrainingConfig& config = {}) {
  if (config.steps < 0) throw UsageError("training steps must be non-negative");
  if (!(config.step_size > 0.0)) throw UsageError("training step size must be positive");
  if (config.steps == 0) return initial;

  const WeightTrainingProblem problem(catalog, initial, config.half_life);
  FusionWeights best = initial;
  double best_loss = problem.loss(initial);
  if (!std::isfinite(best_loss)) throw DataError("weight training loss is not finite");

  std::array<double, 3> theta{};
  for (int k = 0; k < 3; ++k) theta[k] = std::log(std::max(initial.as_array()[k], 1e-300));

  for (int step = 0; step < config.steps; ++step) {
    const auto w = detail::softmax(theta);
    const auto g = problem.gradient(w);
    const double mean_g = w[0] * g[0] + w[1] * g[1] + w[2] * g[2];
    for (int k = 0; k < 3; ++k) theta[k] -= config.step_size * w[k] * (g[k] - mean_g);

    const auto next = detail::softmax(theta);
    const double l = problem.loss(next);
    if (!std::isfinite(l)) throw DataError("weight training loss is not finite");
    if (l < best_loss) {
      best_loss = l;
      // Renormalize so the strict simplex check holds after rounding.
      const double total = next[0] + next[1] + next[2];
      best = FusionWeights(next[0] / total, next[1] / total, next[2] / total);
    }
  }
  return best;
}

}  // namespace privrec
