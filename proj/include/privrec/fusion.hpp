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

#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "privrec/errors.hpp"
#include "privrec/feature_store.hpp"
#include "privrec/linalg.hpp"

namespace privrec {

/// Modality weights (visual, text, audio) on the probability simplex.
class FusionWeights {
 public:
  static constexpr double kSimplexTolerance = 1e-9;

  FusionWeights() = default;

  FusionWeights(double alpha, double beta, double gamma) : w_{alpha, beta, gamma} {
    for (double x : w_) {
      if (!std::isfinite(x) || x < 0.0) {
        throw UsageError("fusion weights must be finite and non-negative");
      }
    }
    if (std::abs(alpha + beta + gamma - 1.0) > kSimplexTolerance) {
      throw UsageError("fusion weights must sum to 1");
    }
  }

  static FusionWeights uniform() { return FusionWeights(); }

  double alpha() const noexcept { return w_[0]; }
  double beta() const noexcept { return w_[1]; }
  double gamma() const noexcept { return w_[2]; }
  const std::array<double, 3>& as_array() const noexcept { return w_; }

  bool operator==(const FusionWeights&) const = default;

 private:
  std::array<double, 3> w_{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
};

inline void to_json(nlohmann::json& j, const FusionWeights& w) {
  j = nlohmann::json{{"alpha", w.alpha()}, {"beta", w.beta()}, {"gamma", w.gamma()}};
}

inline void from_json(const nlohmann::json& j, FusionWeights& w) {
  w = FusionWeights(j.at("alpha").get<double>(), j.at("beta").get<double>(),
                    j.at("gamma").get<double>());
}

struct FusedVector {
  std::string video_id;
  Vector values;
};

/// values[i] = alpha * visual[i] + beta * text[i] + gamma * audio[i]
inline FusedVector fuse(const FusionWeights& weights, const ModalFeatureSet& features) {
  if (features.text.size() != features.visual.size() ||
      features.audio.size() != features.visual.size()) {
    throw DataError("video '" + features.video_id + "': modal dimension mismatch");
  }
  FusedVector out{features.video_id, Vector(features.visual.size())};
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = weights.alpha() * features.visual[i] + weights.beta() * features.text[i] +
                    weights.gamma() * features.audio[i];
  }
  return out;
}

/// Fused vectors for every video, index-aligned with `catalog.videos()`.
class FusedCatalog {
 public:
  FusedCatalog(const Catalog& catalog, const FusionWeights& weights)
      : catalog_(&catalog), weights_(weights) {
    vectors_.reserve(catalog.videos().size());
    for (const auto& v : catalog.videos()) vectors_.push_back(fuse(weights, v));
  }

  const Catalog& catalog() const noexcept { return *catalog_; }
  const FusionWeights& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  const FusedVector& operator[](std::size_t i) const { return vectors_[i]; }
  const std::vector<FusedVector>& vectors() const noexcept { return vectors_; }

  const FusedVector& at(const std::string& video_id) const {
    auto idx = catalog_->find_video(video_id);
    if (!idx) throw DataError("unknown video '" + video_id + "'");
    return vectors_[*idx];
  }

 private:
  const Catalog* catalog_;
  FusionWeights weights_;
  std::vector<FusedVector> vectors_;
};

}  // namespace privrec
