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

// Laplace mechanism on match scores, the importance-weighted variant, and
// privacy budget accounting.
//
// Uniform mechanism:   s' = s + Laplace(sensitivity / epsilon)
// Adaptive mechanism:  s' = s + Laplace(sensitivity / (epsilon * omega))
// where omega is the score-gradient magnitude of the (user, video) pair
// normalized by the largest one over the candidate set, floored at
// `omega_floor` so the noise scale stays bounded.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "privrec/errors.hpp"
#include "privrec/linalg.hpp"
#include "privrec/rng.hpp"
#include "privrec/scoring.hpp"

namespace privrec {

struct NoiseConfig {
  double sensitivity = 1.0;
  double epsilon = 1.0;
  double omega_floor = 0.01;

  void validate() const {
    if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
      throw UsageError("noise sensitivity must be positive and finite");
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw UsageError("privacy epsilon must be positive and finite");
    }
    if (!(omega_floor > 0.0 && omega_floor <= 1.0)) {
      throw UsageError("omega_floor must lie in (0, 1]");
    }
  }

  double scale() const { return sensitivity / epsilon; }
};

inline void to_json(nlohmann::json& j, const NoiseConfig& c) {
  j = nlohmann::json{
      {"sensitivity", c.sensitivity}, {"epsilon", c.epsilon}, {"omega_floor", c.omega_floor}};
}

inline void from_json(const nlohmann::json& j, NoiseConfig& c) {
  c.sensitivity = j.value("sensitivity", 1.0);
  c.epsilon = j.at("epsilon").get<double>();
  c.omega_floor = j.value("omega_floor", 0.01);
  c.validate();
}

/// Inverse-CDF transform of a uniform draw in (0, 1) to Laplace(0, scale).
inline double laplace_from_uniform(double scale, double uniform) {
  const double centered = uniform - 0.5;
  if (scale == 0.0 || centered == 0.0) return 0.0;
  const double magnitude = -scale * std::log1p(-2.0 * std::abs(centered));
  return centered < 0.0 ? -magnitude : magnitude;
}

/// One Laplace(0, scale) draw. Always consumes exactly one uniform from `rng`.
inline double laplace_sample(double scale, Rng& rng) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw UsageError("Laplace scale must be finite and non-negative");
  }
  return laplace_from_uniform(scale, rng.uniform());
}

inline double privatize_score(double score, const NoiseConfig& config, Rng& rng) {
  return score + laplace_sample(config.sensitivity / config.epsilon, rng);
}

inline double privatize_score_adaptive(double score, double omega, const NoiseConfig& config,
                                       Rng& rng) {
  if (!(omega >= config.omega_floor && omega <= 1.0)) {
    throw UsageError("importance weight " + std::to_string(omega) + " outside [omega_floor, 1]");
  }
  return score + laplace_sample(config.sensitivity / (config.epsilon * omega), rng);
}

/// Euclidean norm of the gradient of sigmoid(u . v) with respect to v, which is
/// sigmoid'(u . v) * |u|.
inline double score_gradient_norm(std::span<const double> user, std::span<const double> video) {
  return sigmoid_derivative(dot(user, video)) * norm(user);
}

/// Importance weights for every candidate, normalized by the largest gradient
/// norm and floored at `omega_floor`. All ones when the largest norm is zero.
inline std::vector<double> importance_weights(std::span<const double> user,
                                              std::span<const Vector> candidates,
                                              double omega_floor) {
  if (candidates.empty()) throw UsageError("importance weights need a non-empty candidate set");
  std::vector<double> grad;
  grad.reserve(candidates.size());
  double largest = 0.0;
  for (const auto& v : candidates) {
    grad.push_back(score_gradient_norm(user, v));
    largest = std::max(largest, grad.back());
  }
  for (double& g : grad) {
    g = largest > 0.0 ? std::clamp(g / largest, omega_floor, 1.0) : 1.0;
  }
  return grad;
}

inline double importance_weight(std::span<const double> user, std::span<const double> video,
                                std::span<const Vector> candidates, double omega_floor = 0.01) {
  if (candidates.empty()) throw UsageError("importance weight needs a non-empty candidate set");
  double largest = 0.0;
  for (const auto& v : candidates) largest = std::max(largest, score_gradient_norm(user, v));
  if (largest == 0.0) return 1.0;
  return std::clamp(score_gradient_norm(user, video) / largest, omega_floor, 1.0);
}

/// Sequential-composition budget ledger. Charges are tallied per distinct
/// amount so that n charges of e total exactly `e * n`.
class PrivacyLedger {
 public:
  explicit PrivacyLedger(double budget = std::numeric_limits<double>::infinity())
      : budget_(budget) {
    if (std::isnan(budget) || budget < 0.0) throw UsageError("privacy budget must be >= 0");
  }

  double budget() const noexcept { return budget_; }
  double consumed() const noexcept { return total(charges_); }
  double remaining() const noexcept { return budget_ - consumed(); }
  std::uint64_t charge_count() const noexcept {
    std::uint64_t n = 0;
    for (const auto& [eps, count] : charges_) n += count;
    return n;
  }
  const std::map<double, std::uint64_t>& charges() const noexcept { return charges_; }

  /// Adds `epsilon` to the consumed total, or throws BudgetExhausted and leaves
  /// the ledger unchanged.
  void charge(double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw UsageError("ledger charge must be positive and finite");
    }
    auto next = charges_;
    ++next[epsilon];
    const double after = total(next);
    if (after > budget_) {
      throw BudgetExhausted("privacy ledger exhausted: charging " + std::to_string(epsilon) +
                            " would bring consumption to " + std::to_string(after) +
                            " of budget " + std::to_string(budget_));
    }
    charges_ = std::move(next);
  }

 private:
  static double total(const std::map<double, std::uint64_t>& charges) {
    double sum = 0.0;
    for (const auto& [eps, count] : charges) sum += eps * static_cast<double>(count);
    return sum;
  }

  double budget_;
  std::map<double, std::uint64_t> charges_;
};

inline void to_json(nlohmann::json& j, const PrivacyLedger& ledger) {
  nlohmann::json charges = nlohmann::json::array();
  for (const auto& [eps, count] : ledger.charges()) {
    charges.push_back({{"epsilon", eps}, {"count", count}});
  }
  j = nlohmann::json{{"budget", std::isinf(ledger.budget()) ? nlohmann::json(nullptr)
                                                             : nlohmann::json(ledger.budget())},
                     {"consumed", ledger.consumed()},
                     {"charges", charges}};
}

inline void from_json(const nlohmann::json& j, PrivacyLedger& ledger) {
  const auto& b = j.at("budget");
  ledger = PrivacyLedger(b.is_null() ? std::numeric_limits<double>::infinity() : b.get<double>());
  for (const auto& c : j.value("charges", nlohmann::json::array())) {
    const double eps = c.at("epsilon").get<double>();
    const auto count = c.at("count").get<std::uint64_t>();
    for (std::uint64_t i = 0; i < count; ++i) ledger.charge(eps);
  }
}

/// Ledger shared between threads; each charge is an atomic check-and-add.
class SharedLedger {
 public:
  explicit SharedLedger(PrivacyLedger ledger) : ledger_(std::move(ledger)) {}

  void charge(double epsilon) {
    std::lock_guard lock(mu_);
    ledger_.charge(epsilon);
  }

  PrivacyLedger snapshot() const {
    std::lock_guard lock(mu_);
    return ledger_;
  }

 private:
  mutable std::mutex mu_;
  PrivacyLedger ledger_;
};

/// Uniform mechanism bound to a ledger: each privatized score costs epsilon.
class PrivacySession {
 public:
  PrivacySession(PrivacyLedger& ledger, NoiseConfig config, Rng rng)
      : ledger_(&ledger), config_(config), rng_(std::move(rng)) {
    config_.validate();
  }

  double privatize(double score) {
    ledger_->charge(config_.epsilon);
    return privatize_score(score, config_, rng_);
  }

 private:
  PrivacyLedger* ledger_;
  NoiseConfig config_;
  Rng rng_;
};

enum class Mechanism { kNone, kUniform, kAdaptive };

inline const char* to_string(Mechanism m) {
  switch (m) {
    case Mechanism::kNone: return "none";
    case Mechanism::kUniform: return "uniform";
    case Mechanism::kAdaptive: return "adaptive";
  }
  return "none";
}

inline Mechanism parse_mechanism(const std::string& name) {
  if (name == "none") return Mechanism::kNone;
  if (name == "uniform") return Mechanism::kUniform;
  if (name == "adaptive") return Mechanism::kAdaptive;
  throw UsageError("unknown mechanism '" + name + "' (expected none, uniform or adaptive)");
}

/// Builds the score hook for `rank_top_k`. The adaptive weights are computed
/// over `candidates`, the retrieval-stage set. `rng` must outlive the returned
/// function and must not be shared with concurrent callers.
inline ScorePrivatizer make_privatizer(Mechanism mechanism, const InterestVector& user,
                                       std::span<const std::size_t> candidates,
                                       const FusedCatalog& fused, const NoiseConfig& config,
                                       Rng& rng) {
  switch (mechanism) {
    case Mechanism::kNone:
      return {};
    case Mechanism::kUniform:
      config.validate();
      return [config, &rng](std::size_t, double s) { return privatize_score(s, config, rng); };
    case Mechanism::kAdaptive: {
      config.validate();
      if (candidates.empty()) return {};
      std::vector<Vector> vectors;
      vectors.reserve(candidates.size());
      for (std::size_t c : candidates) vectors.push_back(fused[c].values);
      const auto weights = importance_weights(user.values, vectors, config.omega_floor);
      std::map<std::size_t, double> omega;
      for (std::size_t i = 0; i < candidates.size(); ++i) omega[candidates[i]] = weights[i];
      return [config, omega = std::move(omega), &rng](std::size_t video, double s) {
        return privatize_score_adaptive(s, omega.at(video), config, rng);
      };
    }
  }
  return {};
}

}  // namespace privrec
