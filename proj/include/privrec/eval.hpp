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

// Ranking metrics and the privacy-budget sweep.
//
// A sweep holds out the latest positives of every user as ground truth, then
// for each epsilon runs `trials` passes of retrieve -> privatized rank over
// all evaluated users. Trial t of user i always draws noise from the stream
// Rng(seed).split(t).split(i), so mechanisms and epsilons are compared on
// common random numbers. Each pass charges epsilon once to the sweep's
// ledger: users' lists are computed over disjoint records.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "privrec/dp_noise.hpp"
#include "privrec/errors.hpp"
#include "privrec/feature_store.hpp"
#include "privrec/fusion.hpp"
#include "privrec/rng.hpp"
#include "privrec/scoring.hpp"
#include "privrec/stats.hpp"

namespace privrec {

using RelevantSet = std::set<std::string>;

inline std::size_t count_hits(const RankedList& recommended, const RelevantSet& relevant,
                              std::size_t k) {
  const std::size_t top = std::min(k, recommended.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < top; ++i) hits += relevant.count(recommended.entries[i].video_id);
  return hits;
}

/// Hits in the top k over min(k, list length); 0 for an empty list.
inline double precision_at_k(const RankedList& recommended, const RelevantSet& relevant,
                             std::size_t k) {
  if (k == 0) throw UsageError("k must be at least 1");
  const std::size_t top = std::min(k, recommended.size());
  if (top == 0) return 0.0;
  return static_cast<double>(count_hits(recommended, relevant, k)) / static_cast<double>(top);
}

/// Hits in the top k over |relevant|; 0 when nothing is relevant.
inline double recall_at_k(const RankedList& recommended, const RelevantSet& relevant,
                          std::size_t k) {
  if (k == 0) throw UsageError("k must be at least 1");
  if (relevant.empty()) return 0.0;
  return static_cast<double>(count_hits(recommended, relevant, k)) /
         static_cast<double>(relevant.size());
}

struct HoldoutSplit {
  Catalog train;
  std::map<std::string, RelevantSet> relevant;  // only users kept for evaluation
};

/// Temporal split. For each user with at least two positive interactions, the
/// latest round(fraction * n) positives (at least one, at most n - 1) are
/// removed from the training catalog and their videos become the user's
/// relevant set.
inline HoldoutSplit holdout_split(const Catalog& catalog, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("holdout fraction must be in (0, 1)");
  std::vector<bool> held(catalog.interactions().size(), false);
  HoldoutSplit out;
  for (std::size_t u = 0; u < catalog.users().size(); ++u) {
    std::vector<std::size_t> positives;
    for (std::size_t e : catalog.events_of(u)) {
      if (catalog.interactions()[e].positive()) positives.push_back(e);
    }
    const std::size_t n = positives.size();
    if (n < 2) continue;
    const auto h = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n))), 1, n - 1);
    RelevantSet rel;
    for (std::size_t i = n - h; i < n; ++i) {
      held[positives[i]] = true;
      rel.insert(catalog.interactions()[positives[i]].video_id);
    }
    out.relevant.emplace(catalog.users()[u], std::move(rel));
  }
  std::vector<InteractionEvent> kept;
  for (std::size_t e = 0; e < catalog.interactions().size(); ++e) {
    if (!held[e]) kept.push_back(catalog.interactions()[e]);
  }
  out.train = Catalog(catalog.videos(), catalog.users(), std::move(kept));
  return out;
}

struct LatencySummary {
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  std::size_t samples = 0;
};

inline LatencySummary summarize_latency(const std::vector<double>& ms) {
  LatencySummary s;
  s.samples = ms.size();
  if (ms.empty()) return s;
  s.mean_ms = stats::mean(ms);
  s.p50_ms = stats::percentile(ms, 0.50);
  s.p95_ms = stats::percentile(ms, 0.95);
  return s;
}

struct EvalReport {
  double epsilon = 0.0;
  Mechanism mechanism = Mechanism::kNone;
  double precision_at_k = 0.0;
  double recall_at_k = 0.0;
  double privacy_loss = 0.0;
  LatencySummary latency;
  std::size_t trials = 0;
  std::size_t k = 0;
  std::size_t users = 0;
  std::vector<double> trial_precision;  // per-trial mean over users
  std::vector<double> trial_recall;
  PrivacyLedger ledger;
};

struct SweepConfig {
  std::vector<double> epsilons{0.1, 0.5, 1.0, 5.0};
  std::size_t k = 10;
  std::size_t trials = 50;
  Mechanism mechanism = Mechanism::kUniform;
  std::uint64_t seed = 1;
  double holdout_fraction = 0.3;
  std::size_t candidate_count = 200;
  FusionWeights weights;
  double sensitivity = 1.0;
  double omega_floor = 0.01;
  double budget = std::numeric_limits<double>::infinity();
  unsigned jobs = 1;

  void validate() const {
    if (epsilons.empty()) throw UsageError("epsilon grid must not be empty");
    if (k == 0) throw UsageError("k must be at least 1");
    if (trials == 0) throw UsageError("trials must be at least 1");
    if (candidate_count == 0) throw UsageError("candidate count must be at least 1");
    for (double e : epsilons) NoiseConfig{sensitivity, e, omega_floor}.validate();
  }
};

inline void to_json(nlohmann::json& j, const SweepConfig& c) {
  j = nlohmann::json{{"epsilons", c.epsilons},
                     {"k", c.k},
                     {"trials", c.trials},
                     {"mechanism", to_string(c.mechanism)},
                     {"seed", c.seed},
                     {"holdout_fraction", c.holdout_fraction},
                     {"candidate_count", c.candidate_count},
                     {"weights", c.weights},
                     {"sensitivity", c.sensitivity},
                     {"omega_floor", c.omega_floor},
                     {"budget", std::isinf(c.budget) ? nlohmann::json(nullptr) : nlohmann::json(c.budget)}};
}

/// Precomputed, noise-independent state of the evaluation pipeline: training
/// catalog, interest vectors, retrieval candidates and importance weights.
class EvalPipeline {
 public:
  struct User {
    std::string id;
    InterestVector interest;
    std::vector<std::size_t> candidates;
    RelevantSet relevant;
  };

  EvalPipeline(const Catalog& catalog, const SweepConfig& config)
      : split_(holdout_split(catalog, config.holdout_fraction)),
        fused_(split_.train, config.weights) {
    const Catalog& train = split_.train;
    for (const auto& id : train.users()) {
      auto rel = split_.relevant.find(id);
      if (rel == split_.relevant.end()) continue;
      User u;
      u.id = id;
      u.interest = build_user_vector(id, fused_);
      const auto seen = train.positive_videos(train.require_user(id));
      u.candidates = retrieve_candidates(u.interest, fused_, config.candidate_count, seen);
      u.relevant = rel->second;
      users_.push_back(std::move(u));
    }
  }

  EvalPipeline(const EvalPipeline&) = delete;
  EvalPipeline& operator=(const EvalPipeline&) = delete;

  const std::vector<User>& users() const noexcept { return users_; }
  const FusedCatalog& fused() const noexcept { return fused_; }

  RankedList recommend(std::size_t user, std::size_t k, Mechanism mechanism,
                       const NoiseConfig& noise, Rng& rng) const {
    const User& u = users_.at(user);
    const auto privatizer = make_privatizer(mechanism, u.interest, u.candidates, fused_, noise, rng);
    return rank_top_k(u.interest, u.candidates, fused_, k, privatizer);
  }

 private:
  HoldoutSplit split_;
  FusedCatalog fused_;
  std::vector<User> users_;
};

namespace detail {

struct TrialResult {
  double precision = 0.0;
  double recall = 0.0;
  std::vector<double> latency_ms;
};

inline TrialResult run_trial(const EvalPipeline& pipeline, const SweepConfig& config,
                             const NoiseConfig& noise, std::size_t trial) {
  TrialResult r;
  const Rng trial_rng = Rng(config.seed).split(trial);
  const auto& users = pipeline.users();
  r.latency_ms.reserve(users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    Rng rng = trial_rng.split(i);
    const auto start = std::chrono::steady_clock::now();
    const RankedList list = pipeline.recommend(i, config.k, config.mechanism, noise, rng);
    const auto stop = std::chrono::steady_clock::now();
    r.latency_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    r.precision += precision_at_k(list, users[i].relevant, config.k);
    r.recall += recall_at_k(list, users[i].relevant, config.k);
  }
  if (!users.empty()) {
    r.precision /= static_cast<double>(users.size());
    r.recall /= static_cast<double>(users.size());
  }
  return r;
}

}  // namespace detail

/// One report per epsilon, in grid order. Deterministic given the config
/// (latency aside); `jobs` only changes wall-clock time.
inline std::vector<EvalReport> run_sweep(const EvalPipeline& pipeline, const SweepConfig& config) {
  config.validate();
  std::vector<EvalReport> reports;
  for (double epsilon : config.epsilons) {
    const NoiseConfig noise{config.sensitivity, epsilon, config.omega_floor};
    EvalReport report;
    report.epsilon = epsilon;
    report.mechanism = config.mechanism;
    report.trials = config.trials;
    report.k = config.k;
    report.users = pipeline.users().size();
    report.ledger = PrivacyLedger(config.budget);
    if (config.mechanism != Mechanism::kNone) {
      for (std::size_t t = 0; t < config.trials; ++t) report.ledger.charge(epsilon);
    }

    std::vector<detail::TrialResult> results(config.trials);
    const unsigned jobs = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(config.trials)));
    if (jobs == 1) {
      for (std::size_t t = 0; t < config.trials; ++t) {
        results[t] = detail::run_trial(pipeline, config, noise, t);
      }
    } else {
      std::vector<std::thread> workers;
      for (unsigned w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
          for (std::size_t t = w; t < config.trials; t += jobs) {
            results[t] = detail::run_trial(pipeline, config, noise, t);
          }
        });
      }
      for (auto& th : workers) th.join();
    }

    std::vector<double> latency;
    for (const auto& r : results) {
      report.trial_precision.push_back(r.precision);
      report.trial_recall.push_back(r.recall);
      latency.insert(latency.end(), r.latency_ms.begin(), r.latency_ms.end());
    }
    report.precision_at_k = stats::mean(report.trial_precision);
    report.recall_at_k = stats::mean(report.trial_recall);
    report.privacy_loss = report.ledger.consumed();
    report.latency = summarize_latency(latency);
    reports.push_back(std::move(report));
  }
  return reports;
}

inline std::vector<EvalReport> run_sweep(const Catalog& catalog, const SweepConfig& config) {
  config.validate();
  const EvalPipeline pipeline(catalog, config);
  return run_sweep(pipeline, config);
}

inline std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

/// One row per (mechanism, epsilon). Contains no timing, so it is byte-stable.
inline void write_sweep_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
  out << "mechanism,epsilon,k,trials,users,precision_at_k,recall_at_k,privacy_loss\n";
  for (const auto& r : reports) {
    out << to_string(r.mechanism) << ',' << format_real(r.epsilon) << ',' << r.k << ','
        << r.trials << ',' << r.users << ',' << format_real(r.precision_at_k) << ','
        << format_real(r.recall_at_k) << ',' << format_real(r.privacy_loss) << '\n';
  }
}

/// Long format for plotting: mechanism, epsilon, metric, value.
inline void write_plot_data(std::ostream& out, const std::vector<EvalReport>& reports) {
  out << "mechanism,epsilon,metric,value\n";
  for (const auto& r : reports) {
    const std::string prefix = std::string(to_string(r.mechanism)) + ',' + format_real(r.epsilon) + ',';
    out << prefix << "precision_at_k," << format_real(r.precision_at_k) << '\n';
    out << prefix << "recall_at_k," << format_real(r.recall_at_k) << '\n';
    out << prefix << "privacy_loss," << format_real(r.privacy_loss) << '\n';
  }
}

inline void write_latency_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
  out << "mechanism,epsilon,samples,mean_ms,p50_ms,p95_ms\n";
  for (const auto& r : reports) {
    out << to_string(r.mechanism) << ',' << format_real(r.epsilon) << ',' << r.latency.samples
        << ',' << format_real(r.latency.mean_ms) << ',' << format_real(r.latency.p50_ms) << ','
        << format_real(r.latency.p95_ms) << '\n';
  }
}

struct MechanismComparison {
  double epsilon = 0.0;
  double uniform_precision = 0.0;
  double adaptive_precision = 0.0;
  stats::PairedTest test;  // adaptive minus uniform, paired by trial
};

inline std::vector<MechanismComparison> compare_mechanisms(const std::vector<EvalReport>& uniform,
                                                           const std::vector<EvalReport>& adaptive) {
  std::vector<MechanismComparison> out;
  for (const auto& u : uniform) {
    for (const auto& a : adaptive) {
      if (a.epsilon != u.epsilon || a.trial_precision.size() != u.trial_precision.size()) continue;
      MechanismComparison c;
      c.epsilon = u.epsilon;
      c.uniform_precision = u.precision_at_k;
      c.adaptive_precision = a.precision_at_k;
      if (u.trial_precision.size() >= 2) {
        c.test = stats::paired_t_test(a.trial_precision, u.trial_precision);
      }
      out.push_back(c);
    }
  }
  return out;
}

inline void write_comparison_csv(std::ostream& out, const std::vector<MechanismComparison>& rows) {
  out << "epsilon,uniform_precision,adaptive_precision,mean_difference,t,p_adaptive_greater\n";
  for (const auto& c : rows) {
    out << format_real(c.epsilon) << ',' << format_real(c.uniform_precision) << ','
        << format_real(c.adaptive_precision) << ',' << format_real(c.test.mean_difference) << ','
        << format_real(c.test.t) << ',' << format_real(c.test.p_greater) << '\n';
  }
}

}  // namespace privrec
