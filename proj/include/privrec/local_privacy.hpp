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

// Client/server flow for preference vectors.
//
// Client side: clamp each component to [-1, 1], add per-component Laplace
// noise with the budget split evenly across components, then snap to a grid.
// The result carries a random pseudonym instead of the user id.
//
// Server side: only ever sees PerturbedProfile. It re-quantizes uploads to a
// common template grid, compares them by Euclidean distance and clusters them
// with seeded k-means++ / Lloyd iterations.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "privrec/dp_noise.hpp"
#include "privrec/errors.hpp"
#include "privrec/linalg.hpp"
#include "privrec/rng.hpp"
#include "privrec/scoring.hpp"

namespace privrec {

struct PerturbedProfile {
  std::string pseudonym;
  Vector values;
  double epsilon_used = 0.0;
  double grid_step = 0.0;
};

struct ProfileTemplate {
  std::size_t dimension = 0;
  double grid_step = 0.1;
};

struct PerturbOptions {
  double range_bound = 2.0;  // per-component sensitivity after clamping to [-1, 1]
};

/// Nearest multiple of `step`, with halves rounded up.
inline double quantize(double x, double step) { return step * std::floor(x / step + 0.5); }

inline bool on_grid(double x, double step, double tolerance = 1e-9) {
  const double q = x / step;
  return std::abs(q - std::round(q)) <= tolerance;
}

inline PerturbedProfile perturb_profile(const InterestVector& u, double epsilon, double grid_step,
                                        Rng& rng, const PerturbOptions& options = {}) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw UsageError("epsilon must be positive");
  if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
    throw UsageError("grid_step must be positive");
  }
  if (u.values.empty()) throw DataError("cannot perturb an empty preference vector");

  char name[24];
  std::snprintf(name, sizeof name, "p%016llx", static_cast<unsigned long long>(rng.next_u64()));
  PerturbedProfile out{name, Vector(u.values.size()), epsilon, grid_step};

  const double per_component = epsilon / static_cast<double>(u.values.size());
  const double scale = options.range_bound / per_component;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double clamped = std::clamp(u.values[i], -1.0, 1.0);
    out.values[i] = quantize(clamped + laplace_sample(scale, rng), grid_step);
  }
  return out;
}

/// Re-quantizes every upload to the template grid.
inline std::vector<PerturbedProfile> standardize(std::span<const PerturbedProfile> profiles,
                                                 const ProfileTemplate& tmpl) {
  if (!(tmpl.grid_step > 0.0)) throw UsageError("template grid_step must be positive");
  std::vector<PerturbedProfile> out;
  out.reserve(profiles.size());
  for (const auto& p : profiles) {
    if (p.values.size() != tmpl.dimension) {
      throw DataError("profile '" + p.pseudonym + "' has dimension " +
                      std::to_string(p.values.size()) + ", template expects " +
                      std::to_string(tmpl.dimension));
    }
    PerturbedProfile q = p;
    for (double& x : q.values) x = quantize(x, tmpl.grid_step);
    q.grid_step = tmpl.grid_step;
    out.push_back(std::move(q));
  }
  return out;
}

inline double semantic_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

struct ClusterAssignment {
  std::string pseudonym;
  std::size_t cluster_id = 0;
  double distance_to_centroid = 0.0;
};

struct ClusteringResult {
  std::vector<ClusterAssignment> assignments;  // aligned with the input profiles
  std::vector<Vector> centroids;
  std::vector<double> objective_history;  // within-cluster sum of squares per iteration
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline std::vector<Vector> kmeans_plus_plus(std::span<const PerturbedProfile> profiles,
                                            std::size_t k, Rng& rng) {
  const std::size_t n = profiles.size();
  std::vector<Vector> centers;
  std::vector<bool> chosen(n, false);
  std::size_t first = rng.below(n);
  centers.push_back(profiles[first].values);
  chosen[first] = true;

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(profiles[i].values, centers[0]);
  while (centers.size() < k) {
    double total = 0.0;
    for (double x : d2) total += x;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && acc >= target) {
          pick = i;
          break;
        }
      }
      if (pick == n) {  // rounding left target past the last positive weight
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // every point coincides with a center; take an unused one uniformly
      std::vector<std::size_t> unused;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) unused.push_back(i);
      }
      pick = unused[rng.below(unused.size())];
    }
    chosen[pick] = true;
    centers.push_back(profiles[pick].values);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(profiles[i].values, centers.back()));
    }
  }
  return centers;
}

}  // namespace detail

/// k-means under semantic distance. Stops when an assignment pass changes
/// nothing or after `max_iters` passes. The objective recorded after each
/// assignment pass never increases.
inline ClusteringResult cluster_profiles(std::span<const PerturbedProfile> profiles, std::size_t k,
                                         int max_iters, Rng& rng) {
  if (profiles.empty()) throw DataError("cannot cluster an empty profile set");
  if (k == 0) throw UsageError("cluster count must be at least 1");
  if (k > profiles.size()) {
    throw UsageError("cluster count " + std::to_string(k) + " exceeds profile count " +
                     std::to_string(profiles.size()));
  }
  if (max_iters < 1) throw UsageError("max_iters must be at least 1");
  const std::size_t d = profiles.front().values.size();
  for (const auto& p : profiles) {
    if (p.values.size() != d) throw DataError("profiles have inconsistent dimensions");
  }

  ClusteringResult result;
  result.centroids = detail::kmeans_plus_plus(profiles, k, rng);
  const std::size_t n = profiles.size();
  std::vector<std::size_t> assign(n, k);
  std::vector<double> dist2(n, 0.0);

  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d2 = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double dd = squared_distance(profiles[i].values, result.centroids[c]);
        if (dd < best_d2) {
          best_d2 = dd;
          best = c;
        }
      }
      changed |= assign[i] != best;
      assign[i] = best;
      dist2[i] = best_d2;
      objective += best_d2;
    }
    if (!result.objective_history.empty() &&
        objective > result.objective_history.back() * (1.0 + 1e-12)) {
      throw std::logic_error("k-means objective increased between iterations");
    }
    result.objective_history.push_back(objective);
    result.iterations = it + 1;
    if (!changed) {
      result.converged = true;
      break;
    }
    if (it + 1 == max_iters) break;

    std::vector<Vector> sums(k, Vector(d, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assign[i]];
      for (std::size_t j = 0; j < d; ++j) sums[assign[i]][j] += profiles[i].values[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (std::size_t j = 0; j < d; ++j) {
        result.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
      }
    }
  }

  result.assignments.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.assignments.push_back({profiles[i].pseudonym, assign[i], std::sqrt(dist2[i])});
  }
  return result;
}

inline void to_json(nlohmann::json& j, const PerturbedProfile& p) {
  j = nlohmann::ordered_json{
      {"pseudonym", p.pseudonym}, {"values", p.values}, {"epsilon_used", p.epsilon_used}};
}

inline void write_uploads_jsonl(std::ostream& out, std::span<const PerturbedProfile> profiles) {
  for (const auto& p : profiles) {
    nlohmann::ordered_json j;
    j["pseudonym"] = p.pseudonym;
    j["values"] = p.values;
    j["epsilon_used"] = p.epsilon_used;
    out << j.dump() << '\n';
  }
}

/// Reads uploads back; `grid_step` is not part of the wire format and must be
/// supplied by the server's template.
inline std::vector<PerturbedProfile> read_uploads_jsonl(std::istream& in, double grid_step) {
  std::vector<PerturbedProfile> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PerturbedProfile p;
      p.pseudonym = j.at("pseudonym").get<std::string>();
      p.values = j.at("values").get<Vector>();
      p.epsilon_used = j.at("epsilon_used").get<double>();
      p.grid_step = grid_step;
      if (!(p.epsilon_used > 0.0)) throw std::invalid_argument("epsilon_used must be positive");
      out.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw DataError("upload line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline void write_clusters_csv(std::ostream& out, const ClusteringResult& result) {
  out << "pseudonym,cluster_id,distance\n";
  for (const auto& a : result.assignments) {
    out << csv_field(a.pseudonym) << ',' << a.cluster_id << ','
        << format_fixed6(a.distance_to_centroid) << '\n';
  }
}

}  // namespace privrec
