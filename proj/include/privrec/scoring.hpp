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

// User interest vectors, sigmoid matching and the two-stage
// retrieve-then-rank pipeline.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "privrec/errors.hpp"
#include "privrec/feature_store.hpp"
#include "privrec/fusion.hpp"
#include "privrec/linalg.hpp"

namespace privrec {

struct InterestVector {
  std::string owner_id;
  Vector values;
};

struct RankedEntry {
  std::string video_id;
  double score = 0.0;
};

/// Entries ordered by descending score, ties by ascending video_id. Scores are
/// the raw ranking keys; privatized scores may leave [0, 1].
struct RankedList {
  std::vector<RankedEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
};

/// Strict ranking order: higher score first, then ascending id.
inline bool ranks_before(const RankedEntry& a, const RankedEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.video_id < b.video_id;
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Derivative of the logistic function.
inline double sigmoid_derivative(double x) {
  const double s = sigmoid(x);
  return s * (1.0 - s);
}

inline double match_score(std::span<const double> user, std::span<const double> video) {
  return sigmoid(dot(user, video));
}

inline double match_score(const InterestVector& u, const FusedVector& v) {
  return match_score(u.values, v.values);
}

/// Recency-weighted mean of the fused vectors of the user's positively
/// engaged videos. Each video counts once, at its latest positive timestamp,
/// with weight 0.5^((t_latest - t) / half_life). An infinite half-life gives
/// the plain mean; a user without positives gets the zero vector.
inline InterestVector build_user_vector(const std::string& user_id, const FusedCatalog& fused,
                                        double half_life = std::numeric_limits<double>::infinity()) {
  const Catalog& catalog = fused.catalog();
  const std::size_t user = catalog.require_user(user_id);
  if (!(half_life > 0.0)) throw UsageError("half_life must be positive");

  std::map<std::size_t, std::int64_t> latest;
  for (std::size_t e : catalog.events_of(user)) {
    const auto& ev = catalog.interactions()[e];
    if (!ev.positive()) continue;
    const auto v = catalog.find_video(ev.video_id);
    if (!v) continue;
    auto [it, inserted] = latest.emplace(*v, ev.timestamp);
    if (!inserted) it->second = std::max(it->second, ev.timestamp);
  }

  InterestVector out{user_id, Vector(catalog.dimension(), 0.0)};
  if (latest.empty()) return out;

  std::int64_t newest = std::numeric_limits<std::int64_t>::min();
  for (const auto& [v, t] : latest) newest = std::max(newest, t);

  double total = 0.0;
  for (const auto& [v, t] : latest) {
    const double w = std::isinf(half_life)
                         ? 1.0
                         : std::exp2(-static_cast<double>(newest - t) / half_life);
    const auto& values = fused[v].values;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += w * values[i];
    total += w;
  }
  for (double& x : out.values) x /= total;
  return out;
}

/// Video indices of the `m` videos with the highest cosine similarity to `u`,
/// best first, ties by ascending video_id. Videos listed in `exclude` (sorted
/// indices) are skipped.
inline std::vector<std::size_t> retrieve_candidates(const InterestVector& u,
                                                    const FusedCatalog& fused, std::size_t m,
                                                    std::span<const std::size_t> exclude = {}) {
  if (m == 0) throw UsageError("candidate count must be at least 1");
  struct Scored {
    double cos;
    std::size_t index;
  };
  const auto& videos = fused.catalog().videos();
  std::vector<Scored> all;
  all.reserve(fused.size());
  for (std::size_t i = 0; i < fused.size(); ++i) {
    if (std::binary_search(exclude.begin(), exclude.end(), i)) continue;
    all.push_back({cosine(u.values, fused[i].values), i});
  }
  auto better = [&videos](const Scored& a, const Scored& b) {
    if (a.cos != b.cos) return a.cos > b.cos;
    return videos[a.index].video_id < videos[b.index].video_id;
  };
  const std::size_t take = std::min(m, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                    better);
  std::vector<std::size_t> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(all[i].index);
  return out;
}

/// Optional noise hook applied to each candidate's match score before ranking.
/// Receives the video index and the clean score, returns the ranking key.
using ScorePrivatizer = std::function<double(std::size_t video, double score)>;

/// Top-k candidates by (optionally privatized) match score. The privatizer is
/// invoked once per candidate in ascending video_id order, so the noise a video
/// receives does not depend on how the candidate set was ordered.
inline RankedList rank_top_k(const InterestVector& u, std::span<const std::size_t> candidates,
                             const FusedCatalog& fused, std::size_t k,
                             const ScorePrivatizer& privatizer = {}) {
  if (k == 0) throw UsageError("k must be at least 1");
  const auto& videos = fused.catalog().videos();
  std::vector<std::size_t> ordered(candidates.begin(), candidates.end());
  std::sort(ordered.begin(), ordered.end(), [&videos](std::size_t a, std::size_t b) {
    return videos[a].video_id < videos[b].video_id;
  });
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

  std::vector<RankedEntry> scored;
  scored.reserve(ordered.size());
  for (std::size_t v : ordered) {
    double s = match_score(u.values, fused[v].values);
    if (privatizer) s = privatizer(v, s);
    scored.push_back({videos[v].video_id, s});
  }
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), ranks_before);
  scored.resize(take);
  return RankedList{std::move(scored)};
}

inline std::string format_fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

/// Quotes a CSV field when it contains a separator, quote or line break.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Writes `rank,video_id,score` rows (rank is 1-based). With `clamp_display`
/// the printed score is clamped to [0, 1]; the list itself is untouched.
inline void write_ranked_csv(std::ostream& out, const RankedList& list, bool clamp_display,
                             bool header = true) {
  if (header) out << "rank,video_id,score\n";
  for (std::size_t i = 0; i < list.entries.size(); ++i) {
    double s = list.entries[i].score;
    if (clamp_display) s = std::clamp(s, 0.0, 1.0);
    out << (i + 1) << ',' << csv_field(list.entries[i].video_id) << ',' << format_fixed6(s)
        << '\n';
  }
}

}  // namespace privrec
