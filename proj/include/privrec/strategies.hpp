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

// Recommendation strategies: content similarity, user-based collaborative
// filtering, a hybrid of the two, and group preference fusion.
//
// Every strategy excludes videos the target user already engaged with
// positively, and breaks score ties by ascending video_id.

#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "privrec/errors.hpp"
#include "privrec/feature_store.hpp"
#include "privrec/fusion.hpp"
#include "privrec/linalg.hpp"
#include "privrec/scoring.hpp"

namespace privrec {

struct UserSimilarity {
  std::string user_a;
  std::string user_b;
  double similarity = 0.0;
};

struct GroupProfile {
  std::vector<std::string> member_ids;
  InterestVector fused_interest;
};

struct HybridOptions {
  double blend = 0.5;              // weight of the collaborative score
  std::size_t neighbor_count = 10;
  bool chaining = false;           // append content neighbours of selected videos
  double chain_threshold = 0.95;   // minimum cosine for a chained video
};

namespace detail {

inline RankedList top_k(std::vector<RankedEntry> entries, std::size_t k) {
  const std::size_t take = std::min(k, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(take),
                    entries.end(), ranks_before);
  entries.resize(take);
  return RankedList{std::move(entries)};
}

inline bool contains(std::span<const std::size_t> sorted, std::size_t x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

/// Max cosine between each non-positive video and the user's positive videos.
/// Empty when the user has no positives.
inline std::map<std::size_t, double> content_scores(std::span<const std::size_t> positives,
                                                    const FusedCatalog& fused) {
  std::map<std::size_t, double> out;
  if (positives.empty()) return out;
  for (std::size_t v = 0; v < fused.size(); ++v) {
    if (contains(positives, v)) continue;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t p : positives) best = std::max(best, cosine(fused[v].values, fused[p].values));
    out.emplace(v, best);
  }
  return out;
}

inline double jaccard(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

/// Similarity-weighted votes of the `neighbor_count` most similar other users
/// (ties by ascending user_id) for videos outside `positives`. Only videos
/// with a positive vote appear.
inline std::map<std::size_t, double> cf_votes(std::size_t user, const Catalog& catalog,
                                              std::size_t neighbor_count) {
  const auto own = catalog.positive_videos(user);
  struct Neighbor {
    double sim;
    std::size_t index;
  };
  std::vector<Neighbor> neighbors;
  std::vector<std::vector<std::size_t>> positives(catalog.users().size());
  for (std::size_t other = 0; other < catalog.users().size(); ++other) {
    if (other == user) continue;
    positives[other] = catalog.positive_videos(other);
    const double sim = jaccard(own, positives[other]);
    if (sim > 0.0) neighbors.push_back({sim, other});
  }
  const auto& ids = catalog.users();
  std::sort(neighbors.begin(), neighbors.end(), [&ids](const Neighbor& a, const Neighbor& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return ids[a.index] < ids[b.index];
  });
  if (neighbors.size() > neighbor_count) neighbors.resize(neighbor_count);

  std::map<std::size_t, double> votes;
  for (const auto& n : neighbors) {
    for (std::size_t v : positives[n.index]) {
      if (!contains(own, v)) votes[v] += n.sim;
    }
  }
  return votes;
}

/// Min-max normalization over `keys`; a constant vector maps to zeros.
inline std::map<std::size_t, double> min_max(const std::vector<std::size_t>& keys,
                                             const std::map<std::size_t, double>& values) {
  auto get = [&values](std::size_t k) {
    auto it = values.find(k);
    return it == values.end() ? 0.0 : it->second;
  };
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t k : keys) {
    lo = std::min(lo, get(k));
    hi = std::max(hi, get(k));
  }
  std::map<std::size_t, double> out;
  for (std::size_t k : keys) out[k] = hi > lo ? (get(k) - lo) / (hi - lo) : 0.0;
  return out;
}

}  // namespace detail

/// Ranks unseen videos by their highest cosine similarity to any video the
/// user liked.
inline RankedList content_recommend(const std::string& user_id, const FusedCatalog& fused,
                                    std::size_t k) {
  const Catalog& catalog = fused.catalog();
  const auto positives = catalog.positive_videos(catalog.require_user(user_id));
  std::vector<RankedEntry> entries;
  for (const auto& [v, s] : detail::content_scores(positives, fused)) {
    entries.push_back({catalog.videos()[v].video_id, s});
  }
  return detail::top_k(std::move(entries), k);
}

/// Jaccard similarity of the two users' positive video sets (0 if either is empty).
inline double user_similarity(const std::string& a, const std::string& b, const Catalog& catalog) {
  const auto pa = catalog.positive_videos(catalog.require_user(a));
  const auto pb = catalog.positive_videos(catalog.require_user(b));
  return detail::jaccard(pa, pb);
}

inline RankedList cf_recommend(const std::string& user_id, const Catalog& catalog, std::size_t k,
                               std::size_t neighbor_count) {
  if (neighbor_count == 0) throw UsageError("neighbor_count must be at least 1");
  const std::size_t user = catalog.require_user(user_id);
  std::vector<RankedEntry> entries;
  for (const auto& [v, vote] : detail::cf_votes(user, catalog, neighbor_count)) {
    entries.push_back({catalog.videos()[v].video_id, vote});
  }
  return detail::top_k(std::move(entries), k);
}

/// Blends min-max normalized CF votes (weight `blend`) with normalized content
/// similarity (weight 1 - blend). A component with zero weight contributes no
/// candidates. With chaining on, each selected video is followed by unseen
/// videos within `chain_threshold` cosine of it, inheriting its score, and the
/// list is cut back to k. Equal blended scores fall back to the unnormalized
/// blend, then to video_id.
inline RankedList hybrid_recommend(const std::string& user_id, const FusedCatalog& fused,
                                   std::size_t k, const HybridOptions& options = {}) {
  if (!(options.blend >= 0.0 && options.blend <= 1.0)) {
    throw UsageError("hybrid blend must lie in [0, 1]");
  }
  if (options.neighbor_count == 0) throw UsageError("neighbor_count must be at least 1");
  const Catalog& catalog = fused.catalog();
  const std::size_t user = catalog.require_user(user_id);
  const auto positives = catalog.positive_videos(user);
  const auto content = detail::content_scores(positives, fused);
  const auto votes = detail::cf_votes(user, catalog, options.neighbor_count);

  std::set<std::size_t> eligible;
  if (options.blend < 1.0) {
    for (const auto& [v, s] : content) eligible.insert(v);
  }
  if (options.blend > 0.0) {
    for (const auto& [v, s] : votes) eligible.insert(v);
  }
  const std::vector<std::size_t> keys(eligible.begin(), eligible.end());
  const auto content_n = detail::min_max(keys, content);
  const auto votes_n = detail::min_max(keys, votes);

  auto raw = [](const std::map<std::size_t, double>& m, std::size_t v) {
    auto it = m.find(v);
    return it == m.end() ? 0.0 : it->second;
  };
  struct Blended {
    RankedEntry entry;
    double raw;  // unnormalized blend; rescaling can round distinct scores together
  };
  std::vector<Blended> blended;
  blended.reserve(keys.size());
  for (std::size_t v : keys) {
    const double s =
        options.blend * votes_n.at(v) + (1.0 - options.blend) * content_n.at(v);
    const double r = options.blend * raw(votes, v) + (1.0 - options.blend) * raw(content, v);
    blended.push_back({{catalog.videos()[v].video_id, s}, r});
  }
  const std::size_t take = std::min(k, blended.size());
  std::partial_sort(blended.begin(), blended.begin() + static_cast<std::ptrdiff_t>(take),
                    blended.end(), [](const Blended& a, const Blended& b) {
                      if (a.entry.score != b.entry.score) return a.entry.score > b.entry.score;
                      if (a.raw != b.raw) return a.raw > b.raw;
                      return a.entry.video_id < b.entry.video_id;
                    });
  RankedList base;
  for (std::size_t i = 0; i < take; ++i) base.entries.push_back(blended[i].entry);
  if (!options.chaining) return base;

  RankedList out;
  std::set<std::string> listed;
  for (const auto& parent : base.entries) {
    if (out.size() >= k) break;
    if (!listed.insert(parent.video_id).second) continue;
    out.entries.push_back(parent);
    const auto& pv = fused.at(parent.video_id).values;
    std::vector<std::pair<double, std::size_t>> chained;
    for (std::size_t v = 0; v < fused.size(); ++v) {
      if (detail::contains(positives, v) || listed.count(catalog.videos()[v].video_id)) continue;
      const double c = cosine(pv, fused[v].values);
      if (c >= options.chain_threshold) chained.push_back({c, v});
    }
    std::sort(chained.begin(), chained.end(), [&catalog](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return catalog.videos()[a.second].video_id < catalog.videos()[b.second].video_id;
    });
    for (const auto& [c, v] : chained) {
      if (out.size() >= k) break;
      listed.insert(catalog.videos()[v].video_id);
      out.entries.push_back({catalog.videos()[v].video_id, parent.score});
    }
  }
  return out;
}

inline GroupProfile build_group_profile(std::span<const std::string> member_ids,
                                        const FusedCatalog& fused) {
  if (member_ids.empty()) throw UsageError("group must have at least one member");
  std::set<std::string> distinct(member_ids.begin(), member_ids.end());
  if (distinct.size() != member_ids.size()) throw UsageError("group members must be distinct");
  GroupProfile group{{member_ids.begin(), member_ids.end()},
                     {"group", Vector(fused.catalog().dimension(), 0.0)}};
  for (const auto& id : member_ids) {
    const auto u = build_user_vector(id, fused);
    for (std::size_t i = 0; i < u.values.size(); ++i) group.fused_interest.values[i] += u.values[i];
  }
  for (double& x : group.fused_interest.values) x /= static_cast<double>(member_ids.size());
  return group;
}

/// Ranks by match score against the mean member interest vector, excluding
/// videos every member already engaged with positively.
inline RankedList group_recommend(std::span<const std::string> member_ids,
                                  const FusedCatalog& fused, std::size_t k) {
  const GroupProfile group = build_group_profile(member_ids, fused);
  const Catalog& catalog = fused.catalog();
  std::vector<std::size_t> seen_by_all = catalog.positive_videos(catalog.require_user(member_ids[0]));
  for (std::size_t m = 1; m < member_ids.size(); ++m) {
    const auto p = catalog.positive_videos(catalog.require_user(member_ids[m]));
    std::vector<std::size_t> both;
    std::set_intersection(seen_by_all.begin(), seen_by_all.end(), p.begin(), p.end(),
                          std::back_inserter(both));
    seen_by_all = std::move(both);
  }
  std::vector<std::size_t> candidates;
  for (std::size_t v = 0; v < fused.size(); ++v) {
    if (!detail::contains(seen_by_all, v)) candidates.push_back(v);
  }
  return rank_top_k(group.fused_interest, candidates, fused, k);
}

}  // namespace privrec
