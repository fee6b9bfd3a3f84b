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

#include "privrec/scoring.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "privrec/dp_noise.hpp"
#include "privrec/rng.hpp"

namespace privrec {
namespace {

// Videos whose modal vectors are all equal to the given vector, so the fused
// vector under any weights is that vector.
Catalog flat_catalog(const std::vector<std::pair<std::string, Vector>>& vids,
                     std::vector<std::string> users = {},
                     std::vector<InteractionEvent> events = {}) {
  std::vector<ModalFeatureSet> videos;
  for (const auto& [id, v] : vids) videos.push_back({id, v, v, v});
  return Catalog(std::move(videos), std::move(users), std::move(events));
}

InteractionEvent like(const std::string& u, const std::string& v, std::int64_t t) {
  return {u, v, InteractionKind::kLike, t, true};
}

TEST(BuildUserVector, SinglePositiveEqualsFusedVideo) {
  Catalog c({{"a", {1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}}}, {"u"}, {like("u", "a", 7)});
  const FusionWeights w(0.2, 0.3, 0.5);
  FusedCatalog fused(c, w);
  EXPECT_EQ(build_user_vector("u", fused).values, fuse(w, c.videos()[0]).values);
}

TEST(BuildUserVector, NoPositivesGivesZeroVector) {
  const Catalog c = flat_catalog({{"a", {1.0, 1.0}}}, {"u"},
                                 {{"u", "a", InteractionKind::kClick, 1, false}});
  FusedCatalog fused(c, FusionWeights());
  EXPECT_EQ(build_user_vector("u", fused).values, (Vector{0.0, 0.0}));
}

TEST(BuildUserVector, EqualTimestampsAverage) {
  const Catalog c = flat_catalog({{"a", {1.0, 0.0}}, {"b", {0.0, 1.0}}}, {"u"},
                                 {like("u", "a", 5), like("u", "b", 5)});
  FusedCatalog fused(c, FusionWeights());
  const auto u = build_user_vector("u", fused, 100.0);
  EXPECT_NEAR(u.values[0], 0.5, 1e-15);
  EXPECT_NEAR(u.values[1], 0.5, 1e-15);
}

TEST(BuildUserVector, HalfLifeDiscountsOlderPositives) {
  const Catalog c = flat_catalog({{"a", {1.0, 0.0}}, {"b", {0.0, 1.0}}}, {"u"},
                                 {like("u", "a", 0), like("u", "b", 60)});
  FusedCatalog fused(c, FusionWeights());
  // weights 0.5 (one half-life old) and 1
  const auto u = build_user_vector("u", fused, 60.0);
  EXPECT_NEAR(u.values[0], 0.5 / 1.5, 1e-15);
  EXPECT_NEAR(u.values[1], 1.0 / 1.5, 1e-15);
  EXPECT_THROW(build_user_vector("nobody", fused), DataError);
}

TEST(MatchScore, KnownValues) {
  EXPECT_EQ(match_score(Vector{1.0, 0.0}, Vector{0.0, 1.0}), 0.5);
  EXPECT_NEAR(match_score(Vector{1.0, 0.0}, Vector{1.0, 0.0}), 0.731058578630004879, 1e-15);
  EXPECT_EQ(match_score(Vector{0.0, 0.0, 0.0}, Vector{3.0, -2.0, 9.0}), 0.5);
  EXPECT_THROW(match_score(Vector{1.0}, Vector{1.0, 2.0}), DataError);
}

TEST(MatchScore, StrictlyIncreasingAndScaleInvariantArgmax) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = rng.normal() * 5;
    const double b = a + std::abs(rng.normal()) + 1e-6;
    EXPECT_LT(sigmoid(a), sigmoid(b));

    Vector u(4);
    for (double& x : u) x = rng.normal();
    std::vector<Vector> vs(6, Vector(4));
    for (auto& v : vs) for (double& x : v) x = rng.normal();
    auto argmax = [&vs](const Vector& user) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < vs.size(); ++j) {
        if (match_score(user, vs[j]) > match_score(user, vs[best])) best = j;
      }
      return best;
    };
    Vector scaled = u;
    const double c = 0.1 + 3.0 * rng.uniform();
    for (double& x : scaled) x *= c;
    EXPECT_EQ(argmax(u), argmax(scaled));
  }
}

TEST(RetrieveCandidates, LargeMReturnsEverything) {
  const Catalog c = flat_catalog({{"b", {1.0, 0.0}}, {"a", {0.0, 1.0}}, {"c", {1.0, 1.0}}});
  FusedCatalog fused(c, FusionWeights());
  const auto got = retrieve_candidates({"u", {1.0, 0.0}}, fused, 10);
  EXPECT_EQ(std::set<std::size_t>(got.begin(), got.end()), (std::set<std::size_t>{0, 1, 2}));
}

TEST(RetrieveCandidates, PicksHighestCosine) {
  const Catalog c = flat_catalog({{"x", {0.0, 1.0}}, {"y", {-1.0, 0.0}}, {"z", {1.0, 0.0}}});
  FusedCatalog fused(c, FusionWeights());
  const auto got = retrieve_candidates({"u", {1.0, 0.0}}, fused, 1);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(c.videos()[got[0]].video_id, "z");
}

TEST(RetrieveCandidates, ZeroUserFallsBackToIdOrder) {
  const Catalog c = flat_catalog({{"d", {1.0}}, {"b", {2.0}}, {"a", {3.0}}, {"c", {4.0}}});
  FusedCatalog fused(c, FusionWeights());
  const auto got = retrieve_candidates({"u", {0.0}}, fused, 2);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(c.videos()[got[0]].video_id, "a");
  EXPECT_EQ(c.videos()[got[1]].video_id, "b");
  EXPECT_THROW(retrieve_candidates({"u", {0.0}}, fused, 0), UsageError);
}

TEST(RetrieveCandidates, IndependentOfCatalogOrder) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<std::string, Vector>> vids;
    for (int j = 0; j < 30; ++j) {
      // a coarse lattice so cosine ties actually happen
      vids.push_back({"v" + std::to_string(j), {double(rng.below(3)), double(rng.below(3)) - 1.0}});
    }
    auto shuffled = vids;
    for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    const Catalog c1 = flat_catalog(vids);
    const Catalog c2 = flat_catalog(shuffled);
    FusedCatalog f1(c1, FusionWeights());
    FusedCatalog f2(c2, FusionWeights());
    const InterestVector u{"u", {rng.normal(), rng.normal()}};
    const std::size_t m = 1 + rng.below(30);
    std::vector<std::string> ids1, ids2;
    for (std::size_t i : retrieve_candidates(u, f1, m)) ids1.push_back(c1.videos()[i].video_id);
    for (std::size_t i : retrieve_candidates(u, f2, m)) ids2.push_back(c2.videos()[i].video_id);
    EXPECT_EQ(ids1, ids2);
  }
}

TEST(RankTopK, FullSortWhenKCoversCandidates) {
  const Catalog c = flat_catalog({{"a", {0.1}}, {"b", {0.9}}, {"c", {0.5}}});
  FusedCatalog fused(c, FusionWeights());
  const std::vector<std::size_t> all{0, 1, 2};
  const auto list = rank_top_k({"u", {1.0}}, all, fused, 10);
  ASSERT_EQ(list.size(), 3u);
  EXPECT_EQ(list.entries[0].video_id, "b");
  EXPECT_EQ(list.entries[1].video_id, "c");
  EXPECT_EQ(list.entries[2].video_id, "a");
  EXPECT_THROW(rank_top_k({"u", {1.0}}, all, fused, 0), UsageError);
}

// Oracle: score everything, sort fully by (score desc, id asc), truncate.
RankedList sort_then_truncate(const InterestVector& u, const std::vector<std::size_t>& cands,
                              const FusedCatalog& fused, std::size_t k) {
  std::vector<RankedEntry> all;
  std::set<std::size_t> uniq(cands.begin(), cands.end());
  for (std::size_t v : uniq) {
    const double s = match_score(u.values, fused[v].values);
    all.push_back({fused[v].video_id, s});
  }
  std::sort(all.begin(), all.end(), [](const RankedEntry& a, const RankedEntry& b) {
    return a.score > b.score || (a.score == b.score && a.video_id < b.video_id);
  });
  if (all.size() > k) all.resize(k);
  return {all};
}

TEST(RankTopK, FiveCandidatesTopTwo) {
  const Catalog c = flat_catalog({{"a", {0.3}}, {"b", {-0.2}}, {"c", {0.8}}, {"d", {0.1}}, {"e", {0.6}}});
  FusedCatalog fused(c, FusionWeights());
  const std::vector<std::size_t> all{0, 1, 2, 3, 4};
  const auto list = rank_top_k({"u", {2.0}}, all, fused, 2);
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list.entries[0].video_id, "c");
  EXPECT_EQ(list.entries[1].video_id, "e");
  const auto oracle = sort_then_truncate({"u", {2.0}}, all, fused, 2);
  EXPECT_EQ(list.entries[0].video_id, oracle.entries[0].video_id);
  EXPECT_EQ(list.entries[1].video_id, oracle.entries[1].video_id);
}

TEST(RankTopK, MatchesSortThenTruncateOnRandomInstances) {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(50);
    std::vector<std::pair<std::string, Vector>> vids;
    for (std::size_t j = 0; j < n; ++j) {
      // small integer lattice: plenty of exact score ties
      vids.push_back({"v" + std::to_string(rng.below(1000)) + "_" + std::to_string(j),
                      {double(rng.below(5)) - 2.0, double(rng.below(5)) - 2.0}});
    }
    const Catalog c = flat_catalog(vids);
    FusedCatalog fused(c, FusionWeights());
    std::vector<std::size_t> cands;
    for (std::size_t j = 0; j < n; ++j) cands.push_back(j);
    for (std::size_t i = n; i > 1; --i) std::swap(cands[i - 1], cands[rng.below(i)]);
    const std::size_t k = 1 + rng.below(n);
    const InterestVector u{"u", {double(rng.below(3)) - 1.0, double(rng.below(3)) - 1.0}};
    const auto got = rank_top_k(u, cands, fused, k);
    const auto want = sort_then_truncate(u, cands, fused, k);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      ASSERT_EQ(got.entries[i].video_id, want.entries[i].video_id) << "trial " << trial;
      ASSERT_EQ(got.entries[i].score, want.entries[i].score);
    }
  }
}

TEST(RankTopK, VanishingNoiseKeepsOrder) {
  Rng data(8);
  std::vector<std::pair<std::string, Vector>> vids;
  for (int j = 0; j < 40; ++j) vids.push_back({"v" + std::to_string(j), {data.normal(), data.normal()}});
  const Catalog c = flat_catalog(vids);
  FusedCatalog fused(c, FusionWeights());
  std::vector<std::size_t> cands;
  for (std::size_t j = 0; j < vids.size(); ++j) cands.push_back(j);
  const InterestVector u{"u", {0.7, -0.3}};
  Rng rng(1);
  const NoiseConfig noise{1.0, 1e12, 0.01};
  const auto clean = rank_top_k(u, cands, fused, 10);
  const auto noisy = rank_top_k(u, cands, fused, 10, make_privatizer(Mechanism::kUniform, u, cands, fused, noise, rng));
  ASSERT_EQ(clean.size(), noisy.size());
  for (std::size_t i = 0; i < clean.size(); ++i) EXPECT_EQ(clean.entries[i].video_id, noisy.entries[i].video_id);
}

TEST(RankTopK, NoiseAssignmentIndependentOfCandidateOrder) {
  const Catalog c = flat_catalog({{"a", {0.1}}, {"b", {0.2}}, {"c", {0.3}}, {"d", {0.4}}});
  FusedCatalog fused(c, FusionWeights());
  const InterestVector u{"u", {1.0}};
  const NoiseConfig noise{1.0, 0.5, 0.01};
  Rng r1(77), r2(77);
  const std::vector<std::size_t> fwd{0, 1, 2, 3}, rev{3, 2, 1, 0};
  const auto l1 = rank_top_k(u, fwd, fused, 4, make_privatizer(Mechanism::kUniform, u, fwd, fused, noise, r1));
  const auto l2 = rank_top_k(u, rev, fused, 4, make_privatizer(Mechanism::kUniform, u, rev, fused, noise, r2));
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(l1.entries[i].video_id, l2.entries[i].video_id);
    EXPECT_EQ(l1.entries[i].score, l2.entries[i].score);
  }
}

TEST(RankedCsv, SixDecimalsAndDisplayClamp) {
  RankedList list{{{"a", 1.7}, {"b,c", 0.25}, {"d", -0.3}}};
  std::ostringstream raw, shown;
  write_ranked_csv(raw, list, false);
  write_ranked_csv(shown, list, true);
  EXPECT_EQ(raw.str(), "rank,video_id,score\n1,a,1.700000\n2,\"b,c\",0.250000\n3,d,-0.300000\n");
  EXPECT_EQ(shown.str(), "rank,video_id,score\n1,a,1.000000\n2,\"b,c\",0.250000\n3,d,0.000000\n");
  EXPECT_EQ(list.entries[0].score, 1.7);
}

}  // namespace
}  // namespace privrec
