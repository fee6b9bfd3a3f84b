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

#include "privrec/strategies.hpp"

#include <limits>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace privrec {
namespace {

using testing::ids_of;
using testing::Scored;

constexpr std::size_t kAll = std::numeric_limits<std::size_t>::max();

ModalFeatureSet same(const std::string& id, Vector v) { return {id, v, v, v}; }

InteractionEvent like(const std::string& u, const std::string& v, std::int64_t t = 1) {
  return {u, v, InteractionKind::kLike, t, true};
}

std::vector<Scored> sorted_map(const std::map<std::string, double>& m) {
  std::vector<Scored> all;
  for (const auto& [id, s] : m) all.push_back({id, s});
  return testing::sort_truncate(std::move(all), kAll);
}

// Exact binary fractions keep oracle and library arithmetic identical.
const FusionWeights kWeights(0.5, 0.25, 0.25);

TEST(Content, NearestNeighbourOfLikedVideoRanksFirst) {
  Catalog c({same("V1", {1.0, 0.0}), same("V2", {0.9, 0.1}), same("V3", {0.0, 1.0}),
             same("V4", {-1.0, 0.0})},
            {"A"}, {like("A", "V1")});
  FusedCatalog f(c, FusionWeights::uniform());
  const auto r = content_recommend("A", f, 10);
  EXPECT_EQ(ids_of(r), (std::vector<std::string>{"V2", "V3", "V4"}));
}

TEST(Content, UserWithoutPositivesGetsNothing) {
  Catalog c({same("V1", {1.0})}, {"A"}, {});
  FusedCatalog f(c, FusionWeights::uniform());
  EXPECT_TRUE(content_recommend("A", f, 5).entries.empty());
  EXPECT_THROW(content_recommend("nobody", f, 5), DataError);
}

TEST(Similarity, JaccardByHand) {
  Catalog c({same("V1", {1.0}), same("V2", {1.0}), same("V3", {1.0})}, {"A", "B", "C"},
            {like("A", "V1"), like("A", "V2"), like("B", "V1"), like("B", "V3")});
  EXPECT_DOUBLE_EQ(user_similarity("A", "B", c), 1.0 / 3.0);
  EXPECT_EQ(user_similarity("A", "C", c), 0.0);
  EXPECT_EQ(user_similarity("A", "B", c), user_similarity("B", "A", c));
}

TEST(Collaborative, SharedTasteTransfersVideo) {
  Catalog c({same("V1", {1.0}), same("V2", {1.0})}, {"A", "B"},
            {like("A", "V1"), like("B", "V1"), like("B", "V2")});
  const auto r = cf_recommend("A", c, 10, 10);
  EXPECT_EQ(ids_of(r), std::vector<std::string>{"V2"});
  EXPECT_THROW(cf_recommend("A", c, 10, 0), UsageError);
}

TEST(Collaborative, NeighbourCountKeepsMostSimilar) {
  // B matches A exactly, C only partially; with one neighbour only B votes.
  Catalog c({same("V1", {1.0}), same("V2", {1.0}), same("V3", {1.0}), same("V4", {1.0})},
            {"A", "B", "C"},
            {like("A", "V1"), like("A", "V2"), like("B", "V1"), like("B", "V2"), like("B", "V3"),
             like("C", "V1"), like("C", "V4")});
  EXPECT_EQ(ids_of(cf_recommend("A", c, 10, 1)), std::vector<std::string>{"V3"});
  EXPECT_EQ(ids_of(cf_recommend("A", c, 10, 2)), (std::vector<std::string>{"V3", "V4"}));
}

TEST(Hybrid, ChainingAddsContentNeighbour) {
  Catalog c({same("V1", {1.0, 0.0, 0.0}), same("V2", {0.0, 1.0, 0.0}),
             same("V3", {0.0, 0.99, 0.05}), same("V4", {0.0, 0.0, 1.0})},
            {"A", "B"}, {like("A", "V1"), like("B", "V1"), like("B", "V2")});
  FusedCatalog f(c, FusionWeights::uniform());
  HybridOptions opts;
  opts.blend = 1.0;
  EXPECT_EQ(ids_of(hybrid_recommend("A", f, 5, opts)), std::vector<std::string>{"V2"});
  opts.chaining = true;
  const auto chained = hybrid_recommend("A", f, 5, opts);
  EXPECT_EQ(ids_of(chained), (std::vector<std::string>{"V2", "V3"}));
  EXPECT_EQ(chained.entries[1].score, chained.entries[0].score);
  EXPECT_EQ(ids_of(hybrid_recommend("A", f, 1, opts)), std::vector<std::string>{"V2"});
}

TEST(Hybrid, RejectsBadOptions) {
  Catalog c({same("V1", {1.0})}, {"A"}, {});
  FusedCatalog f(c, FusionWeights::uniform());
  HybridOptions opts;
  opts.blend = 1.5;
  EXPECT_THROW(hybrid_recommend("A", f, 3, opts), UsageError);
}

TEST(Hybrid, DegenerateBlendsReproducePureStrategies) {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const Catalog c = testing::random_catalog(rng);
    FusedCatalog f(c, kWeights);
    for (const auto& u : c.users()) {
      HybridOptions opts;
      opts.neighbor_count = c.users().size();
      opts.blend = 0.0;
      EXPECT_EQ(ids_of(hybrid_recommend(u, f, 5, opts)), ids_of(content_recommend(u, f, 5)));
      opts.blend = 1.0;
      EXPECT_EQ(ids_of(hybrid_recommend(u, f, 5, opts)),
                ids_of(cf_recommend(u, c, 5, opts.neighbor_count)));
    }
  }
}

TEST(Group, SingleMemberMatchesOwnVector) {
  Catalog c({same("V1", {1.0, 0.0}), same("V2", {0.5, 0.5}), same("V3", {-1.0, 0.2})}, {"A"},
            {like("A", "V1")});
  FusedCatalog f(c, FusionWeights::uniform());
  const std::vector<std::string> members{"A"};
  const auto u = build_user_vector("A", f);
  std::vector<std::size_t> cands{1, 2};
  EXPECT_EQ(ids_of(group_recommend(members, f, 5)), ids_of(rank_top_k(u, cands, f, 5)));
}

TEST(Group, OppositeMembersFallBackToIdOrder) {
  Catalog c({same("P", {1.0, 0.0}), same("N", {-1.0, 0.0}), same("B", {0.3, 0.7}),
             same("A", {0.1, -0.4})},
            {"u1", "u2"}, {like("u1", "P"), like("u2", "N")});
  FusedCatalog f(c, FusionWeights::uniform());
  const std::vector<std::string> members{"u1", "u2"};
  const auto g = build_group_profile(members, f);
  EXPECT_EQ(g.fused_interest.values, (Vector{0.0, 0.0}));
  const auto r = group_recommend(members, f, 10);
  EXPECT_EQ(ids_of(r), (std::vector<std::string>{"A", "B", "N", "P"}));
  for (const auto& e : r.entries) EXPECT_EQ(e.score, 0.5);
}

TEST(Group, CentroidClosestVideoRanksFirst) {
  Catalog c({same("V1", {1.0, 0.0, 0.0}), same("V2", {0.0, 1.0, 0.0}), same("V3", {0.0, 0.0, 1.0}),
             same("V4", {0.6, 0.6, 0.6}), same("V5", {1.0, 0.1, 0.0})},
            {"a", "b", "c"}, {like("a", "V1"), like("b", "V2"), like("c", "V3")});
  FusedCatalog f(c, FusionWeights::uniform());
  const std::vector<std::string> members{"a", "b", "c"};
  const auto r = group_recommend(members, f, 10);
  ASSERT_FALSE(r.entries.empty());
  EXPECT_EQ(r.entries[0].video_id, "V4");
  // nobody liked everything, so every video stays eligible
  EXPECT_EQ(r.entries.size(), 5u);
}

TEST(Group, RejectsBadMemberLists) {
  Catalog c({same("V1", {1.0})}, {"a"}, {});
  FusedCatalog f(c, FusionWeights::uniform());
  EXPECT_THROW(group_recommend(std::vector<std::string>{}, f, 3), UsageError);
  EXPECT_THROW(group_recommend(std::vector<std::string>{"a", "a"}, f, 3), UsageError);
  EXPECT_THROW(group_recommend(std::vector<std::string>{"a", "zz"}, f, 3), DataError);
}

TEST(Oracle, ContentMatchesBruteForce) {
  Rng rng(1001);
  for (int trial = 0; trial < 1000; ++trial) {
    const Catalog c = testing::random_catalog(rng);
    FusedCatalog f(c, kWeights);
    const std::size_t k = 1 + rng.below(8);
    for (const auto& u : c.users()) {
      std::string why;
      EXPECT_TRUE(testing::same_ranking(content_recommend(u, f, k),
                                        sorted_map(testing::content_oracle_scores(c, kWeights, u)),
                                        k, &why))
          << "trial " << trial << " user " << u << ": " << why;
    }
  }
}

TEST(Oracle, CollaborativeMatchesBruteForce) {
  Rng rng(1002);
  for (int trial = 0; trial < 1000; ++trial) {
    const Catalog c = testing::random_catalog(rng);
    const std::size_t k = 1 + rng.below(8);
    for (const auto& u : c.users()) {
      std::string why;
      EXPECT_TRUE(testing::same_ranking(cf_recommend(u, c, k, c.users().size()),
                                        sorted_map(testing::cf_oracle_scores(c, u)), k, &why))
          << "trial " << trial << " user " << u << ": " << why;
    }
  }
}

TEST(Oracle, HybridMatchesBruteForce) {
  Rng rng(1003);
  for (int trial = 0; trial < 1000; ++trial) {
    const Catalog c = testing::random_catalog(rng);
    FusedCatalog f(c, kWeights);
    const std::size_t k = 1 + rng.below(8);
    HybridOptions opts;
    opts.blend = static_cast<double>(rng.below(5)) / 4.0;
    opts.neighbor_count = c.users().size();
    for (const auto& u : c.users()) {
      std::string why;
      EXPECT_TRUE(testing::same_ranking(hybrid_recommend(u, f, k, opts),
                                        testing::hybrid_oracle(c, kWeights, u, opts.blend, kAll),
                                        k, &why))
          << "trial " << trial << " user " << u << ": " << why;
    }
  }
}

TEST(Oracle, GroupMatchesBruteForce) {
  Rng rng(1004);
  for (int trial = 0; trial < 1000; ++trial) {
    const Catalog c = testing::random_catalog(rng);
    FusedCatalog f(c, kWeights);
    const std::size_t k = 1 + rng.below(8);
    std::vector<std::string> members;
    for (const auto& u : c.users()) {
      if (members.empty() || rng.uniform() < 0.5) members.push_back(u);
    }
    std::string why;
    EXPECT_TRUE(testing::same_ranking(group_recommend(members, f, k),
                                      testing::group_oracle(c, kWeights, members, kAll), k, &why))
        << "trial " << trial << ": " << why;
  }
}

TEST(Property, LikedVideosAreNeverRecommended) {
  Rng rng(1005);
  for (int trial = 0; trial < 300; ++trial) {
    const Catalog c = testing::random_catalog(rng);
    FusedCatalog f(c, kWeights);
    for (const auto& u : c.users()) {
      const auto own = testing::liked(c, u);
      HybridOptions opts;
      opts.chaining = true;
      opts.chain_threshold = 0.5;
      for (const auto& list : {content_recommend(u, f, 50), cf_recommend(u, c, 50, 10),
                               hybrid_recommend(u, f, 50, opts)}) {
        for (const auto& e : list.entries) {
          EXPECT_EQ(own.count(e.video_id), 0u) << "trial " << trial << " user " << u;
        }
      }
    }
  }
}

TEST(Property, SimilarityIsSymmetricAndBounded) {
  Rng rng(1006);
  for (int trial = 0; trial < 200; ++trial) {
    const Catalog c = testing::random_catalog(rng);
    for (const auto& a : c.users()) {
      EXPECT_EQ(user_similarity(a, a, c), testing::liked(c, a).empty() ? 0.0 : 1.0);
      for (const auto& b : c.users()) {
        const double s = user_similarity(a, b, c);
        EXPECT_EQ(s, user_similarity(b, a, c));
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, 1.0);
      }
    }
  }
}

}  // namespace
}  // namespace privrec
