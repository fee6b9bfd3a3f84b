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

// Synthetic catalogs with topic structure.
//
// Topic centers are drawn uniformly on the unit sphere. Every video belongs
// to one topic and each of its modal vectors is the topic center plus
// independent N(0, noise^2) components, so modalities agree through the topic.
// A user is a sharpened random mixture of topics scaled by `affinity`; the
// user is shown `events_per_user` distinct videos, drawn without replacement
// with weight exp(exposure * user . fused) (fused under equal weights), and
// engages with each one with probability sigmoid(user . fused).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "privrec/errors.hpp"
#include "privrec/feature_store.hpp"
#include "privrec/linalg.hpp"
#include "privrec/rng.hpp"
#include "privrec/scoring.hpp"

namespace privrec {

struct SynthesisSpec {
  std::size_t users = 100;
  std::size_t videos = 500;
  std::size_t dim = 16;
  std::size_t topics = 5;
  double noise = 0.1;
  std::uint64_t seed = 1;
  std::size_t events_per_user = 60;
  double affinity = 6.0;
  double mixture_sharpness = 3.0;
  double exposure = 1.0;

  void validate() const {
    if (users < 1 || videos < 1 || dim < 1 || topics < 1) {
      throw UsageError("synthesis needs users, videos, dim and topics >= 1");
    }
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw UsageError("noise must be >= 0");
    if (!(affinity >= 0.0) || !std::isfinite(affinity)) throw UsageError("affinity must be >= 0");
    if (!(mixture_sharpness > 0.0)) throw UsageError("mixture_sharpness must be positive");
    if (!(exposure >= 0.0) || !std::isfinite(exposure)) throw UsageError("exposure must be >= 0");
  }
};

inline void to_json(nlohmann::json& j, const SynthesisSpec& s) {
  j = nlohmann::json{{"users", s.users},
                     {"videos", s.videos},
                     {"dim", s.dim},
                     {"topics", s.topics},
                     {"noise", s.noise},
                     {"seed", s.seed},
                     {"events_per_user", s.events_per_user},
                     {"affinity", s.affinity},
                     {"mixture_sharpness", s.mixture_sharpness},
                     {"exposure", s.exposure}};
}

namespace detail {

inline std::string padded_id(char prefix, std::size_t i, std::size_t count) {
  int width = 1;
  for (std::size_t c = count > 0 ? count - 1 : 0; c >= 10; c /= 10) ++width;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, i);
  return buf;
}

}  // namespace detail

inline Catalog synthesize(const SynthesisSpec& spec) {
  spec.validate();
  const Rng root(spec.seed);
  Rng topic_rng = root.split(1);
  Rng video_rng = root.split(2);
  Rng user_rng = root.split(3);
  Rng event_rng = root.split(4);

  std::vector<Vector> centers(spec.topics, Vector(spec.dim));
  for (auto& c : centers) {
    double n = 0.0;
    while (n == 0.0) {
      for (double& x : c) x = topic_rng.normal();
      n = norm(c);
    }
    for (double& x : c) x /= n;
  }

  std::vector<ModalFeatureSet> videos;
  videos.reserve(spec.videos);
  for (std::size_t j = 0; j < spec.videos; ++j) {
    const auto& center = centers[video_rng.below(spec.topics)];
    ModalFeatureSet v{detail::padded_id('v', j, spec.videos), center, center, center};
    for (Vector* modal : {&v.visual, &v.text, &v.audio}) {
      for (double& x : *modal) x += spec.noise * video_rng.normal();
    }
    videos.push_back(std::move(v));
  }

  std::vector<std::string> users;
  std::vector<Vector> latent;
  users.reserve(spec.users);
  for (std::size_t i = 0; i < spec.users; ++i) {
    users.push_back(detail::padded_id('u', i, spec.users));
    std::vector<double> mix(spec.topics);
    double total = 0.0;
    for (double& m : mix) {
      m = std::pow(-std::log(user_rng.uniform()), spec.mixture_sharpness);
      total += m;
    }
    Vector u(spec.dim, 0.0);
    for (std::size_t t = 0; t < spec.topics; ++t) {
      for (std::size_t k = 0; k < spec.dim; ++k) {
        u[k] += spec.affinity * (mix[t] / total) * centers[t][k];
      }
    }
    latent.push_back(std::move(u));
  }

  std::vector<Vector> fused(spec.videos, Vector(spec.dim));
  for (std::size_t j = 0; j < spec.videos; ++j) {
    for (std::size_t k = 0; k < spec.dim; ++k) {
      fused[j][k] = (videos[j].visual[k] + videos[j].text[k] + videos[j].audio[k]) / 3.0;
    }
  }

  constexpr std::int64_t kEpoch = 1'600'000'000;
  std::vector<InteractionEvent> interactions;
  const std::size_t shown = std::min(spec.events_per_user, spec.videos);
  struct Key {
    double key;
    std::size_t video;
  };
  std::vector<Key> keys(spec.videos);
  for (std::size_t i = 0; i < spec.users; ++i) {
    // Gumbel-top-k: weighted sampling without replacement.
    for (std::size_t j = 0; j < spec.videos; ++j) {
      const double log_w = spec.exposure * dot(latent[i], fused[j]);
      keys[j] = {log_w - std::log(-std::log(event_rng.uniform())), j};
    }
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(shown), keys.end(),
                      [](const Key& a, const Key& b) {
                        return a.key != b.key ? a.key > b.key : a.video < b.video;
                      });
    // viewing order is independent of the exposure weight
    for (std::size_t e = shown; e > 1; --e) std::swap(keys[e - 1], keys[event_rng.below(e)]);
    for (std::size_t e = 0; e < shown; ++e) {
      const std::size_t j = keys[e].video;
      const bool positive = event_rng.uniform() < sigmoid(dot(latent[i], fused[j]));
      const double style = event_rng.uniform();
      InteractionEvent ev;
      ev.user_id = users[i];
      ev.video_id = videos[j].video_id;
      ev.timestamp = kEpoch + static_cast<std::int64_t>(i * 100'000 + e * 60);
      if (positive) {
        ev.kind = style < 0.25 ? InteractionKind::kComment : InteractionKind::kLike;
        ev.label = true;
      } else {
        ev.kind = style < 0.5 ? InteractionKind::kClick : InteractionKind::kWatch;
        ev.label = false;
      }
      interactions.push_back(std::move(ev));
    }
  }
  return Catalog(std::move(videos), std::move(users), std::move(interactions));
}

}  // namespace privrec
