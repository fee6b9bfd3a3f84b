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

// Data model for videos, users and interactions, plus the JSONL reader and
// writer. A Catalog is immutable once constructed.

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "privrec/errors.hpp"
#include "privrec/linalg.hpp"

namespace privrec {

struct ModalFeatureSet {
  std::string video_id;
  Vector visual;
  Vector text;
  Vector audio;

  std::size_t dimension() const noexcept { return visual.size(); }
  bool operator==(const ModalFeatureSet&) const = default;
};

enum class InteractionKind { kClick, kLike, kComment, kWatch };

inline const char* to_string(InteractionKind kind) {
  switch (kind) {
    case InteractionKind::kClick: return "click";
    case InteractionKind::kLike: return "like";
    case InteractionKind::kComment: return "comment";
    case InteractionKind::kWatch: return "watch";
  }
  return "click";
}

inline std::optional<InteractionKind> parse_interaction_kind(std::string_view text) {
  if (text == "click") return InteractionKind::kClick;
  if (text == "like") return InteractionKind::kLike;
  if (text == "comment") return InteractionKind::kComment;
  if (text == "watch") return InteractionKind::kWatch;
  return std::nullopt;
}

struct InteractionEvent {
  std::string user_id;
  std::string video_id;
  InteractionKind kind = InteractionKind::kClick;
  std::int64_t timestamp = 0;
  bool label = false;

  /// Engagement flag: likes and comments always count; clicks and watches
  /// count only when explicitly labeled.
  bool positive() const noexcept {
    return kind == InteractionKind::kLike || kind == InteractionKind::kComment || label;
  }
  bool operator==(const InteractionEvent&) const = default;
};

struct Violation {
  std::string record;
  std::string message;

  std::string describe() const { return record + ": " + message; }
};

class Catalog {
 public:
  Catalog() = default;

  Catalog(std::vector<ModalFeatureSet> videos, std::vector<std::string> users,
          std::vector<InteractionEvent> interactions)
      : videos_(std::move(videos)),
        users_(std::move(users)),
        interactions_(std::move(interactions)) {
    for (std::size_t i = 0; i < videos_.size(); ++i) video_index_.emplace(videos_[i].video_id, i);
    for (std::size_t i = 0; i < users_.size(); ++i) user_index_.emplace(users_[i], i);
    events_by_user_.resize(users_.size());
    for (std::size_t e = 0; e < interactions_.size(); ++e) {
      auto it = user_index_.find(interactions_[e].user_id);
      if (it != user_index_.end()) events_by_user_[it->second].push_back(e);
    }
    for (auto& events : events_by_user_) {
      std::stable_sort(events.begin(), events.end(), [this](std::size_t a, std::size_t b) {
        return interactions_[a].timestamp < interactions_[b].timestamp;
      });
    }
  }

  const std::vector<ModalFeatureSet>& videos() const noexcept { return videos_; }
  const std::vector<std::string>& users() const noexcept { return users_; }
  const std::vector<InteractionEvent>& interactions() const noexcept { return interactions_; }

  /// Dimension shared by all modal vectors (0 for an empty catalog).
  std::size_t dimension() const noexcept {
    return videos_.empty() ? 0 : videos_.front().dimension();
  }

  std::optional<std::size_t> find_video(const std::string& id) const {
    auto it = video_index_.find(id);
    if (it == video_index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> find_user(const std::string& id) const {
    auto it = user_index_.find(id);
    if (it == user_index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t require_user(const std::string& id) const {
    auto idx = find_user(id);
    if (!idx) throw DataError("unknown user '" + id + "'");
    return *idx;
  }

  /// Interaction indices of a user in chronological order (stable on ties).
  const std::vector<std::size_t>& events_of(std::size_t user) const {
    return events_by_user_.at(user);
  }

  /// Video indices the user interacted with positively, ascending, unique.
  std::vector<std::size_t> positive_videos(std::size_t user) const {
    std::vector<std::size_t> out;
    for (std::size_t e : events_of(user)) {
      const auto& ev = interactions_[e];
      if (!ev.positive()) continue;
      if (auto v = find_video(ev.video_id)) out.push_back(*v);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool operator==(const Catalog& other) const {
    return videos_ == other.videos_ && users_ == other.users_ &&
           interactions_ == other.interactions_;
  }

 private:
  std::vector<ModalFeatureSet> videos_;
  std::vector<std::string> users_;
  std::vector<InteractionEvent> interactions_;
  std::unordered_map<std::string, std::size_t> video_index_;
  std::unordered_map<std::string, std::size_t> user_index_;
  std::vector<std::vector<std::size_t>> events_by_user_;
};

/// Every invariant violation in the catalog; empty iff the catalog is valid.
inline std::vector<Violation> validate(const Catalog& catalog) {
  std::vector<Violation> out;
  std::map<std::string, int> seen_videos;
  const std::size_t d = catalog.dimension();
  for (const auto& v : catalog.videos()) {
    const std::string rec = "video '" + v.video_id + "'";
    if (++seen_videos[v.video_id] == 2) out.push_back({rec, "duplicate video_id"});
    if (v.visual.empty()) out.push_back({rec, "empty visual vector"});
    if (v.text.size() != v.visual.size() || v.audio.size() != v.visual.size()) {
      out.push_back({rec, "dimension mismatch across modalities (visual " +
                              std::to_string(v.visual.size()) + ", text " +
                              std::to_string(v.text.size()) + ", audio " +
                              std::to_string(v.audio.size()) + ")"});
    } else if (v.visual.size() != d) {
      out.push_back({rec, "dimension " + std::to_string(v.visual.size()) +
                              " differs from catalog dimension " + std::to_string(d)});
    }
    if (!all_finite(v.visual) || !all_finite(v.text) || !all_finite(v.audio)) {
      out.push_back({rec, "non-finite feature component"});
    }
  }
  std::map<std::string, int> seen_users;
  for (const auto& u : catalog.users()) {
    if (++seen_users[u] == 2) out.push_back({"user '" + u + "'", "duplicate user_id"});
  }
  for (std::size_t i = 0; i < catalog.interactions().size(); ++i) {
    const auto& ev = catalog.interactions()[i];
    const std::string rec = "interaction #" + std::to_string(i);
    if (!catalog.find_user(ev.user_id)) {
      out.push_back({rec, "dangling reference to unknown user '" + ev.user_id + "'"});
    }
    if (!catalog.find_video(ev.video_id)) {
      out.push_back({rec, "dangling reference to unknown video '" + ev.video_id + "'"});
    }
    if (ev.timestamp < 0) out.push_back({rec, "negative timestamp"});
  }
  return out;
}

namespace detail {

inline Vector parse_vector(const nlohmann::json& j, const char* field) {
  const auto& arr = j.at(field);
  if (!arr.is_array()) throw std::invalid_argument(std::string(field) + " is not an array");
  Vector out;
  out.reserve(arr.size());
  for (const auto& x : arr) {
    if (!x.is_number()) throw std::invalid_argument(std::string(field) + " has a non-number");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace detail

/// Reads a catalog from JSONL. Each line holds one record, discriminated by its
/// keys: a video (`visual`/`text`/`audio`), an interaction (`kind`) or a user
/// (`user_id` alone). Throws DataError on the first malformed line, or with the
/// full violation list if the parsed catalog is invalid.
inline Catalog read_catalog(std::istream& in, const std::string& source = "<stream>") {
  std::vector<ModalFeatureSet> videos;
  std::vector<std::string> users;
  std::vector<InteractionEvent> interactions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
      if (j.contains("visual") || j.contains("text") || j.contains("audio")) {
        videos.push_back({j.at("video_id").get<std::string>(), detail::parse_vector(j, "visual"),
                          detail::parse_vector(j, "text"), detail::parse_vector(j, "audio")});
      } else if (j.contains("kind")) {
        InteractionEvent ev;
        ev.user_id = j.at("user_id").get<std::string>();
        ev.video_id = j.at("video_id").get<std::string>();
        const auto kind = parse_interaction_kind(j.at("kind").get<std::string>());
        if (!kind) throw std::invalid_argument("unknown interaction kind");
        ev.kind = *kind;
        ev.timestamp = j.at("timestamp").get<std::int64_t>();
        ev.label = j.value("label", false);
        interactions.push_back(std::move(ev));
      } else if (j.contains("user_id") && j.size() == 1) {
        users.push_back(j.at("user_id").get<std::string>());
      } else {
        throw std::invalid_argument("unrecognized record type");
      }
    } catch (const std::exception& e) {
      throw DataError(source + ":" + std::to_string(line_no) + ": parse error: " + e.what());
    }
  }
  Catalog catalog(std::move(videos), std::move(users), std::move(interactions));
  const auto violations = validate(catalog);
  if (!violations.empty()) {
    std::string msg = source + ": invalid catalog:";
    for (const auto& v : violations) msg += "\n  " + v.describe();
    throw DataError(msg);
  }
  return catalog;
}

inline Catalog load_catalog(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open catalog '" + path + "'");
  return read_catalog(in, path);
}

/// Writes videos, then users, then interactions, one JSON object per line.
/// Doubles are emitted in shortest round-trip form, so reading back is lossless.
inline void write_catalog(std::ostream& out, const Catalog& catalog) {
  for (const auto& v : catalog.videos()) {
    nlohmann::ordered_json j;
    j["video_id"] = v.video_id;
    j["visual"] = v.visual;
    j["text"] = v.text;
    j["audio"] = v.audio;
    out << j.dump() << '\n';
  }
  for (const auto& u : catalog.users()) {
    nlohmann::ordered_json j;
    j["user_id"] = u;
    out << j.dump() << '\n';
  }
  for (const auto& ev : catalog.interactions()) {
    nlohmann::ordered_json j;
    j["user_id"] = ev.user_id;
    j["video_id"] = ev.video_id;
    j["kind"] = to_string(ev.kind);
    j["timestamp"] = ev.timestamp;
    j["label"] = ev.label;
    out << j.dump() << '\n';
  }
}

inline void save_catalog(const std::string& path, const Catalog& catalog) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write catalog '" + path + "'");
  write_catalog(out, catalog);
}

}  // namespace privrec
