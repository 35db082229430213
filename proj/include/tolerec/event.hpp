// Copyright 2026 The tolerec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "tolerec/detail/parallel.hpp"
#include "tolerec/errors.hpp"

namespace tolerec {

using Timestamp = std::int64_t;

enum class Platform { Ecommerce, Video };

inline std::string_view to_string(Platform p) {
  return p == Platform::Ecommerce ? "ecommerce" : "video";
}

inline std::optional<Platform> platform_from_string(std::string_view s) {
  if (s == "ecommerce") return Platform::Ecommerce;
  if (s == "video") return Platform::Video;
  return std::nullopt;
}

enum class Action : std::uint8_t { Cart, Favorite, Purchase, Like, Comment, Share, Follow };

inline constexpr std::array<Action, 7> kAllActions = {
    Action::Cart,    Action::Favorite, Action::Purchase, Action::Like,
    Action::Comment, Action::Share,    Action::Follow};

inline std::string_view to_string(Action a) {
  static constexpr std::array<std::string_view, 7> names = {
      "cart", "favorite", "purchase", "like", "comment", "share", "follow"};
  return names[static_cast<std::size_t>(a)];
}

inline std::optional<Action> action_from_string(std::string_view s) {
  for (Action a : kAllActions)
    if (to_string(a) == s) return a;
  return std::nullopt;
}

// Set of follow-up actions, stored as a bitmask in declaration order.
class ActionSet {
 public:
  constexpr ActionSet() = default;
  constexpr ActionSet(std::initializer_list<Action> actions) {
    for (Action a : actions) insert(a);
  }

  constexpr void insert(Action a) { bits_ |= bit(a); }
  constexpr bool contains(Action a) const { return (bits_ & bit(a)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool intersects(ActionSet other) const { return (bits_ & other.bits_) != 0; }
  constexpr std::uint8_t bits() const { return bits_; }

  friend constexpr bool operator==(ActionSet, ActionSet) = default;

 private:
  static constexpr std::uint8_t bit(Action a) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(a));
  }
  std::uint8_t bits_ = 0;
};

// Follow-up actions that mark deep engagement, per platform.
inline constexpr ActionSet kEcommercePositiveActions = {Action::Cart, Action::Favorite,
                                                        Action::Purchase};
inline constexpr ActionSet kVideoPositiveActions = {Action::Like, Action::Comment, Action::Share,
                                                    Action::Follow};

// One user-item interaction. watch/item durations exist only for video.
struct InteractionEvent {
  std::string user_id;
  std::string item_id;
  Timestamp timestamp = 0;
  Platform platform = Platform::Ecommerce;
  bool clicked = false;
  std::optional<double> watch_duration;
  std::optional<double> item_duration;
  ActionSet followup_actions;

  friend bool operator==(const InteractionEvent&, const InteractionEvent&) = default;
};

// Half-open [start, end).
struct TimeWindow {
  Timestamp start = 0;
  Timestamp end = 0;

  TimeWindow() = default;
  TimeWindow(Timestamp s, Timestamp e) : start(s), end(e) {
    if (!(s < e)) throw DomainError("time window requires start < end");
  }
  bool contains(Timestamp t) const { return t >= start && t < end; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

// Throws ValidationError naming the first field that breaks an invariant.
inline void validate_event(const InteractionEvent& e, std::size_t line = 0) {
  if (e.user_id.empty()) throw ValidationError(line, "user", "must be non-empty");
  if (e.item_id.empty()) throw ValidationError(line, "item", "must be non-empty");
  if (e.platform == Platform::Video) {
    if (!e.watch_duration) throw ValidationError(line, "watch", "required for video events");
    if (!e.item_duration) throw ValidationError(line, "duration", "required for video events");
    if (!std::isfinite(*e.watch_duration) || *e.watch_duration < 0.0)
      throw ValidationError(line, "watch", "must be a finite non-negative number");
    if (!std::isfinite(*e.item_duration) || *e.item_duration <= 0.0)
      throw ValidationError(line, "duration", "must be a finite positive number");
  } else {
    if (e.watch_duration) throw ValidationError(line, "watch", "not allowed for ecommerce events");
    if (e.item_duration)
      throw ValidationError(line, "duration", "not allowed for ecommerce events");
  }
  if (!e.followup_actions.empty() && !e.clicked)
    throw ValidationError(line, "actions", "follow-up actions require clicked=true");
}

// Parses one line of the event file. `line` is only used in error messages.
inline InteractionEvent parse_event(std::string_view text, std::size_t line = 0) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line, "record must be a JSON object");

  static constexpr std::array<std::string_view, 8> known = {
      "user", "item", "ts", "platform", "clicked", "watch", "duration", "actions"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ParseError(line, "unknown key '" + key + "'");
  }

  auto require = [&](const char* key) -> const nlohmann::json& {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(line, std::string("missing key '") + key + "'");
    return *it;
  };

  InteractionEvent e;
  const auto& user = require("user");
  const auto& item = require("item");
  const auto& ts = require("ts");
  const auto& platform = require("platform");
  const auto& clicked = require("clicked");
  if (!user.is_string()) throw ParseError(line, "'user' must be a string");
  if (!item.is_string()) throw ParseError(line, "'item' must be a string");
  if (!ts.is_number_integer()) throw ParseError(line, "'ts' must be an integer");
  if (!platform.is_string()) throw ParseError(line, "'platform' must be a string");
  if (!clicked.is_boolean()) throw ParseError(line, "'clicked' must be a boolean");

  e.user_id = user.get<std::string>();
  e.item_id = item.get<std::string>();
  e.timestamp = ts.get<Timestamp>();
  auto p = platform_from_string(platform.get<std::string>());
  if (!p) throw ValidationError(line, "platform", "expected \"ecommerce\" or \"video\"");
  e.platform = *p;
  e.clicked = clicked.get<bool>();

  auto optional_number = [&](const char* key) -> std::optional<double> {
    auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    if (!it->is_number()) throw ParseError(line, std::string("'") + key + "' must be a number");
    return it->get<double>();
  };
  e.watch_duration = optional_number("watch");
  e.item_duration = optional_number("duration");

  if (auto it = j.find("actions"); it != j.end()) {
    if (!it->is_array()) throw ParseError(line, "'actions' must be an array");
    for (const auto& a : *it) {
      if (!a.is_string()) throw ParseError(line, "'actions' entries must be strings");
      auto action = action_from_string(a.get<std::string>());
      if (!action)
        throw ValidationError(line, "actions", "unknown action '" + a.get<std::string>() + "'");
      e.followup_actions.insert(*action);
    }
  }

  validate_event(e, line);
  return e;
}

// Canonical single-line JSON; parse_event(to_json_line(e)) == e.
inline std::string to_json_line(const InteractionEvent& e) {
  nlohmann::ordered_json j;
  j["user"] = e.user_id;
  j["item"] = e.item_id;
  j["ts"] = e.timestamp;
  j["platform"] = std::string(to_string(e.platform));
  j["clicked"] = e.clicked;
  if (e.watch_duration) j["watch"] = *e.watch_duration;
  if (e.item_duration) j["duration"] = *e.item_duration;
  if (!e.followup_actions.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (Action a : kAllActions)
      if (e.followup_actions.contains(a)) arr.push_back(std::string(to_string(a)));
    j["actions"] = std::move(arr);
  }
  return j.dump();
}

// Orders by (user_id, timestamp); the labeler relies on this order.
inline bool event_order_less(const InteractionEvent& a, const InteractionEvent& b) {
  return std::tie(a.user_id, a.timestamp) < std::tie(b.user_id, b.timestamp);
}

inline bool is_sorted_by_user_time(const std::vector<InteractionEvent>& events) {
  return std::is_sorted(events.begin(), events.end(), event_order_less);
}

struct Rejection {
  std::size_t line = 0;
  std::string message;
};

struct IngestResult {
  std::vector<InteractionEvent> events;  // sorted by (user_id, timestamp)
  std::size_t records = 0;               // non-blank lines read
  std::vector<Rejection> rejections;

  std::size_t rejected() const { return rejections.size(); }
};

// Parses and validates every line, then stable-sorts by (user_id, timestamp).
// Throws IoError when the file cannot be read and FormatMismatchError when
// more than half of the records are rejected.
inline IngestResult ingest_lines(const std::vector<std::string>& lines, std::size_t threads = 1) {
  struct Slot {
    std::optional<InteractionEvent> event;
    std::optional<Rejection> rejection;
  };
  std::vector<Slot> slots(lines.size());
  detail::parallel_for(lines.size(), threads, [&](std::size_t i) {
    const std::string& raw = lines[i];
    if (raw.find_first_not_of(" \t\r") == std::string::npos) return;
    try {
      slots[i].event = parse_event(raw, i + 1);
    } catch (const Error& e) {
      slots[i].rejection = Rejection{i + 1, e.what()};
    }
  });

  IngestResult out;
  for (auto& s : slots) {
    if (s.event) {
      ++out.records;
      out.events.push_back(std::move(*s.event));
    } else if (s.rejection) {
      ++out.records;
      out.rejections.push_back(std::move(*s.rejection));
    }
  }
  if (out.records > 0 && out.rejected() * 2 > out.records) {
    throw FormatMismatchError(std::to_string(out.rejected()) + " of " +
                              std::to_string(out.records) +
                              " records rejected; first: " + out.rejections.front().message);
  }
  std::stable_sort(out.events.begin(), out.events.end(), event_order_less);
  return out;
}

inline IngestResult ingest_log(const std::string& path, std::size_t threads = 1) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open event file '" + path + "'");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  if (in.bad()) throw IoError("read error on '" + path + "'");
  return ingest_lines(lines, threads);
}

}  // namespace tolerec
