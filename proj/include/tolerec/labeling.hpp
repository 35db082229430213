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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tolerec/detail/numeric.hpp"
#include "tolerec/detail/parallel.hpp"
#include "tolerec/errors.hpp"
#include "tolerec/event.hpp"

namespace tolerec {

enum class Label { Positive, Tolerance, Negative };

inline char to_char(Label l) {
  switch (l) {
    case Label::Positive: return 'P';
    case Label::Tolerance: return 'T';
    case Label::Negative: return 'N';
  }
  return '?';
}

inline std::optional<Label> label_from_string(std::string_view s) {
  if (s == "P") return Label::Positive;
  if (s == "T") return Label::Tolerance;
  if (s == "N") return Label::Negative;
  return std::nullopt;
}

// How a video engagement is split into Positive and Tolerance.
//   RatioOrAction: positive if ratio >= threshold OR a positive follow-up action exists.
//   RatioOnly:     positive iff ratio >= threshold (the rule used for online serving).
enum class RuleMode { RatioOrAction, RatioOnly };

// Which completion average the tolerance weight beta is normalized against.
enum class BetaReference { UserMean, PopulationMean };

enum class LabelMode { Causal, LeaveOneOut };

// Seed for the population mean before any watch ratio has been observed.
inline constexpr double kGlobalMeanSeed = 0.5;

struct LabelingConfig {
  RuleMode rule_mode = RuleMode::RatioOrAction;
  // Item-duration bucket boundaries in seconds: bucket k holds durations in
  // [edges[k-1], edges[k]). No edges means a single bucket.
  std::vector<double> duration_bucket_edges = {60.0, 300.0};
  std::uint32_t min_history = 5;
  double ratio_cap = 1.0;
  BetaReference beta_reference = BetaReference::UserMean;

  void validate() const {
    for (std::size_t i = 1; i < duration_bucket_edges.size(); ++i)
      if (!(duration_bucket_edges[i - 1] < duration_bucket_edges[i]))
        throw ConfigError("duration bucket edges must be strictly ascending");
    if (min_history < 1) throw ConfigError("min_history must be >= 1");
    if (!(ratio_cap > 0.0 && ratio_cap <= 1.0)) throw ConfigError("ratio_cap must be in (0, 1]");
  }

  std::size_t bucket_count() const { return duration_bucket_edges.size() + 1; }

  std::size_t bucket_of(double item_duration) const {
    return static_cast<std::size_t>(std::upper_bound(duration_bucket_edges.begin(),
                                                     duration_bucket_edges.end(), item_duration) -
                                    duration_bucket_edges.begin());
  }
};

struct UserProfile {
  std::string user_id;
  // Running mean of capped watch ratios, one per duration bucket.
  std::vector<detail::RunningMean> buckets;
  std::uint64_t click_count = 0;

  UserProfile() = default;
  UserProfile(std::string id, const LabelingConfig& config)
      : user_id(std::move(id)), buckets(config.bucket_count()) {}
};

struct LabeledSample {
  std::string user_id;
  std::string item_id;
  Timestamp timestamp = 0;
  Label label = Label::Negative;
  std::optional<double> beta;  // set iff label == Tolerance

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

// Capped completion ratio of a video event.
inline double watch_ratio(const InteractionEvent& e, double ratio_cap = 1.0) {
  if (e.platform != Platform::Video || !e.watch_duration || !e.item_duration)
    throw DomainError("watch_ratio requires a video event");
  if (!(*e.item_duration > 0.0)) throw DomainError("watch_ratio requires item_duration > 0");
  return std::min(*e.watch_duration / *e.item_duration, ratio_cap);
}

inline bool is_engaged_video(const InteractionEvent& e) {
  return e.platform == Platform::Video && e.clicked;
}

inline UserProfile update_profile(UserProfile profile, const InteractionEvent& e,
                                  const LabelingConfig& config) {
  if (e.user_id != profile.user_id)
    throw DomainError("event user '" + e.user_id + "' does not match profile '" +
                      profile.user_id + "'");
  if (profile.buckets.size() != config.bucket_count()) profile.buckets.resize(config.bucket_count());
  if (!e.clicked) return profile;
  if (e.platform == Platform::Ecommerce) {
    ++profile.click_count;
  } else {
    profile.buckets[config.bucket_of(*e.item_duration)].add(watch_ratio(e, config.ratio_cap));
  }
  return profile;
}

// The personalized threshold for an event: the bucket mean if the bucket has
// at least min_history ratios, otherwise the population mean.
inline double personal_threshold(const detail::RunningMean& bucket, double global_mean,
                                 const LabelingConfig& config) {
  return bucket.count >= config.min_history ? bucket.mean : global_mean;
}

namespace detail {

inline LabeledSample make_sample(const InteractionEvent& e, Label label,
                                 std::optional<double> beta = std::nullopt) {
  return LabeledSample{e.user_id, e.item_id, e.timestamp, label, beta};
}

// Video decision given the already-resolved bucket statistics.
inline LabeledSample label_video(const InteractionEvent& e, const RunningMean& bucket,
                                 double global_mean, const LabelingConfig& config) {
  if (!e.clicked) return make_sample(e, Label::Negative);
  const double ratio = watch_ratio(e, config.ratio_cap);
  const double threshold = personal_threshold(bucket, global_mean, config);
  bool positive = ratio >= threshold;
  if (config.rule_mode == RuleMode::RatioOrAction)
    positive = positive || e.followup_actions.intersects(kVideoPositiveActions);
  if (positive) return make_sample(e, Label::Positive);

  const double reference =
      config.beta_reference == BetaReference::UserMean ? threshold : global_mean;
  const double beta = reference > 0.0 ? std::clamp(ratio / reference, 0.0, 1.0) : 0.0;
  return make_sample(e, Label::Tolerance, beta);
}

inline LabeledSample label_ecommerce(const InteractionEvent& e) {
  if (!e.clicked) return make_sample(e, Label::Negative);
  if (e.followup_actions.intersects(kEcommercePositiveActions))
    return make_sample(e, Label::Positive);
  // No graded completion signal exists for a bare click.
  return make_sample(e, Label::Tolerance, 0.0);
}

}  // namespace detail

inline LabeledSample label_event(const InteractionEvent& e, const UserProfile& profile,
                                 double global_mean, const LabelingConfig& config) {
  if (e.platform == Platform::Ecommerce) return detail::label_ecommerce(e);
  const std::size_t b = config.bucket_of(*e.item_duration);
  const detail::RunningMean empty;
  const auto& bucket = b < profile.buckets.size() ? profile.buckets[b] : empty;
  return detail::label_video(e, bucket, global_mean, config);
}

struct LabelLogResult {
  std::vector<LabeledSample> samples;  // parallel to the input events
  std::vector<UserProfile> profiles;   // full-history profiles in user order
  double global_mean = kGlobalMeanSeed;
};

namespace detail {

struct UserRange {
  std::size_t begin;
  std::size_t end;
};

inline std::vector<UserRange> user_ranges(const std::vector<InteractionEvent>& events) {
  std::vector<UserRange> ranges;
  for (std::size_t i = 0; i < events.size();) {
    std::size_t j = i + 1;
    while (j < events.size() && events[j].user_id == events[i].user_id) ++j;
    ranges.push_back({i, j});
    i = j;
  }
  return ranges;
}

// Population mean of capped ratios over engaged video events with timestamp
// strictly before a query time.
class CausalGlobalMean {
 public:
  CausalGlobalMean(const std::vector<InteractionEvent>& events, const LabelingConfig& config) {
    std::vector<std::pair<Timestamp, double>> timeline;
    for (const auto& e : events)
      if (is_engaged_video(e)) timeline.emplace_back(e.timestamp, watch_ratio(e, config.ratio_cap));
    std::stable_sort(timeline.begin(), timeline.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    times_.reserve(timeline.size());
    prefix_.reserve(timeline.size() + 1);
    RunningMean acc;
    prefix_.push_back(acc);
    for (const auto& [t, r] : timeline) {
      times_.push_back(t);
      acc.add(r);
      prefix_.push_back(acc);
    }
  }

  double before(Timestamp t) const {
    const auto k = static_cast<std::size_t>(std::lower_bound(times_.begin(), times_.end(), t) -
                                            times_.begin());
    return k == 0 ? kGlobalMeanSeed : prefix_[k].mean;
  }

  double overall() const { return prefix_.back().count == 0 ? kGlobalMeanSeed : prefix_.back().mean; }

 private:
  std::vector<Timestamp> times_;
  std::vector<RunningMean> prefix_;
};

// Mean over a sequence with one element removed, from prefix/suffix running means.
class LeaveOneOutMeans {
 public:
  explicit LeaveOneOutMeans(const std::vector<double>& values) : prefix_(values.size() + 1),
                                                                  suffix_(values.size() + 1) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      prefix_[i + 1] = prefix_[i];
      prefix_[i + 1].add(values[i]);
    }
    for (std::size_t i = values.size(); i-- > 0;) {
      suffix_[i] = suffix_[i + 1];
      suffix_[i].add(values[i]);
    }
  }

  RunningMean without(std::size_t i) const { return RunningMean::combine(prefix_[i], suffix_[i + 1]); }
  RunningMean all() const { return prefix_.back(); }

 private:
  std::vector<RunningMean> prefix_;
  std::vector<RunningMean> suffix_;
};

inline void label_user_causal(const std::vector<InteractionEvent>& events, UserRange range,
                              const CausalGlobalMean& global, const LabelingConfig& config,
                              std::vector<LabeledSample>& out, UserProfile& profile) {
  // Events sharing a timestamp are labeled against the same prior profile.
  for (std::size_t i = range.begin; i < range.end;) {
    std::size_t j = i;
    while (j < range.end && events[j].timestamp == events[i].timestamp) ++j;
    const double g = global.before(events[i].timestamp);
    for (std::size_t k = i; k < j; ++k) out[k] = label_event(events[k], profile, g, config);
    for (std::size_t k = i; k < j; ++k) profile = update_profile(std::move(profile), events[k], config);
    i = j;
  }
}

inline void label_user_loo(const std::vector<InteractionEvent>& events, UserRange range,
                           const LeaveOneOutMeans& global,
                           const std::vector<std::size_t>& global_position,
                           const LabelingConfig& config, std::vector<LabeledSample>& out,
                           UserProfile& profile) {
  // Per-bucket ratio sequences and each event's position inside its bucket.
  std::vector<std::vector<double>> ratios(config.bucket_count());
  std::vector<std::size_t> position(range.end - range.begin, 0);
  for (std::size_t k = range.begin; k < range.end; ++k) {
    const auto& e = events[k];
    if (!is_engaged_video(e)) continue;
    auto& seq = ratios[config.bucket_of(*e.item_duration)];
    position[k - range.begin] = seq.size();
    seq.push_back(watch_ratio(e, config.ratio_cap));
  }
  std::vector<LeaveOneOutMeans> loo;
  loo.reserve(ratios.size());
  for (const auto& seq : ratios) loo.emplace_back(seq);

  for (std::size_t k = range.begin; k < range.end; ++k) {
    const auto& e = events[k];
    if (e.platform == Platform::Ecommerce) {
      out[k] = label_ecommerce(e);
    } else if (!e.clicked) {
      out[k] = make_sample(e, Label::Negative);
    } else {
      const std::size_t b = config.bucket_of(*e.item_duration);
      const RunningMean bucket = loo[b].without(position[k - range.begin]);
      const RunningMean g = global.without(global_position[k]);
      out[k] = label_video(e, bucket, g.count == 0 ? kGlobalMeanSeed : g.mean, config);
    }
    profile = update_profile(std::move(profile), e, config);
  }
}

}  // namespace detail

// Labels a log sorted by (user_id, timestamp).
//   Causal:      each event sees only strictly earlier events (its user's
//                profile, and the population mean over all users).
//   LeaveOneOut: each event sees every other event of the log.
// Output is independent of `threads`.
inline LabelLogResult label_log(const std::vector<InteractionEvent>& events,
                                const LabelingConfig& config, LabelMode mode,
                                std::size_t threads = 1) {
  config.validate();
  if (!is_sorted_by_user_time(events))
    throw DomainError("label_log requires events sorted by (user, timestamp)");

  const auto ranges = detail::user_ranges(events);
  LabelLogResult result;
  result.samples.resize(events.size());
  result.profiles.resize(ranges.size());
  for (std::size_t u = 0; u < ranges.size(); ++u)
    result.profiles[u] = UserProfile(events[ranges[u].begin].user_id, config);

  if (mode == LabelMode::Causal) {
    const detail::CausalGlobalMean global(events, config);
    detail::parallel_for(ranges.size(), threads, [&](std::size_t u) {
      detail::label_user_causal(events, ranges[u], global, config, result.samples,
                                result.profiles[u]);
    });
    result.global_mean = global.overall();
  } else {
    std::vector<double> all;
    std::vector<std::size_t> global_position(events.size(), 0);
    for (std::size_t k = 0; k < events.size(); ++k) {
      if (!is_engaged_video(events[k])) continue;
      global_position[k] = all.size();
      all.push_back(watch_ratio(events[k], config.ratio_cap));
    }
    const detail::LeaveOneOutMeans global(all);
    detail::parallel_for(ranges.size(), threads, [&](std::size_t u) {
      detail::label_user_loo(events, ranges[u], global, global_position, config, result.samples,
                             result.profiles[u]);
    });
    result.global_mean = global.all().count == 0 ? kGlobalMeanSeed : global.all().mean;
  }
  return result;
}

// ---------------------------------------------------------------------------
// File formats

inline std::string to_json_line(const LabeledSample& s) {
  nlohmann::ordered_json j;
  j["user"] = s.user_id;
  j["item"] = s.item_id;
  j["ts"] = s.timestamp;
  j["label"] = std::string(1, to_char(s.label));
  if (s.beta) j["beta"] = *s.beta;
  return j.dump();
}

inline LabeledSample parse_sample(std::string_view text, std::size_t line = 0) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line, "record must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "user" && key != "item" && key != "ts" && key != "label" && key != "beta")
      throw ParseError(line, "unknown key '" + key + "'");
  if (!j.contains("user") || !j["user"].is_string()) throw ParseError(line, "'user' must be a string");
  if (!j.contains("item") || !j["item"].is_string()) throw ParseError(line, "'item' must be a string");
  if (!j.contains("ts") || !j["ts"].is_number_integer())
    throw ParseError(line, "'ts' must be an integer");
  if (!j.contains("label") || !j["label"].is_string())
    throw ParseError(line, "'label' must be a string");

  LabeledSample s;
  s.user_id = j["user"].get<std::string>();
  s.item_id = j["item"].get<std::string>();
  s.timestamp = j["ts"].get<Timestamp>();
  auto label = label_from_string(j["label"].get<std::string>());
  if (!label) throw ValidationError(line, "label", "expected \"P\", \"T\" or \"N\"");
  s.label = *label;
  if (j.contains("beta")) {
    if (!j["beta"].is_number()) throw ParseError(line, "'beta' must be a number");
    s.beta = j["beta"].get<double>();
    if (!(*s.beta >= 0.0 && *s.beta <= 1.0)) throw ValidationError(line, "beta", "must be in [0, 1]");
    if (s.label != Label::Tolerance)
      throw ValidationError(line, "beta", "only tolerance samples carry beta");
  }
  return s;
}

// One record per (user, bucket) with at least one observation.
inline std::vector<std::string> profile_snapshot_lines(const std::vector<UserProfile>& profiles) {
  std::vector<std::string> lines;
  for (const auto& p : profiles) {
    for (std::size_t b = 0; b < p.buckets.size(); ++b) {
      nlohmann::ordered_json j;
      j["user"] = p.user_id;
      j["bucket"] = b;
      j["count"] = p.buckets[b].count;
      if (p.buckets[b].count > 0) j["mean"] = p.buckets[b].mean;
      j["clicks"] = p.click_count;
      lines.push_back(j.dump());
    }
  }
  return lines;
}

}  // namespace tolerec
