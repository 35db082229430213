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
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tolerec/detail/numeric.hpp"
#include "tolerec/errors.hpp"
#include "tolerec/event.hpp"
#include "tolerec/labeling.hpp"

namespace tolerec {

// Reference/investigation week protocol: users are bucketed by their tolerance
// statistic in the reference window and we measure, per bucket, the share of
// users whose engagement in the investigation window is strictly lower.

inline std::vector<double> default_bucket_edges(Platform platform) {
  if (platform == Platform::Ecommerce) return {0.0, 10.0, 20.0, 50.0};
  return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

struct CohortConfig {
  TimeWindow reference;
  TimeWindow investigation;
  Platform platform = Platform::Ecommerce;
  // Lower bounds of the buckets; the last bucket is open-ended. Values below
  // the first edge fall into the first bucket.
  std::vector<double> bucket_edges;

  void validate() const {
    if (!(reference.start < reference.end) || !(investigation.start < investigation.end))
      throw ConfigError("cohort windows must satisfy start < end");
    if (reference.end > investigation.start)
      throw ConfigError("reference window must end before the investigation window starts");
    if (bucket_edges.empty()) throw ConfigError("at least one bucket edge is required");
    for (std::size_t i = 1; i < bucket_edges.size(); ++i)
      if (!(bucket_edges[i - 1] < bucket_edges[i]))
        throw ConfigError("bucket edges must be strictly ascending");
  }

  std::size_t bucket_of(double stat) const {
    auto it = std::upper_bound(bucket_edges.begin(), bucket_edges.end(), stat);
    return it == bucket_edges.begin() ? 0 : static_cast<std::size_t>(it - bucket_edges.begin()) - 1;
  }
};

struct CohortBucket {
  std::string label;
  double lower = 0.0;
  std::optional<double> upper;
  std::size_t users = 0;
  std::size_t declined = 0;
  double decline_proportion = 0.0;  // 0 for an empty bucket
};

struct CohortReport {
  Platform platform = Platform::Ecommerce;
  std::vector<CohortBucket> buckets;
  std::size_t users_considered = 0;
  std::size_t users_excluded = 0;
  bool empty_warning = false;
};

// Engaged interactions of `platform` in the window: clicked items for
// e-commerce, watched (clicked) videos for video.
inline std::uint64_t engagement(std::span<const InteractionEvent> user_events,
                                const TimeWindow& window, Platform platform) {
  std::uint64_t n = 0;
  for (const auto& e : user_events)
    if (e.platform == platform && e.clicked && window.contains(e.timestamp)) ++n;
  return n;
}

// E-commerce: number of tolerance-labeled clicks in the window.
// Video: mean capped watch ratio over engaged events in the window; nullopt
// when there are none.
inline std::optional<double> tolerance_stat(std::span<const InteractionEvent> user_events,
                                            const TimeWindow& window, Platform platform,
                                            const LabelingConfig& labeling) {
  if (platform == Platform::Ecommerce) {
    double count = 0.0;
    for (const auto& e : user_events)
      if (e.platform == Platform::Ecommerce && window.contains(e.timestamp) &&
          detail::label_ecommerce(e).label == Label::Tolerance)
        count += 1.0;
    return count;
  }
  std::vector<double> ratios;
  for (const auto& e : user_events)
    if (is_engaged_video(e) && window.contains(e.timestamp))
      ratios.push_back(watch_ratio(e, labeling.ratio_cap));
  if (ratios.empty()) return std::nullopt;
  // Summation order fixed so the statistic does not depend on input order.
  std::sort(ratios.begin(), ratios.end());
  detail::RunningMean m;
  for (double r : ratios) m.add(r);
  return m.mean;
}

inline CohortReport analyze(const std::vector<InteractionEvent>& events, const CohortConfig& config,
                            const LabelingConfig& labeling) {
  config.validate();
  std::map<std::string, std::vector<InteractionEvent>> by_user;
  for (const auto& e : events) by_user[e.user_id].push_back(e);

  CohortReport report;
  report.platform = config.platform;
  const auto& edges = config.bucket_edges;
  std::vector<CohortBucket> buckets(edges.size());
  for (std::size_t b = 0; b < edges.size(); ++b) {
    buckets[b].lower = edges[b];
    if (b + 1 < edges.size()) buckets[b].upper = edges[b + 1];
    buckets[b].label = "[" + detail::format_double(edges[b]) + "," +
                       (b + 1 < edges.size() ? detail::format_double(edges[b + 1]) : "inf") + ")";
  }

  for (const auto& [user, list] : by_user) {
    const std::span<const InteractionEvent> span(list);
    const auto ref = engagement(span, config.reference, config.platform);
    const auto stat = tolerance_stat(span, config.reference, config.platform, labeling);
    if (ref == 0 || !stat) {
      ++report.users_excluded;
      continue;
    }
    ++report.users_considered;
    auto& bucket = buckets[config.bucket_of(*stat)];
    ++bucket.users;
    if (engagement(span, config.investigation, config.platform) < ref) ++bucket.declined;
  }

  if (report.users_considered == 0) {
    report.empty_warning = true;
    return report;
  }
  for (auto& b : buckets)
    b.decline_proportion =
        b.users == 0 ? 0.0 : static_cast<double>(b.declined) / static_cast<double>(b.users);
  report.buckets = std::move(buckets);
  return report;
}

// CSV: bucket,users,decline_proportion
inline void write_cohort_csv(std::ostream& out, const CohortReport& report) {
  out << "bucket,users,decline_proportion\n";
  for (const auto& b : report.buckets)
    out << '"' << b.label << "\"," << b.users << ',' << detail::format_double(b.decline_proportion)
        << '\n';
}

// Plot data: x = bucket lower edge, y = decline proportion (empty buckets skipped).
inline void write_cohort_plot(std::ostream& out, const CohortReport& report) {
  out << "x,y\n";
  for (const auto& b : report.buckets)
    if (b.users > 0)
      out << detail::format_double(b.lower) << ',' << detail::format_double(b.decline_proportion)
          << '\n';
}

}  // namespace tolerec
