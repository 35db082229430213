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
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "tolerec/cohort.hpp"

namespace tolerec {
namespace {

constexpr Timestamp kDay = 86400;
const TimeWindow kRef(0, 7 * kDay);
const TimeWindow kInv(7 * kDay, 14 * kDay);

InteractionEvent click(const std::string& user, Timestamp ts, bool clicked = true, ActionSet actions = {}) {
  return InteractionEvent{user, "item", ts, Platform::Ecommerce, clicked, std::nullopt, std::nullopt, actions};
}

InteractionEvent view(const std::string& user, Timestamp ts, double ratio, bool clicked = true) {
  return InteractionEvent{user, "video", ts, Platform::Video, clicked, clicked ? ratio * 100.0 : 0.0, 100.0, {}};
}

CohortConfig ecommerce_config() {
  return CohortConfig{kRef, kInv, Platform::Ecommerce, default_bucket_edges(Platform::Ecommerce)};
}

TEST(Engagement, CountsClicksInsideWindow) {
  std::vector<InteractionEvent> events;
  for (int k = 0; k < 10; ++k) events.push_back(click("u", k * 1000));
  for (int k = 0; k < 5; ++k) events.push_back(click("u", 8 * kDay + k));
  events.push_back(click("u", 50, false));
  EXPECT_EQ(engagement(events, kRef, Platform::Ecommerce), 10u);
  EXPECT_EQ(engagement({}, kRef, Platform::Ecommerce), 0u);
  // The window end is exclusive.
  EXPECT_EQ(engagement(std::vector{click("u", 7 * kDay)}, kRef, Platform::Ecommerce), 0u);
}

TEST(Engagement, MatchesFilterAndCount) {
  const auto log = testing::random_log(21, {.events = 800, .users = 1});
  const TimeWindow w(log.front().timestamp + 1000, log.front().timestamp + 200000);
  for (auto platform : {Platform::Ecommerce, Platform::Video}) {
    std::uint64_t want = 0;
    for (const auto& e : log)
      want += e.platform == platform && e.clicked && e.timestamp >= w.start && e.timestamp < w.end;
    EXPECT_EQ(engagement(log, w, platform), want);
  }
}

TEST(ToleranceStat, Examples) {
  LabelingConfig labeling;
  std::vector<InteractionEvent> events = {click("u", 1), click("u", 2), click("u", 3),
                                          click("u", 4, true, {Action::Purchase}),
                                          click("u", 5, true, {Action::Cart}), click("u", 6, false)};
  EXPECT_EQ(tolerance_stat(events, kRef, Platform::Ecommerce, labeling), 3.0);
  std::vector<InteractionEvent> views = {view("u", 1, 0.2), view("u", 2, 0.4), view("u", 3, 0.9, false)};
  EXPECT_NEAR(*tolerance_stat(views, kRef, Platform::Video, labeling), 0.3, 1e-15);
  EXPECT_FALSE(tolerance_stat({}, kRef, Platform::Video, labeling));
}

TEST(ToleranceStat, VideoUsesCappedRatio) {
  LabelingConfig labeling;
  labeling.ratio_cap = 0.5;
  std::vector<InteractionEvent> views = {view("u", 1, 0.2), view("u", 2, 1.4)};
  EXPECT_NEAR(*tolerance_stat(views, kRef, Platform::Video, labeling), 0.35, 1e-15);
}

TEST(ToleranceStat, MatchesRecomputation) {
  const auto log = testing::random_log(22, {.events = 500, .users = 1});
  const TimeWindow w(log.front().timestamp, log.back().timestamp + 1);
  std::size_t bare = 0;
  long double sum = 0.0L;
  std::size_t n = 0;
  for (const auto& e : log) {
    if (!e.clicked) continue;
    if (e.platform == Platform::Ecommerce) {
      bare += !(e.followup_actions.contains(Action::Cart) || e.followup_actions.contains(Action::Favorite) ||
                e.followup_actions.contains(Action::Purchase));
    } else {
      sum += std::min(*e.watch_duration / *e.item_duration, 1.0);
      ++n;
    }
  }
  LabelingConfig labeling;
  EXPECT_EQ(*tolerance_stat(log, w, Platform::Ecommerce, labeling), static_cast<double>(bare));
  EXPECT_NEAR(*tolerance_stat(log, w, Platform::Video, labeling), static_cast<double>(sum / n), 1e-12);
}

std::vector<InteractionEvent> clicks(const std::string& user, std::size_t ref, std::size_t inv) {
  std::vector<InteractionEvent> out;
  for (std::size_t k = 0; k < ref; ++k) out.push_back(click(user, static_cast<Timestamp>(k)));
  for (std::size_t k = 0; k < inv; ++k) out.push_back(click(user, 7 * kDay + static_cast<Timestamp>(k)));
  return out;
}

TEST(Analyze, StrictDeclineAndTie) {
  auto report = analyze(clicks("u", 10, 4), ecommerce_config(), {});
  ASSERT_EQ(report.buckets.size(), 4u);
  EXPECT_EQ(report.buckets[1].users, 1u);  // 10 bare clicks
  EXPECT_EQ(report.buckets[1].decline_proportion, 1.0);
  report = analyze(clicks("u", 5, 5), ecommerce_config(), {});
  EXPECT_EQ(report.buckets[0].users, 1u);
  EXPECT_EQ(report.buckets[0].decline_proportion, 0.0);
}

TEST(Analyze, ExclusionAccounting) {
  std::vector<InteractionEvent> events = clicks("a", 3, 1);
  for (auto& e : clicks("b", 0, 4)) events.push_back(e);
  events.push_back(click("c", 5, false));
  auto report = analyze(events, ecommerce_config(), {});
  EXPECT_EQ(report.users_considered, 1u);
  EXPECT_EQ(report.users_excluded, 2u);
  std::size_t total = 0;
  for (const auto& b : report.buckets) total += b.users;
  EXPECT_EQ(total, report.users_considered);
}

TEST(Analyze, EmptyConsideredSetWarns) {
  auto report = analyze(clicks("b", 0, 4), ecommerce_config(), {});
  EXPECT_TRUE(report.empty_warning);
  EXPECT_TRUE(report.buckets.empty());
}

TEST(Analyze, BucketLabelsAndOpenTop) {
  std::vector<InteractionEvent> events = clicks("heavy", 120, 0);
  auto report = analyze(events, ecommerce_config(), {});
  EXPECT_EQ(report.buckets[0].label, "[0,10)");
  EXPECT_EQ(report.buckets[3].label, "[50,inf)");
  EXPECT_FALSE(report.buckets[3].upper);
  EXPECT_EQ(report.buckets[3].users, 1u);
}

TEST(Analyze, ConfigValidation) {
  auto cfg = ecommerce_config();
  cfg.bucket_edges = {0, 20, 10};
  EXPECT_THROW(analyze({}, cfg, {}), ConfigError);
  cfg = ecommerce_config();
  cfg.reference = TimeWindow(0, 8 * kDay);
  EXPECT_THROW(analyze({}, cfg, {}), ConfigError);
}

std::vector<InteractionEvent> random_population(std::uint64_t seed, std::size_t users) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(0, 30);
  std::uniform_int_distribution<Timestamp> when(-3 * kDay, 17 * kDay);
  std::bernoulli_distribution bare(0.5), clicked(0.8);
  std::vector<InteractionEvent> out;
  for (std::size_t u = 0; u < users; ++u) {
    const int n = count(rng);
    for (int k = 0; k < n; ++k) {
      const bool c = clicked(rng);
      out.push_back(click("u" + std::to_string(u), when(rng), c,
                          c && !bare(rng) ? ActionSet{Action::Purchase} : ActionSet{}));
    }
  }
  return out;
}

std::string csv(const CohortReport& r) {
  std::ostringstream ss;
  write_cohort_csv(ss, r);
  return ss.str();
}

TEST(Analyze, PermutationInvariant) {
  auto events = random_population(31, 200);
  const auto base = csv(analyze(events, ecommerce_config(), {}));
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 3; ++rep) {
    std::shuffle(events.begin(), events.end(), rng);
    EXPECT_EQ(csv(analyze(events, ecommerce_config(), {})), base);
  }
}

TEST(Analyze, EventsOutsideWindowsDoNotMatter) {
  std::vector<InteractionEvent> inside;
  for (const auto& e : random_population(32, 150))
    if (kRef.contains(e.timestamp) || kInv.contains(e.timestamp)) inside.push_back(e);
  // Keep every user present so exclusion counts match too.
  std::set<std::string> users;
  for (const auto& e : random_population(32, 150)) users.insert(e.user_id);
  auto padded = inside;
  for (const auto& u : users) padded.push_back(click(u, 30 * kDay));
  auto a = analyze(random_population(32, 150), ecommerce_config(), {});
  auto b = analyze(padded, ecommerce_config(), {});
  EXPECT_EQ(csv(a), csv(b));
  EXPECT_EQ(a.users_excluded, b.users_excluded);
}

TEST(Analyze, VideoBucketsByMeanRatio) {
  std::vector<InteractionEvent> events;
  // Low-ratio user declines, high-ratio user does not.
  for (int k = 0; k < 4; ++k) events.push_back(view("low", k, 0.15));
  events.push_back(view("low", 7 * kDay, 0.15));
  for (int k = 0; k < 4; ++k) events.push_back(view("high", k, 0.95));
  for (int k = 0; k < 4; ++k) events.push_back(view("high", 7 * kDay + k, 0.95));
  CohortConfig cfg{kRef, kInv, Platform::Video, default_bucket_edges(Platform::Video)};
  auto report = analyze(events, cfg, {});
  ASSERT_EQ(report.buckets.size(), 10u);
  EXPECT_EQ(report.buckets[1].users, 1u);
  EXPECT_EQ(report.buckets[1].decline_proportion, 1.0);
  EXPECT_EQ(report.buckets[9].users, 1u);
  EXPECT_EQ(report.buckets[9].decline_proportion, 0.0);
  EXPECT_EQ(report.buckets[9].label, "[0.9,inf)");
}

TEST(Analyze, VideoTrendIsNonIncreasingInRatio) {
  // Decline probability falls linearly with the user's mean watch ratio.
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<InteractionEvent> events;
  for (int u = 0; u < 20000; ++u) {
    const std::string id = "v" + std::to_string(u);
    const double ratio = unit(rng);
    for (int k = 0; k < 5; ++k) events.push_back(view(id, k * 100, ratio));
    const bool decline = unit(rng) < 0.8 - 0.6 * ratio;
    for (int k = 0; k < (decline ? 3 : 5); ++k) events.push_back(view(id, 7 * kDay + k, ratio));
  }
  CohortConfig cfg{kRef, kInv, Platform::Video, default_bucket_edges(Platform::Video)};
  auto report = analyze(events, cfg, {});
  for (std::size_t b = 1; b < report.buckets.size(); ++b)
    EXPECT_LE(report.buckets[b].decline_proportion, report.buckets[b - 1].decline_proportion) << b;
}

TEST(Analyze, DeclineProportionsAreCalibrated) {
  // Over many seeds, 99% intervals around the reported proportions cover the
  // generating probability at the nominal rate.
  const testing::CohortTrendShape shape{.users = 2000};
  CohortConfig cfg{kRef, kInv, Platform::Ecommerce, default_bucket_edges(Platform::Ecommerce)};
  std::size_t outside = 0, checks = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::vector<int> counts;
    const auto report = analyze(testing::cohort_trend_log(seed, shape, &counts), cfg, {});
    std::vector<double> p_sum(cfg.bucket_edges.size(), 0.0);
    std::vector<std::size_t> n(cfg.bucket_edges.size(), 0);
    for (int c : counts) {
      p_sum[cfg.bucket_of(c)] += shape.base + shape.slope * c;
      ++n[cfg.bucket_of(c)];
    }
    for (std::size_t b = 0; b < report.buckets.size(); ++b) {
      ASSERT_EQ(report.buckets[b].users, n[b]);
      const auto ci = testing::clopper_pearson(report.buckets[b].declined, n[b], 0.99);
      const double p = p_sum[b] / static_cast<double>(n[b]);
      outside += p < ci.lo || p > ci.hi;
      ++checks;
    }
  }
  // P(Binomial(400, 0.01) > 11) < 0.001.
  EXPECT_EQ(checks, 400u);
  EXPECT_LE(outside, 11u);
}

TEST(CohortOutput, CsvAndPlot) {
  auto report = analyze(clicks("u", 10, 4), ecommerce_config(), {});
  EXPECT_EQ(csv(report),
            "bucket,users,decline_proportion\n\"[0,10)\",0,0\n\"[10,20)\",1,1\n\"[20,50)\",0,0\n"
            "\"[50,inf)\",0,0\n");
  std::ostringstream plot;
  write_cohort_plot(plot, report);
  EXPECT_EQ(plot.str(), "x,y\n10,1\n");
}

}  // namespace
}  // namespace tolerec
