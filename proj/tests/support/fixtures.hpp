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

// Synthetic data sets shared by the unit and acceptance suites.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tolerec/event.hpp"
#include "tolerec/labeling.hpp"
#include "tolerec/trainer.hpp"

namespace tolerec::testing {

// One user; every item carries a single label class, seen `repeats` times.
// Negatives outnumber the other classes, as in implicit feedback.
struct OrderingSet {
  std::vector<LabeledSample> samples;
  std::vector<std::string> positive, tolerance, negative;
};

inline OrderingSet ordering_set(std::size_t items_per_class = 6, std::size_t negative_items = 18,
                                std::size_t repeats = 4) {
  OrderingSet set;
  Timestamp ts = 0;
  auto add = [&](const std::string& prefix, Label label, std::vector<std::string>& ids) {
    const std::size_t count = label == Label::Negative ? negative_items : items_per_class;
    for (std::size_t i = 0; i < count; ++i) {
      ids.push_back(prefix + std::to_string(i));
      for (std::size_t r = 0; r < repeats; ++r) {
        LabeledSample s{"solo", ids.back(), ts++, label, std::nullopt};
        if (label == Label::Tolerance) s.beta = 0.5;
        set.samples.push_back(s);
      }
    }
  };
  add("pos", Label::Positive, set.positive);
  add("tol", Label::Tolerance, set.tolerance);
  add("neg", Label::Negative, set.negative);
  return set;
}

inline double mean_score(const RankingModel& model, const std::vector<std::string>& items) {
  double s = 0.0;
  for (const auto& i : items) s += predict(model, "solo", i);
  return s / static_cast<double>(items.size());
}

// E-commerce cohort log with a known generating process. Each user gets a
// tolerance count c uniform in [0, max_count) (clicks without follow-up) and
// one purchase in the reference week; in the investigation week the user
// declines with probability base + slope * c.
struct CohortTrendShape {
  std::size_t users = 5000;
  int max_count = 80;
  double base = 0.1;
  double slope = 0.008;
};

inline constexpr Timestamp kTrendDay = 86400;

inline std::vector<InteractionEvent> cohort_trend_log(std::uint64_t seed, const CohortTrendShape& shape,
                                                      std::vector<int>* counts = nullptr) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count_dist(0, shape.max_count - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<InteractionEvent> events;
  for (std::size_t u = 0; u < shape.users; ++u) {
    const std::string id = "c" + std::to_string(u);
    const int c = count_dist(rng);
    if (counts) counts->push_back(c);
    const bool decline = unit(rng) < shape.base + shape.slope * c;
    auto click = [&](Timestamp ts, ActionSet actions) {
      events.push_back(InteractionEvent{id, "item" + std::to_string(ts % 97), ts, Platform::Ecommerce, true,
                                        std::nullopt, std::nullopt, std::move(actions)});
    };
    for (int k = 0; k < c; ++k) click(k * 60, {});
    click(c * 60, {Action::Purchase});
    const int investigation = decline ? c : c + 1;
    for (int k = 0; k < investigation; ++k) click(7 * kTrendDay + k * 60, {Action::Cart});
  }
  return events;
}

}  // namespace tolerec::testing
