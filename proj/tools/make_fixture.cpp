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

// Writes the bundled two-week event fixture (JSON lines) to stdout.
//   make_fixture [events] [seed] > tests/data/events_10k.jsonl

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "tolerec/event.hpp"

int main(int argc, char** argv) {
  using namespace tolerec;
  const std::size_t count = argc > 1 ? std::stoul(argv[1]) : 10000;
  const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 20240601;
  constexpr Timestamp kStart = 1717200000;  // 2024-06-01T00:00:00Z
  constexpr Timestamp kSpan = 14 * 86400;
  constexpr std::size_t kUsers = 250, kItems = 600;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_user(0, kUsers - 1), pick_item(0, kItems - 1);
  std::uniform_int_distribution<Timestamp> pick_time(0, kSpan - 1);

  // Per-user habits: platform mix, click propensity, follow-up propensity and
  // a watch depth; half the users lose interest in the second week.
  struct Habit {
    double video, click, follow, depth, fade;
  };
  std::vector<Habit> habits(kUsers);
  for (auto& h : habits)
    h = {unit(rng), 0.4 + 0.5 * unit(rng), 0.1 + 0.5 * unit(rng), 0.2 + 0.7 * unit(rng),
         unit(rng) < 0.5 ? 0.5 * unit(rng) : 0.0};

  std::vector<InteractionEvent> events;
  while (events.size() < count) {
    const std::size_t u = pick_user(rng);
    const Habit& h = habits[u];
    const Timestamp offset = pick_time(rng);
    const double keep = unit(rng);
    if (offset >= kSpan / 2 && keep < h.fade) continue;

    InteractionEvent e;
    e.user_id = "u" + std::to_string(1000 + u);
    e.timestamp = kStart + offset;
    e.clicked = unit(rng) < h.click;
    const std::size_t item = pick_item(rng);
    if (unit(rng) < h.video) {
      e.platform = Platform::Video;
      e.item_id = "v" + std::to_string(item);
      e.item_duration = 10.0 + static_cast<double>((item * 37) % 890);
      const double ratio = std::clamp(h.depth + 0.3 * (unit(rng) - 0.5), 0.0, 1.0);
      e.watch_duration = e.clicked ? std::round(ratio * *e.item_duration * 10.0) / 10.0 : 0.0;
      if (e.clicked && ratio > 0.8 && unit(rng) < h.follow) e.followup_actions.insert(Action::Like);
    } else {
      e.platform = Platform::Ecommerce;
      e.item_id = "p" + std::to_string(item);
      if (e.clicked && unit(rng) < h.follow) {
        const double a = unit(rng);
        e.followup_actions.insert(a < 0.5 ? Action::Cart : a < 0.8 ? Action::Favorite : Action::Purchase);
      }
    }
    events.push_back(std::move(e));
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const InteractionEvent& a, const InteractionEvent& b) { return a.timestamp < b.timestamp; });
  for (const auto& e : events) std::cout << to_json_line(e) << '\n';
  return 0;
}
