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

// Closed-loop A/B simulator. Users click on an item's surface appeal and keep
// watching according to its true content; the gap between the two produces
// tolerance. Each tolerance event erodes the user's trust in the platform,
// each positive event restores some of it, and trust drives whether the user
// comes back the next day. Two arms serve the same population with models
// trained under different objectives.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "tolerec/detail/numeric.hpp"
#include "tolerec/detail/parallel.hpp"
#include "tolerec/errors.hpp"
#include "tolerec/event.hpp"
#include "tolerec/labeling.hpp"
#include "tolerec/trainer.hpp"

namespace tolerec {

struct SimUser {
  std::vector<double> true_affinity;       // drives completion
  std::vector<double> surface_attraction;  // drives clicks
  double patience = 0.5;                   // baseline completion tendency in (0, 1)
  double trust = 1.0;
  bool active = true;
};

struct SimItem {
  std::vector<double> surface;
  std::vector<double> content;
  double duration = 60.0;
};

// Next-day return probability as a function of trust: a logistic curve in
// trust rescaled so that p(0) == floor and p(1) == ceiling.
struct ReturnCurve {
  double floor = 0.0;
  double ceiling = 0.95;
  double midpoint = 0.5;
  double steepness = 8.0;

  double probability(double trust) const {
    const double lo = detail::sigmoid(-steepness * midpoint);
    const double hi = detail::sigmoid(steepness * (1.0 - midpoint));
    const double s = detail::sigmoid(steepness * (trust - midpoint));
    return std::clamp(floor + (ceiling - floor) * (s - lo) / (hi - lo), 0.0, 1.0);
  }
};

struct SimConfig {
  std::size_t users = 300;
  std::size_t items = 400;
  std::size_t days = 7;
  std::size_t slate_size = 10;
  std::size_t dimension = 8;
  double temperature = 1.0;      // click logit = <a_u, s_i> / temperature
  double affinity_gain = 2.0;    // completion uses sigmoid(gain * <t_u, v_i>)
  double correlation = 0.3;      // rho between item surface and content vectors
  double taste_concentration = 0.6;  // weight of the shared taste direction in users
  double trust_decay = 0.05;     // T <- T * (1 - decay) per tolerance event
  double trust_recovery = 0.02;  // T <- min(1, T + recovery) per positive event
  ReturnCurve return_curve;
  double watch_noise = 0.05;
  double patience_min = 0.4;
  double patience_max = 0.95;
  double duration_min = 15.0;
  double duration_max = 600.0;
  double action_threshold = 0.8;
  double action_probability = 0.3;
  std::uint64_t seed = 1;
  Timestamp start_time = 1717200000;  // 2024-06-01T00:00:00Z
  bool warm_start = false;
  std::size_t threads = 1;
  LabelingConfig labeling{RuleMode::RatioOnly, {60.0, 300.0}, 5, 1.0, BetaReference::UserMean};

  void validate() const {
    if (users == 0 || items == 0) throw ConfigError("population and catalog sizes must be positive");
    if (days == 0) throw ConfigError("days must be positive");
    if (slate_size == 0) throw ConfigError("slate size must be positive");
    if (slate_size * (days + 1) > items)
      throw ConfigError("catalog too small: users would run out of unseen items");
    if (dimension == 0) throw ConfigError("dimension must be positive");
    if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
    if (!(correlation >= 0.0 && correlation <= 1.0)) throw ConfigError("correlation must be in [0, 1]");
    if (!(taste_concentration >= 0.0 && taste_concentration <= 1.0))
      throw ConfigError("taste concentration must be in [0, 1]");
    if (!(trust_decay >= 0.0 && trust_decay < 1.0)) throw ConfigError("trust decay must be in [0, 1)");
    if (!(trust_recovery >= 0.0)) throw ConfigError("trust recovery must be non-negative");
    if (!(return_curve.floor >= 0.0 && return_curve.floor <= return_curve.ceiling &&
          return_curve.ceiling <= 1.0))
      throw ConfigError("return curve needs 0 <= floor <= ceiling <= 1");
    if (!(patience_min > 0.0 && patience_min <= patience_max && patience_max < 1.0))
      throw ConfigError("patience range must lie in (0, 1)");
    if (!(duration_min > 0.0 && duration_min <= duration_max))
      throw ConfigError("duration range must be positive");
    labeling.validate();
  }
};

struct Population {
  std::vector<SimUser> users;
  std::vector<SimItem> items;
};

inline std::string sim_user_id(std::size_t u) {
  std::string digits = std::to_string(u);
  return "u" + std::string(digits.size() < 6 ? 6 - digits.size() : 0, '0') + digits;
}
inline std::string sim_item_id(std::size_t i) {
  std::string digits = std::to_string(i);
  return "i" + std::string(digits.size() < 6 ? 6 - digits.size() : 0, '0') + digits;
}

inline Population generate_population(const SimConfig& config) {
  if (config.users == 0 || config.items == 0 || config.dimension == 0)
    throw ConfigError("population sizes must be positive");
  const std::size_t d = config.dimension;
  std::mt19937_64 rng(detail::derive_seed(config.seed, 0x706f70u));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Shared taste direction (unit norm) gives items a global quality component.
  std::vector<double> taste(d);
  for (double& x : taste) x = normal(rng);
  const double norm = std::sqrt(std::inner_product(taste.begin(), taste.end(), taste.begin(), 0.0));
  for (double& x : taste) x /= norm;

  Population pop;
  const double c = config.taste_concentration;
  const double spread = std::sqrt(1.0 - c * c) / std::sqrt(static_cast<double>(d));
  pop.users.resize(config.users);
  for (auto& user : pop.users) {
    user.true_affinity.resize(d);
    for (std::size_t k = 0; k < d; ++k) user.true_affinity[k] = c * taste[k] + spread * normal(rng);
    user.surface_attraction = user.true_affinity;
    user.patience = config.patience_min + (config.patience_max - config.patience_min) * unit(rng);
  }

  const double rho = config.correlation;
  const double noise = std::sqrt(1.0 - rho * rho);
  pop.items.resize(config.items);
  for (auto& item : pop.items) {
    item.content.resize(d);
    item.surface.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
      item.content[k] = normal(rng);
      const double w = normal(rng);
      item.surface[k] = rho * item.content[k] + noise * w;
    }
    item.duration = config.duration_min + (config.duration_max - config.duration_min) * unit(rng);
  }
  return pop;
}

inline double click_probability(const SimUser& u, const SimItem& i, const SimConfig& config) {
  const double z = std::inner_product(u.surface_attraction.begin(), u.surface_attraction.end(),
                                      i.surface.begin(), 0.0);
  return detail::sigmoid(z / config.temperature);
}

// True-content affinity in (0, 1).
inline double content_affinity(const SimUser& u, const SimItem& i, const SimConfig& config) {
  const double z =
      std::inner_product(u.true_affinity.begin(), u.true_affinity.end(), i.content.begin(), 0.0);
  return detail::sigmoid(config.affinity_gain * z);
}

// One impression. Always consumes the same number of uniform/normal draws.
inline InteractionEvent user_response(const SimUser& user, const SimItem& item, std::mt19937_64& rng,
                                      const SimConfig& config, std::string user_id,
                                      std::string item_id, Timestamp ts) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double click_draw = unit(rng);
  const double noise_draw = unit(rng);
  const double action_draw = unit(rng);

  InteractionEvent e;
  e.user_id = std::move(user_id);
  e.item_id = std::move(item_id);
  e.timestamp = ts;
  e.platform = Platform::Video;
  e.item_duration = item.duration;
  e.clicked = click_draw < click_probability(user, item, config);
  if (!e.clicked) {
    e.watch_duration = 0.0;
    return e;
  }
  const double affinity = content_affinity(user, item, config);
  // Uniform noise with standard deviation watch_noise.
  const double noise = config.watch_noise * std::sqrt(3.0) * (2.0 * noise_draw - 1.0);
  const double ratio = std::clamp(user.patience * affinity + noise, 0.0, 1.0);
  e.watch_duration = ratio * item.duration;
  if (affinity > config.action_threshold && action_draw < config.action_probability)
    e.followup_actions.insert(Action::Like);
  return e;
}

struct ArmDayStats {
  std::size_t active_users = 0;
  std::size_t retained = 0;  // active today and tomorrow
  std::size_t impressions = 0;
  std::size_t clicks = 0;
  std::size_t tolerance_events = 0;
  std::size_t positive_events = 0;
  double dwell_seconds = 0.0;
  double mean_trust = 0.0;  // over all users, end of day

  double retention() const {
    return active_users == 0 ? 0.0 : static_cast<double>(retained) / static_cast<double>(active_users);
  }
  double tolerance_rate() const {
    return clicks == 0 ? 0.0 : static_cast<double>(tolerance_events) / static_cast<double>(clicks);
  }
};

struct ExperimentDay {
  std::size_t day = 0;
  std::array<ArmDayStats, 2> arms;

  // Percentage points of Day-2 retention, B minus A.
  double retention_delta() const { return 100.0 * (arms[1].retention() - arms[0].retention()); }
  // Relative change of total dwell time, B over A, in percent.
  double dwell_delta() const {
    return arms[0].dwell_seconds == 0.0 ? 0.0
                                        : 100.0 * (arms[1].dwell_seconds / arms[0].dwell_seconds - 1.0);
  }
};

struct ArmSummary {
  double active_users = 0.0;
  double retention = 0.0;
  double tolerance_rate = 0.0;
};

// Mean over the test days, like the "Average" line of a daily A/B table.
struct ExperimentAverage {
  std::array<ArmSummary, 2> arms;
  double retention_delta = 0.0;
  double dwell_delta = 0.0;
};

struct ExperimentReport {
  std::uint64_t seed = 0;
  std::array<Objective, 2> objectives{};
  std::vector<ExperimentDay> days;  // test days 1..N (the bootstrap day is excluded)
  ExperimentAverage average;
};

namespace detail {

inline ExperimentAverage average_days(const std::vector<ExperimentDay>& days) {
  ExperimentAverage avg;
  if (days.empty()) return avg;
  const double n = static_cast<double>(days.size());
  for (const auto& d : days) {
    for (std::size_t a = 0; a < 2; ++a) {
      avg.arms[a].active_users += static_cast<double>(d.arms[a].active_users) / n;
      avg.arms[a].retention += d.arms[a].retention() / n;
      avg.arms[a].tolerance_rate += d.arms[a].tolerance_rate() / n;
    }
    avg.retention_delta += d.retention_delta() / n;
    avg.dwell_delta += d.dwell_delta() / n;
  }
  return avg;
}

class Arm {
 public:
  Arm(const Population& pop, const SimConfig& sim, const TrainConfig& train, std::size_t index)
      : pop_(pop), sim_(sim), train_(train), index_(index), users_(pop.users),
        logs_(pop.users.size()), labels_(pop.users.size()),
        seen_(pop.users.size(), std::vector<bool>(pop.items.size(), false)) {
    for (std::size_t u = 0; u < users_.size(); ++u) {
      // Response and bootstrap streams are shared by both arms; activity is per arm.
      response_rng_.emplace_back(derive_seed(sim.seed, 0x72657370u, u));
      bootstrap_rng_.emplace_back(derive_seed(sim.seed, 0x626f6f74u, u));
      activity_rng_.emplace_back(derive_seed(sim.seed, 0x61637476u, index, u));
    }
  }

  const std::vector<SimUser>& users() const { return users_; }

  ArmDayStats run_day(std::size_t day) {
    std::vector<std::vector<std::size_t>> slates(users_.size());
    if (day == 0) {
      bootstrap_slates(slates);
    } else {
      train_model(day);
      model_slates(slates);
    }

    ArmDayStats stats;
    std::vector<std::size_t> first_new(users_.size());
    for (std::size_t u = 0; u < users_.size(); ++u) first_new[u] = logs_[u].size();
    parallel_for(users_.size(), sim_.threads, [&](std::size_t u) {
      for (std::size_t slot = 0; slot < slates[u].size(); ++slot) {
        const std::size_t i = slates[u][slot];
        seen_[u][i] = true;
        const Timestamp ts = sim_.start_time + static_cast<Timestamp>(day) * 86400 +
                             static_cast<Timestamp>(slot) * 60;
        logs_[u].push_back(user_response(users_[u], pop_.items[i], response_rng_[u], sim_,
                                         sim_user_id(u), sim_item_id(i), ts));
      }
    });

    label_and_check();

    for (std::size_t u = 0; u < users_.size(); ++u) {
      if (!users_[u].active) continue;
      ++stats.active_users;
      for (std::size_t k = first_new[u]; k < logs_[u].size(); ++k) {
        const auto& e = logs_[u][k];
        ++stats.impressions;
        if (!e.clicked) continue;
        ++stats.clicks;
        stats.dwell_seconds += *e.watch_duration;
        const Label l = labels_[u][k].label;
        if (l == Label::Tolerance) {
          ++stats.tolerance_events;
          users_[u].trust *= 1.0 - sim_.trust_decay;
        } else if (l == Label::Positive) {
          ++stats.positive_events;
          users_[u].trust = std::min(1.0, users_[u].trust + sim_.trust_recovery);
        }
      }
    }

    // Tomorrow's activity, drawn for every user from the return curve.
    double trust_sum = 0.0;
    for (std::size_t u = 0; u < users_.size(); ++u) {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const bool was_active = users_[u].active;
      users_[u].active = unit(activity_rng_[u]) < sim_.return_curve.probability(users_[u].trust);
      if (was_active && users_[u].active) ++stats.retained;
      trust_sum += users_[u].trust;
    }
    stats.mean_trust = trust_sum / static_cast<double>(users_.size());
    return stats;
  }

 private:
  void bootstrap_slates(std::vector<std::vector<std::size_t>>& slates) {
    for (std::size_t u = 0; u < users_.size(); ++u) {
      std::vector<std::size_t> all(pop_.items.size());
      std::iota(all.begin(), all.end(), 0);
      std::shuffle(all.begin(), all.end(), bootstrap_rng_[u]);
      if (!users_[u].active) continue;
      slates[u].assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(sim_.slate_size));
    }
  }

  void train_model(std::size_t day) {
    std::vector<LabeledSample> samples;
    for (const auto& per_user : labels_) samples.insert(samples.end(), per_user.begin(), per_user.end());
    TrainConfig cfg = train_;
    cfg.seed = derive_seed(train_.seed, day);
    const std::string context = "arm " + std::string(index_ == 0 ? "A" : "B") + ", day " +
                                std::to_string(day);
    auto result = train(samples, cfg, sim_.warm_start && model_ ? &*model_ : nullptr, context);
    model_ = std::move(result.model);
  }

  void model_slates(std::vector<std::vector<std::size_t>>& slates) {
    const auto& p = model_->params();
    std::vector<std::optional<std::size_t>> item_index(pop_.items.size());
    for (std::size_t i = 0; i < pop_.items.size(); ++i) item_index[i] = model_->item_index(sim_item_id(i));

    parallel_for(users_.size(), sim_.threads, [&](std::size_t u) {
      if (!users_[u].active) return;
      const auto user_index = model_->user_index(sim_user_id(u));
      std::vector<std::pair<double, std::size_t>> scored;
      scored.reserve(pop_.items.size());
      for (std::size_t i = 0; i < pop_.items.size(); ++i) {
        if (seen_[u][i]) continue;
        double z = p.global_bias;
        if (user_index) z += p.user_bias[*user_index];
        if (item_index[i]) {
          z += p.item_bias[*item_index[i]];
          if (user_index) {
            auto pu = p.user(*user_index);
            auto qi = p.item(*item_index[i]);
            z += std::inner_product(pu.begin(), pu.end(), qi.begin(), 0.0);
          }
        }
        scored.emplace_back(sigmoid(z), i);
      }
      // Same order as rank(): score descending, then id ascending (ids are zero-padded).
      const std::size_t k = std::min(sim_.slate_size, scored.size());
      std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                        [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second < b.second;
                        });
      for (std::size_t r = 0; r < k; ++r) slates[u].push_back(scored[r].second);
    });
  }

  // Relabels the whole log causally. Earlier labels must be unchanged and every
  // tolerance label must sit on a clicked event.
  void label_and_check() {
    std::vector<InteractionEvent> flat;
    for (const auto& log : logs_) flat.insert(flat.end(), log.begin(), log.end());
    auto result = label_log(flat, sim_.labeling, LabelMode::Causal, sim_.threads);
    std::size_t pos = 0;
    for (std::size_t u = 0; u < users_.size(); ++u) {
      std::vector<LabeledSample> fresh(result.samples.begin() + static_cast<std::ptrdiff_t>(pos),
                                       result.samples.begin() +
                                           static_cast<std::ptrdiff_t>(pos + logs_[u].size()));
      for (std::size_t k = 0; k < labels_[u].size(); ++k)
        if (!(fresh[k] == labels_[u][k]))
          throw DomainError("simulator/labeler disagreement: label of an earlier event changed");
      for (std::size_t k = 0; k < fresh.size(); ++k)
        if (fresh[k].label == Label::Tolerance && !logs_[u][k].clicked)
          throw DomainError("simulator/labeler disagreement: tolerance on a non-click");
      labels_[u] = std::move(fresh);
      pos += logs_[u].size();
    }
  }

  const Population& pop_;
  const SimConfig& sim_;
  TrainConfig train_;
  std::size_t index_;
  std::vector<SimUser> users_;
  std::vector<std::vector<InteractionEvent>> logs_;
  std::vector<std::vector<LabeledSample>> labels_;
  std::vector<std::vector<bool>> seen_;
  std::vector<std::mt19937_64> response_rng_;
  std::vector<std::mt19937_64> bootstrap_rng_;
  std::vector<std::mt19937_64> activity_rng_;
  std::optional<RankingModel> model_;
};

}  // namespace detail

// Runs a bootstrap day of random slates followed by `sim.days` test days.
// Both arms see the same population; A is the control for the deltas.
inline ExperimentReport simulate_experiment(const TrainConfig& config_a, const TrainConfig& config_b,
                                            const SimConfig& sim) {
  sim.validate();
  config_a.validate();
  config_b.validate();
  const Population pop = generate_population(sim);
  detail::Arm arm_a(pop, sim, config_a, 0);
  detail::Arm arm_b(pop, sim, config_b, 1);

  ExperimentReport report;
  report.seed = sim.seed;
  report.objectives = {config_a.objective, config_b.objective};
  arm_a.run_day(0);
  arm_b.run_day(0);
  for (std::size_t day = 1; day <= sim.days; ++day) {
    ExperimentDay row;
    row.day = day;
    row.arms[0] = arm_a.run_day(day);
    row.arms[1] = arm_b.run_day(day);
    report.days.push_back(row);
  }
  report.average = detail::average_days(report.days);
  return report;
}

// Per-day means over several seeded runs (seeds are sim.seed, sim.seed + 1, ...).
struct MultiSeedReport {
  std::vector<ExperimentReport> runs;
};

inline MultiSeedReport simulate_seeds(const TrainConfig& config_a, const TrainConfig& config_b,
                                      SimConfig sim, std::size_t seeds) {
  MultiSeedReport out;
  const std::uint64_t base = sim.seed;
  for (std::size_t s = 0; s < seeds; ++s) {
    sim.seed = base + s;
    out.runs.push_back(simulate_experiment(config_a, config_b, sim));
  }
  return out;
}

// CSV: day,arm,active_users,retention_delta,tolerance_rate,dwell_delta
// One row per (day, arm), means over runs; arm A is the control (deltas 0).
// The final two rows (day "avg") are the per-arm means over days.
inline void write_sim_csv(std::ostream& out, const MultiSeedReport& report) {
  out << "day,arm,active_users,retention_delta,tolerance_rate,dwell_delta\n";
  if (report.runs.empty()) return;
  const double n = static_cast<double>(report.runs.size());
  const std::size_t days = report.runs.front().days.size();
  auto fmt = [](double v) { return detail::format_double(v); };
  for (std::size_t d = 0; d < days; ++d) {
    std::array<double, 2> active{}, tol{};
    double ret = 0.0, dwell = 0.0;
    for (const auto& run : report.runs) {
      const auto& row = run.days[d];
      for (std::size_t a = 0; a < 2; ++a) {
        active[a] += static_cast<double>(row.arms[a].active_users) / n;
        tol[a] += row.arms[a].tolerance_rate() / n;
      }
      ret += row.retention_delta() / n;
      dwell += row.dwell_delta() / n;
    }
    out << d + 1 << ",A," << fmt(active[0]) << ",0," << fmt(tol[0]) << ",0\n";
    out << d + 1 << ",B," << fmt(active[1]) << ',' << fmt(ret) << ',' << fmt(tol[1]) << ','
        << fmt(dwell) << '\n';
  }
  std::array<double, 2> active{}, tol{};
  double ret = 0.0, dwell = 0.0;
  for (const auto& run : report.runs) {
    for (std::size_t a = 0; a < 2; ++a) {
      active[a] += run.average.arms[a].active_users / n;
      tol[a] += run.average.arms[a].tolerance_rate / n;
    }
    ret += run.average.retention_delta / n;
    dwell += run.average.dwell_delta / n;
  }
  out << "avg,A," << fmt(active[0]) << ",0," << fmt(tol[0]) << ",0\n";
  out << "avg,B," << fmt(active[1]) << ',' << fmt(ret) << ',' << fmt(tol[1]) << ',' << fmt(dwell)
      << '\n';
}

}  // namespace tolerec
