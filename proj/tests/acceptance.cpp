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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "tolerec/tolerec.hpp"

namespace {

using namespace tolerec;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;
};

TrainConfig objective_config(Objective o, double l2 = 0.0) {
  TrainConfig c;
  c.objective = o;
  c.l2 = l2;
  return c;
}

// 1. WeakPositive equals Standard when no tolerance samples are present.
Outcome weak_positive_reduces_to_standard() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int b = 0; b < 100; ++b) {
    const auto model = testing::random_model(rng, 6, 10, 4, 1.0);
    const auto batch = testing::random_batch(rng, 40, 6, 10, false);
    const double l2 = b % 2 ? 0.01 : 0.0;
    const double standard = loss(model, batch, objective_config(Objective::Standard, l2));
    const double weak = loss(model, batch, objective_config(Objective::ToleranceAsWeakPositive, l2));
    worst = std::max(worst, std::abs(standard - weak));
  }
  return {worst <= 1e-12, "max |diff| = " + detail::format_double(worst)};
}

// 2. ToleranceAsNegative equals Standard on a copy with T relabeled to N.
Outcome tolerance_negative_is_relabeling() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int b = 0; b < 100; ++b) {
    const auto model = testing::random_model(rng, 6, 10, 4, 1.0);
    const auto batch = testing::random_batch(rng, 40, 6, 10, true);
    auto relabeled = batch;
    for (auto& s : relabeled)
      if (s.label == Label::Tolerance) s.label = Label::Negative, s.beta.reset();
    const double l2 = b % 2 ? 0.01 : 0.0;
    const double neg = loss(model, batch, objective_config(Objective::ToleranceAsNegative, l2));
    const double standard = loss(model, relabeled, objective_config(Objective::Standard, l2));
    worst = std::max(worst, std::abs(neg - standard));
  }
  return {worst <= 1e-12, "max |diff| = " + detail::format_double(worst)};
}

// 3. Analytic gradients against central differences of a long-double loss.
Outcome gradients_match_finite_differences() {
  std::mt19937_64 rng(303);
  const double h = 1e-5;
  double worst = 0.0;
  std::size_t coords = 0;
  for (int instance = 0; instance < 20; ++instance) {
    const auto model = testing::random_model(rng, 4, 6, 3, 0.5);
    const auto batch = testing::random_batch(rng, 25, 4, 6, true);
    const double l2 = instance % 2 ? 0.05 : 0.0;
    for (auto o : {Objective::Standard, Objective::ToleranceAsNegative, Objective::ToleranceAsWeakPositive}) {
      const auto g = gradient(model, batch, objective_config(o, l2));
      for (std::size_t k = 0; k < g.size(); ++k, ++coords) {
        RankingModel plus = model, minus = model;
        plus.params().at(k) += h;
        minus.params().at(k) -= h;
        const double fd = static_cast<double>((testing::oracle_loss(plus, batch, o, std::nullopt, l2) -
                                               testing::oracle_loss(minus, batch, o, std::nullopt, l2)) /
                                              (2.0L * h));
        const double scale = std::max({std::abs(g.at(k)), std::abs(fd), 1e-9});
        worst = std::max(worst, std::abs(g.at(k) - fd) / scale);
      }
    }
  }
  return {worst < 1e-6, std::to_string(coords) + " coordinates, max rel err = " + detail::format_double(worst)};
}

// 4. Streaming causal labeler against the quadratic brute-force labeler.
Outcome labeler_matches_brute_force() {
  std::size_t mismatches = 0, compared = 0;
  for (auto rule : {RuleMode::RatioOrAction, RuleMode::RatioOnly}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      LabelingConfig cfg;
      cfg.rule_mode = rule;
      const auto log = testing::random_log(1000 + seed, {.events = 1000});
      const auto got = label_log(log, cfg, LabelMode::Causal);
      const auto want = testing::brute_force_label(log, cfg);
      for (std::size_t k = 0; k < log.size(); ++k, ++compared) {
        const auto& s = got.samples[k];
        if (s.label != want[k].label || s.beta.has_value() != want[k].beta.has_value() ||
            (s.beta && std::abs(*s.beta - *want[k].beta) > 1e-12))
          ++mismatches;
      }
    }
  }
  return {mismatches == 0, std::to_string(compared) + " events, " + std::to_string(mismatches) + " mismatches"};
}

// 5. Beta contract over a ratio grid times a threshold grid, plus random logs.
Outcome beta_contract() {
  std::size_t violations = 0, checked = 0;
  LabelingConfig cfg;
  cfg.rule_mode = RuleMode::RatioOnly;
  for (int a = 0; a <= 10; ++a) {
    const double threshold = a / 10.0;
    UserProfile profile("u", cfg);
    profile.buckets[0] = detail::RunningMean{cfg.min_history, threshold};
    for (int r = 0; r <= 10; ++r) {
      const double ratio = r / 10.0;
      // Duration 1 keeps the ratio bit-identical to the grid value.
      const InteractionEvent e{"u", "v", 0, Platform::Video, true, ratio, 1.0, {}};
      const auto s = label_event(e, profile, 0.5, cfg);
      ++checked;
      if (ratio >= threshold) {
        if (s.label != Label::Positive || s.beta) ++violations;
      } else {
        const double want = std::clamp(ratio / threshold, 0.0, 1.0);
        if (s.label != Label::Tolerance || !s.beta || *s.beta != want) ++violations;
      }
    }
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (auto ref : {BetaReference::UserMean, BetaReference::PopulationMean}) {
      LabelingConfig c;
      c.beta_reference = ref;
      for (const auto& s : label_log(testing::random_log(seed), c, LabelMode::Causal).samples) {
        ++checked;
        if (s.beta.has_value() != (s.label == Label::Tolerance) || (s.beta && !(*s.beta >= 0.0 && *s.beta <= 1.0)))
          ++violations;
      }
    }
  }
  return {violations == 0, std::to_string(checked) + " samples, " + std::to_string(violations) + " violations"};
}

// 6. Score ordering P > T > N on the one-user set under WeakPositive.
Outcome score_ordering() {
  const auto set = testing::ordering_set();
  TrainConfig cfg;
  cfg.objective = Objective::ToleranceAsWeakPositive;
  cfg.fixed_beta = 0.5;
  cfg.learning_rate = 0.1;
  cfg.epochs = 1500;
  cfg.l2 = 0.05;
  cfg.batch_size = 8;
  const auto result = train(set.samples, cfg);
  const double p = testing::mean_score(result.model, set.positive);
  const double t = testing::mean_score(result.model, set.tolerance);
  const double n = testing::mean_score(result.model, set.negative);
  return {p - t > 0.05 && t - n > 0.05,
          "P " + detail::format_double(p) + ", T " + detail::format_double(t) + ", N " + detail::format_double(n)};
}

// 7. Cohort decline proportions follow the generating probabilities.
Outcome cohort_trend() {
  const testing::CohortTrendShape shape;
  const TimeWindow ref(0, 7 * testing::kTrendDay), inv(7 * testing::kTrendDay, 14 * testing::kTrendDay);
  CohortConfig cfg{ref, inv, Platform::Ecommerce, default_bucket_edges(Platform::Ecommerce)};
  std::size_t outside = 0, order = 0, checks = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<int> counts;
    const auto log = testing::cohort_trend_log(700 + seed, shape, &counts);
    const auto report = analyze(log, cfg, {});
    std::vector<double> p_sum(cfg.bucket_edges.size(), 0.0);
    std::vector<std::size_t> n(cfg.bucket_edges.size(), 0);
    for (int c : counts) {
      const auto b = cfg.bucket_of(c);
      p_sum[b] += shape.base + shape.slope * c;
      ++n[b];
    }
    for (std::size_t b = 0; b < report.buckets.size(); ++b) {
      const auto& bucket = report.buckets[b];
      ++checks;
      if (bucket.users != n[b]) return {false, "bucket sizes disagree with the generator"};
      const auto ci = testing::clopper_pearson(bucket.declined, bucket.users, 0.99);
      const double p = p_sum[b] / static_cast<double>(n[b]);
      if (p < ci.lo || p > ci.hi) ++outside;
      if (b > 0 && bucket.decline_proportion < report.buckets[b - 1].decline_proportion) ++order;
    }
  }
  return {outside == 0 && order == 0, std::to_string(checks) + " bucket checks, " + std::to_string(outside) +
                                          " outside 99% CI, " + std::to_string(order) + " order violations"};
}

// 8. Both tolerance-aware arms beat the standard arm in the default setting.
Outcome simulation_direction() {
  SimConfig sim;
  std::string detail;
  bool pass = true;
  for (auto o : {Objective::ToleranceAsNegative, Objective::ToleranceAsWeakPositive}) {
    TrainConfig b;
    b.objective = o;
    const auto r = simulate_seeds(TrainConfig{}, b, sim, 10);
    int lower_tolerance = 0, positive_delta = 0;
    double mean_delta = 0.0;
    for (const auto& run : r.runs) {
      if (run.average.arms[1].tolerance_rate < run.average.arms[0].tolerance_rate) ++lower_tolerance;
      if (run.average.retention_delta > 0.0) ++positive_delta;
      mean_delta += run.average.retention_delta / 10.0;
    }
    pass = pass && lower_tolerance >= 8 && positive_delta >= 8;
    detail += std::string(detail.empty() ? "" : "; ") + std::string(to_string(o)) + ": lower tolerance " +
              std::to_string(lower_tolerance) + "/10, positive delta " + std::to_string(positive_delta) +
              "/10, mean delta " + detail::format_double(std::round(mean_delta * 1000) / 1000) + " pp";
  }
  return {pass, detail};
}

// 9. Without trust decay the retention deltas are noise around zero.
Outcome null_effect() {
  SimConfig sim;
  sim.trust_decay = 0.0;
  std::string detail;
  bool pass = true;
  for (auto o : {Objective::ToleranceAsNegative, Objective::ToleranceAsWeakPositive}) {
    TrainConfig b;
    b.objective = o;
    const auto r = simulate_seeds(TrainConfig{}, b, sim, 10);
    double sum = 0.0, sq = 0.0;
    for (const auto& run : r.runs) {
      sum += run.average.retention_delta;
      sq += run.average.retention_delta * run.average.retention_delta;
    }
    const double mean = sum / 10.0;
    const double se = std::sqrt((sq - 10.0 * mean * mean) / 9.0) / std::sqrt(10.0);
    pass = pass && std::abs(mean) < 3.0 * se;
    detail += std::string(detail.empty() ? "" : "; ") + std::string(to_string(o)) + ": mean " +
              detail::format_double(std::round(mean * 1000) / 1000) + ", 3*SE " +
              detail::format_double(std::round(3 * se * 1000) / 1000);
  }
  return {pass, detail};
}

// 10. The full CLI pipeline is byte-identical across two runs.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    files[entry.path().filename().string()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return files;
}

bool run_pipeline(const fs::path& dir) {
  const std::string cli = TOLEREC_CLI, fixture = TOLEREC_FIXTURE, d = dir.string() + "/";
  const std::string common = " --seed 7 --threads 1 > /dev/null 2>&1";
  const std::vector<std::string> steps = {
      cli + " label --events " + fixture + " --out " + d + "samples.jsonl" + common,
      cli + " train --samples " + d + "samples.jsonl --objective tol-weak --out " + d + "model.txt" + common,
      cli + " analyze --events " + fixture + " --ref 2024-06-01..2024-06-08 --inv 2024-06-08..2024-06-15 --out " +
          d + "cohort.csv" + common,
      cli + " simulate --seeds 2 --objA standard --objB tol-weak --out " + d + "sim.csv" + common,
      cli + " report --cohort " + d + "cohort.csv --sim " + d + "sim.csv --out " + d + "report.md --seed 7" +
          " > /dev/null 2>&1"};
  for (const auto& s : steps)
    if (std::system(s.c_str()) != 0) {
      std::cerr << "pipeline step failed: " << s << "\n";
      return false;
    }
  return true;
}

Outcome pipeline_determinism() {
  const fs::path root = fs::temp_directory_path() / "tolerec_acceptance_pipeline";
  const fs::path run = root / "run";
  fs::remove_all(root);
  fs::create_directories(run);
  if (!run_pipeline(run)) return {false, "first run failed"};
  const auto first = snapshot(run);
  fs::remove_all(run);
  fs::create_directories(run);
  if (!run_pipeline(run)) return {false, "second run failed"};
  const auto second = snapshot(run);
  fs::remove_all(root);
  std::size_t differing = 0;
  for (const auto& [name, bytes] : first) {
    auto it = second.find(name);
    if (it == second.end() || it->second != bytes) ++differing;
  }
  const bool pass = first.size() == second.size() && differing == 0 && first.size() == 14;
  return {pass, std::to_string(first.size()) + " files, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"weak-positive objective reduces to standard", weak_positive_reduces_to_standard},
      {"tolerance-as-negative equals relabeled standard", tolerance_negative_is_relabeling},
      {"analytic gradients match finite differences", gradients_match_finite_differences},
      {"causal labeler matches brute force", labeler_matches_brute_force},
      {"beta contract and tie rule", beta_contract},
      {"score ordering P > T > N", score_ordering},
      {"cohort decline trend within binomial CI", cohort_trend},
      {"simulated tolerance and retention direction", simulation_direction},
      {"null effect without trust decay", null_effect},
      {"end-to-end pipeline determinism", pipeline_determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    char timing[32];
    std::snprintf(timing, sizeof(timing), "%.1fs", secs);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (k + 1) << ". " << criteria[k].first << " (" << o.detail
              << ", " << timing << ")" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
