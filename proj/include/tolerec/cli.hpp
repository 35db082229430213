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

// Command-line orchestration: label -> train -> analyze -> simulate -> report.
// Every command writes its outputs plus a <out>.manifest.json describing the
// resolved configuration, input digests and tool version. Outputs are built in
// memory and only written once the command succeeds; if writing fails midway,
// files already written are removed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "tolerec/cohort.hpp"
#include "tolerec/event.hpp"
#include "tolerec/labeling.hpp"
#include "tolerec/retention_sim.hpp"
#include "tolerec/trainer.hpp"

namespace tolerec::cli {

inline constexpr const char* kToolVersion = "tolerec 0.1.0";

// ---------------------------------------------------------------------------
// Helpers shared by the commands.

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::vector<double> parse_number_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (const auto& part : split(s, ',')) {
    double v = 0.0;
    if (!detail::parse_double(part, v)) throw ConfigError("bad number '" + part + "' in " + what);
    out.push_back(v);
  }
  return out;
}

// "YYYY-MM-DD" or "YYYY-MM-DDTHH:MM:SS[Z]" (UTC) to seconds since epoch.
inline Timestamp parse_iso8601(const std::string& s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  char tail = 0;
  bool ok = false;
  if (s.size() == 10) {
    ok = std::sscanf(s.c_str(), "%4d-%2d-%2d%c", &y, &mo, &d, &tail) == 3;
  } else if (s.size() == 19 || (s.size() == 20 && s.back() == 'Z')) {
    ok = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d", &y, &mo, &d, &h, &mi, &sec) == 6;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ok || !ymd.ok() || h > 23 || mi > 59 || sec > 59 || h < 0 || mi < 0 || sec < 0)
    throw ConfigError("bad ISO-8601 date '" + s + "'");
  return static_cast<Timestamp>(sys_days{ymd}.time_since_epoch().count()) * 86400 + h * 3600 +
         mi * 60 + sec;
}

// Half-open range "START..END".
inline TimeWindow parse_window(const std::string& s) {
  const auto pos = s.find("..");
  if (pos == std::string::npos) throw ConfigError("window must be START..END, got '" + s + "'");
  const Timestamp a = parse_iso8601(s.substr(0, pos));
  const Timestamp b = parse_iso8601(s.substr(pos + 2));
  if (!(a < b)) throw ConfigError("window '" + s + "' must have START < END");
  return TimeWindow(a, b);
}

inline std::optional<double> parse_beta(const std::string& s) {
  if (s == "from-samples") return std::nullopt;
  if (s.rfind("fixed:", 0) == 0) {
    double v = 0.0;
    if (!detail::parse_double(s.substr(6), v) || !(v >= 0.0 && v <= 1.0))
      throw ConfigError("fixed beta must be a number in [0, 1], got '" + s + "'");
    return v;
  }
  throw ConfigError("--beta must be fixed:<v> or from-samples");
}

inline Objective parse_objective(const std::string& s) {
  auto o = objective_from_string(s);
  if (!o) throw ConfigError("unknown objective '" + s + "' (standard|tol-neg|tol-weak)");
  return *o;
}

// Files produced by one command, committed together.
class OutputSet {
 public:
  void add(std::string path, std::string content) {
    files_.emplace_back(std::move(path), std::move(content));
  }

  void commit() {
    std::vector<std::string> written;
    try {
      for (const auto& [path, content] : files_) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + path + "'");
        written.push_back(path);
        out << content;
        out.close();
        if (!out) throw IoError("write failed on '" + path + "'");
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& p : written) std::filesystem::remove(p, ec);
      throw;
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

inline std::string sibling(const std::string& out, const std::string& suffix) {
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

inline nlohmann::ordered_json manifest(const std::string& command, nlohmann::ordered_json config,
                                       const std::vector<std::pair<std::string, std::string>>& inputs,
                                       std::uint64_t seed) {
  nlohmann::ordered_json m;
  m["command"] = command;
  m["tool_version"] = kToolVersion;
  m["seed"] = seed;
  m["config"] = std::move(config);
  auto in = nlohmann::ordered_json::object();
  for (const auto& [path, digest] : inputs) in[path] = "sha256:" + digest;
  m["inputs"] = std::move(in);
  return m;
}

// Applies JSON config keys to options not given on the command line.
inline void overlay_config(CLI::App& sub, const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config '" + path + "' must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "config") throw ConfigError("config files cannot nest 'config'");
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (!opt) throw ConfigError("unknown config key '" + key + "' for '" + sub.get_name() + "'");
    if (opt->count() > 0) continue;
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_array()) {
      for (std::size_t k = 0; k < value.size(); ++k) {
        if (k) text += ',';
        text += value[k].is_string() ? value[k].get<std::string>() : value[k].dump();
      }
    } else {
      text = value.dump();
    }
    opt->add_result(text);
    opt->run_callback();
  }
}

// ---------------------------------------------------------------------------
// Commands

struct LabelArgs {
  std::string events, out, profiles, mode = "causal", rule = "ratio-or-action",
                                      beta_ref = "user", edges = "60,300";
  std::uint32_t min_history = 5;
  double ratio_cap = 1.0;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

inline LabelingConfig labeling_from(const std::string& rule, const std::string& edges,
                                    std::uint32_t min_history, double cap,
                                    const std::string& beta_ref) {
  LabelingConfig cfg;
  if (rule == "ratio-or-action") cfg.rule_mode = RuleMode::RatioOrAction;
  else if (rule == "ratio-only") cfg.rule_mode = RuleMode::RatioOnly;
  else throw ConfigError("--rule must be ratio-or-action or ratio-only");
  if (beta_ref == "user") cfg.beta_reference = BetaReference::UserMean;
  else if (beta_ref == "population") cfg.beta_reference = BetaReference::PopulationMean;
  else throw ConfigError("--beta-ref must be user or population");
  cfg.duration_bucket_edges = parse_number_list(edges, "--edges");
  cfg.min_history = min_history;
  cfg.ratio_cap = cap;
  cfg.validate();
  return cfg;
}

inline int run_label(const LabelArgs& a, std::ostream& log) {
  if (a.events.empty()) throw ConfigError("label: --events is required");
  if (a.out.empty()) throw ConfigError("label: --out is required");
  LabelMode mode;
  if (a.mode == "causal") mode = LabelMode::Causal;
  else if (a.mode == "loo") mode = LabelMode::LeaveOneOut;
  else throw ConfigError("--mode must be causal or loo");
  const auto cfg = labeling_from(a.rule, a.edges, a.min_history, a.ratio_cap, a.beta_ref);

  const std::string raw = read_file(a.events);
  std::vector<std::string> lines;
  {
    std::istringstream in(raw);
    for (std::string l; std::getline(in, l);) lines.push_back(std::move(l));
  }
  const auto ingest = ingest_lines(lines, a.threads);
  const auto result = label_log(ingest.events, cfg, mode, a.threads);

  std::string samples;
  for (const auto& s : result.samples) samples += to_json_line(s) + "\n";
  std::string profiles;
  for (const auto& l : profile_snapshot_lines(result.profiles)) profiles += l + "\n";

  std::size_t counts[3] = {0, 0, 0};
  for (const auto& s : result.samples) ++counts[static_cast<int>(s.label)];

  nlohmann::ordered_json config;
  config["events"] = a.events;
  config["out"] = a.out;
  config["mode"] = a.mode;
  config["rule"] = a.rule;
  config["edges"] = cfg.duration_bucket_edges;
  config["min-history"] = cfg.min_history;
  config["ratio-cap"] = cfg.ratio_cap;
  config["beta-ref"] = a.beta_ref;
  config["threads"] = a.threads;
  auto m = manifest("label", config, {{a.events, sha256_hex(raw)}}, a.seed);
  m["summary"] = {{"records", ingest.records},
                  {"rejected", ingest.rejected()},
                  {"positive", counts[0]},
                  {"tolerance", counts[1]},
                  {"negative", counts[2]},
                  {"global_mean", result.global_mean}};

  const std::string profiles_path = a.profiles.empty() ? sibling(a.out, ".profiles.jsonl") : a.profiles;
  OutputSet outputs;
  outputs.add(a.out, samples);
  outputs.add(profiles_path, profiles);
  outputs.add(sibling(a.out, ".manifest.json"), m.dump(2) + "\n");
  outputs.commit();
  log << "labeled " << result.samples.size() << " events (" << ingest.rejected()
      << " rejected): P=" << counts[0] << " T=" << counts[1] << " N=" << counts[2] << "\n";
  return 0;
}

struct TrainArgs {
  std::string samples, out, loss_history, objective = "standard", beta = "from-samples";
  double lr = 0.05, l2 = 0.0;
  int epochs = 10;
  std::size_t dim = 8, batch = 32, neg_samples = 0, threads = 1;
  std::uint64_t seed = 42;
};

inline TrainConfig train_config_from(const std::string& objective, const std::string& beta, double lr,
                                     int epochs, std::size_t dim, double l2, std::size_t batch,
                                     std::uint64_t seed, std::size_t threads) {
  TrainConfig cfg;
  cfg.objective = parse_objective(objective);
  cfg.fixed_beta = parse_beta(beta);
  cfg.learning_rate = lr;
  cfg.epochs = epochs;
  cfg.dimension = dim;
  cfg.l2 = l2;
  cfg.batch_size = batch;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.validate();
  return cfg;
}

inline std::vector<LabeledSample> read_samples(const std::string& raw) {
  std::vector<LabeledSample> out;
  std::istringstream in(raw);
  std::size_t line_no = 0;
  for (std::string l; std::getline(in, l);) {
    ++line_no;
    if (l.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_sample(l, line_no));
  }
  return out;
}

inline int run_train(const TrainArgs& a, std::ostream& log) {
  if (a.samples.empty()) throw ConfigError("train: --samples is required");
  if (a.out.empty()) throw ConfigError("train: --out is required");
  const auto cfg = train_config_from(a.objective, a.beta, a.lr, a.epochs, a.dim, a.l2, a.batch,
                                     a.seed, a.threads);
  const std::string raw = read_file(a.samples);
  auto samples = read_samples(raw);
  if (a.neg_samples > 0) samples = with_sampled_negatives(std::move(samples), a.neg_samples, a.seed);
  const auto result = train(samples, cfg);

  std::ostringstream model;
  write_model(model, result.model);
  std::ostringstream history;
  history << "epoch,objective,loss\n";
  for (std::size_t e = 0; e < result.loss_history.size(); ++e)
    history << e << ',' << to_string(cfg.objective) << ','
            << detail::format_double(result.loss_history[e]) << '\n';

  nlohmann::ordered_json config;
  config["samples"] = a.samples;
  config["out"] = a.out;
  config["objective"] = std::string(to_string(cfg.objective));
  config["beta"] = a.beta;
  config["lr"] = cfg.learning_rate;
  config["epochs"] = cfg.epochs;
  config["dim"] = cfg.dimension;
  config["l2"] = cfg.l2;
  config["batch"] = cfg.batch_size;
  config["neg-samples"] = a.neg_samples;
  config["threads"] = cfg.threads;
  auto m = manifest("train", config, {{a.samples, sha256_hex(raw)}}, a.seed);
  m["summary"] = {{"samples", samples.size()},
                  {"sampled_negatives", a.neg_samples > 0},
                  {"final_loss", result.loss_history.back()}};

  OutputSet outputs;
  outputs.add(a.out, model.str());
  outputs.add(a.loss_history.empty() ? sibling(a.out, ".loss.csv") : a.loss_history, history.str());
  outputs.add(sibling(a.out, ".manifest.json"), m.dump(2) + "\n");
  outputs.commit();
  log << "trained on " << samples.size() << " samples, final loss "
      << detail::format_double(result.loss_history.back()) << "\n";
  return 0;
}

struct AnalyzeArgs {
  std::string events, out, plot, ref, inv, platform = "ecommerce", buckets;
  double ratio_cap = 1.0;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

inline int run_analyze(const AnalyzeArgs& a, std::ostream& log) {
  if (a.events.empty()) throw ConfigError("analyze: --events is required");
  if (a.out.empty()) throw ConfigError("analyze: --out is required");
  if (a.ref.empty() || a.inv.empty()) throw ConfigError("analyze: --ref and --inv are required");
  auto platform = platform_from_string(a.platform);
  if (!platform) throw ConfigError("--platform must be ecommerce or video");

  CohortConfig cfg;
  cfg.reference = parse_window(a.ref);
  cfg.investigation = parse_window(a.inv);
  cfg.platform = *platform;
  cfg.bucket_edges = a.buckets.empty() ? default_bucket_edges(*platform)
                                       : parse_number_list(a.buckets, "--buckets");
  LabelingConfig labeling;
  labeling.ratio_cap = a.ratio_cap;
  labeling.validate();

  const std::string raw = read_file(a.events);
  std::vector<std::string> lines;
  {
    std::istringstream in(raw);
    for (std::string l; std::getline(in, l);) lines.push_back(std::move(l));
  }
  const auto ingest = ingest_lines(lines, a.threads);
  const auto report = analyze(ingest.events, cfg, labeling);

  std::ostringstream csv, plot;
  write_cohort_csv(csv, report);
  write_cohort_plot(plot, report);

  nlohmann::ordered_json config;
  config["events"] = a.events;
  config["out"] = a.out;
  config["ref"] = a.ref;
  config["inv"] = a.inv;
  config["platform"] = a.platform;
  config["buckets"] = cfg.bucket_edges;
  config["ratio-cap"] = labeling.ratio_cap;
  auto m = manifest("analyze", config, {{a.events, sha256_hex(raw)}}, a.seed);
  m["summary"] = {{"users_considered", report.users_considered},
                  {"users_excluded", report.users_excluded},
                  {"empty_warning", report.empty_warning},
                  {"rejected_records", ingest.rejected()}};
  if (*platform == Platform::Video)
    m["notes"] = {"video tolerance statistic uses capped watch ratios (cap " +
                  detail::format_double(labeling.ratio_cap) + ")"};

  OutputSet outputs;
  outputs.add(a.out, csv.str());
  outputs.add(a.plot.empty() ? sibling(a.out, ".plot.csv") : a.plot, plot.str());
  outputs.add(sibling(a.out, ".manifest.json"), m.dump(2) + "\n");
  outputs.commit();
  if (report.empty_warning) log << "warning: no user had reference-window engagement\n";
  log << "analyzed " << report.users_considered << " users (" << report.users_excluded
      << " excluded)\n";
  return 0;
}

struct SimulateArgs {
  std::string out, obj_a = "standard", obj_b = "tol-weak", beta = "from-samples", rule = "ratio-only";
  std::size_t seeds = 1, threads = 1;
  std::uint64_t seed = 1;
  // Training
  double lr = 0.05, l2 = 0.0;
  int epochs = 5;
  std::size_t dim = 8, batch = 32;
  // Simulator
  SimConfig sim;
};

inline int run_simulate(const SimulateArgs& a, std::ostream& log) {
  if (a.out.empty()) throw ConfigError("simulate: --out is required");
  if (a.seeds == 0) throw ConfigError("--seeds must be >= 1");
  const auto cfg_a = train_config_from(a.obj_a, a.beta, a.lr, a.epochs, a.dim, a.l2, a.batch, a.seed, 1);
  const auto cfg_b = train_config_from(a.obj_b, a.beta, a.lr, a.epochs, a.dim, a.l2, a.batch, a.seed, 1);
  SimConfig sim = a.sim;
  sim.seed = a.seed;
  sim.threads = a.threads;
  sim.labeling.rule_mode = a.rule == "ratio-only" ? RuleMode::RatioOnly
                           : a.rule == "ratio-or-action"
                               ? RuleMode::RatioOrAction
                               : throw ConfigError("--rule must be ratio-or-action or ratio-only");
  sim.validate();
  const auto report = simulate_seeds(cfg_a, cfg_b, sim, a.seeds);

  std::ostringstream csv;
  write_sim_csv(csv, report);
  std::ostringstream per_seed;
  per_seed << "seed,retention_delta,tolerance_rate_a,tolerance_rate_b,dwell_delta\n";
  for (const auto& run : report.runs)
    per_seed << run.seed << ',' << detail::format_double(run.average.retention_delta) << ','
             << detail::format_double(run.average.arms[0].tolerance_rate) << ','
             << detail::format_double(run.average.arms[1].tolerance_rate) << ','
             << detail::format_double(run.average.dwell_delta) << '\n';

  nlohmann::ordered_json config;
  config["out"] = a.out;
  config["objA"] = std::string(to_string(cfg_a.objective));
  config["objB"] = std::string(to_string(cfg_b.objective));
  config["beta"] = a.beta;
  config["rule"] = a.rule;
  config["seeds"] = a.seeds;
  config["lr"] = a.lr;
  config["epochs"] = a.epochs;
  config["dim"] = a.dim;
  config["l2"] = a.l2;
  config["batch"] = a.batch;
  config["users"] = sim.users;
  config["items"] = sim.items;
  config["days"] = sim.days;
  config["slate"] = sim.slate_size;
  config["sim-dim"] = sim.dimension;
  config["temperature"] = sim.temperature;
  config["gain"] = sim.affinity_gain;
  config["rho"] = sim.correlation;
  config["concentration"] = sim.taste_concentration;
  config["decay"] = sim.trust_decay;
  config["recovery"] = sim.trust_recovery;
  config["warm-start"] = sim.warm_start;
  config["threads"] = a.threads;
  auto m = manifest("simulate", config, {}, a.seed);

  OutputSet outputs;
  outputs.add(a.out, csv.str());
  outputs.add(sibling(a.out, ".seeds.csv"), per_seed.str());
  outputs.add(sibling(a.out, ".manifest.json"), m.dump(2) + "\n");
  outputs.commit();
  log << "simulated " << a.seeds << " paired run(s)\n";
  return 0;
}

// CSV reader for the two report inputs; fields may be double-quoted.
inline std::vector<std::vector<std::string>> read_csv(const std::string& raw,
                                                      const std::string& expected_header,
                                                      const std::string& path) {
  std::istringstream in(raw);
  std::string header;
  if (!std::getline(in, header) || header != expected_header)
    throw ConfigError("'" + path + "' is not a recognized table (expected header '" +
                      expected_header + "')");
  const std::size_t columns = split(expected_header, ',').size();
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') quoted = !quoted;
      else if (c == ',' && !quoted) {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    fields.push_back(cur);
    if (fields.size() != columns || quoted)
      throw ConfigError("'" + path + "': malformed row '" + line + "'");
    rows.push_back(std::move(fields));
  }
  return rows;
}

inline std::string signed_percent(const std::string& value, int digits) {
  double v = 0.0;
  if (!detail::parse_double(value, v)) throw ConfigError("bad number '" + value + "' in report input");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%+.*f%%", digits, v);
  return buf;
}

struct ReportArgs {
  std::string cohort, sim, out;
  std::uint64_t seed = 0;
};

inline int run_report(const ReportArgs& a, std::ostream& log) {
  if (a.out.empty()) throw ConfigError("report: --out is required");
  if (a.cohort.empty() && a.sim.empty()) throw ConfigError("report: give --cohort and/or --sim");
  std::ostringstream md;
  std::vector<std::pair<std::string, std::string>> inputs;
  md << "# Tolerance report\n";

  if (!a.cohort.empty()) {
    const std::string raw = read_file(a.cohort);
    inputs.emplace_back(a.cohort, sha256_hex(raw));
    const auto rows = read_csv(raw, "bucket,users,decline_proportion", a.cohort);
    md << "\n## Engagement decline by reference-week tolerance\n\n";
    md << "| Tolerance bucket | Users | Decline proportion |\n|---|---:|---:|\n";
    for (const auto& r : rows) md << "| " << r[0] << " | " << r[1] << " | " << r[2] << " |\n";
  }

  if (!a.sim.empty()) {
    const std::string raw = read_file(a.sim);
    inputs.emplace_back(a.sim, sha256_hex(raw));
    const auto rows =
        read_csv(raw, "day,arm,active_users,retention_delta,tolerance_rate,dwell_delta", a.sim);
    md << "\n## Simulated A/B test: arm B vs control A\n\n";
    md << "| Day | R | Dwell | Tolerance rate A | Tolerance rate B |\n|---|---:|---:|---:|---:|\n";
    std::map<std::string, std::vector<std::string>> control;
    for (const auto& r : rows) {
      if (r[1] == "A") {
        control[r[0]] = r;
      } else if (r[1] == "B") {
        auto it = control.find(r[0]);
        if (it == control.end()) throw ConfigError("'" + a.sim + "': arm B row without arm A row");
        const std::string day = r[0] == "avg" ? "Average" : r[0];
        md << "| " << day << " | " << signed_percent(r[3], 3) << " | " << signed_percent(r[5], 2)
           << " | " << it->second[4] << " | " << r[4] << " |\n";
      } else {
        throw ConfigError("'" + a.sim + "': unknown arm '" + r[1] + "'");
      }
    }
  }

  auto m = manifest("report", {{"cohort", a.cohort}, {"sim", a.sim}, {"out", a.out}}, inputs, a.seed);
  OutputSet outputs;
  outputs.add(a.out, md.str());
  outputs.add(sibling(a.out, ".manifest.json"), m.dump(2) + "\n");
  outputs.commit();
  log << "wrote " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

// Entry point; args excludes the program name. Returns the process exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tolerance-aware labeling, training, cohort analysis and retention simulation",
               "tolerec"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string config_path;
  auto add_common = [&](CLI::App* sub, std::uint64_t& seed, std::size_t* threads) {
    sub->add_option("--config", config_path, "JSON file mirroring the flags; flags win");
    sub->add_option("--seed", seed, "Random seed");
    if (threads) sub->add_option("--threads", *threads, "Worker threads");
  };

  LabelArgs la;
  auto* label = app.add_subcommand("label", "Label an event log as P/T/N");
  add_common(label, la.seed, &la.threads);
  label->add_option("--events", la.events, "Event file (JSON lines)");
  label->add_option("--out", la.out, "Labeled-sample output file");
  label->add_option("--profiles", la.profiles, "Profile snapshot output file");
  label->add_option("--mode", la.mode, "causal|loo");
  label->add_option("--rule", la.rule, "ratio-or-action|ratio-only");
  label->add_option("--edges", la.edges, "Duration bucket edges in seconds, comma separated");
  label->add_option("--min-history", la.min_history, "Ratios needed before a bucket mean is used");
  label->add_option("--ratio-cap", la.ratio_cap, "Watch-ratio cap");
  label->add_option("--beta-ref", la.beta_ref, "user|population completion mean for beta");

  TrainArgs ta;
  auto* trn = app.add_subcommand("train", "Train a ranking model on labeled samples");
  add_common(trn, ta.seed, &ta.threads);
  trn->add_option("--samples", ta.samples, "Labeled-sample file");
  trn->add_option("--out", ta.out, "Model snapshot output file");
  trn->add_option("--loss-history", ta.loss_history, "Loss history CSV output file");
  trn->add_option("--objective", ta.objective, "standard|tol-neg|tol-weak");
  trn->add_option("--beta", ta.beta, "fixed:<v>|from-samples");
  trn->add_option("--lr", ta.lr, "Learning rate");
  trn->add_option("--epochs", ta.epochs, "Epochs");
  trn->add_option("--dim", ta.dim, "Latent dimension");
  trn->add_option("--l2", ta.l2, "L2 regularization");
  trn->add_option("--batch", ta.batch, "Minibatch size");
  trn->add_option("--neg-samples", ta.neg_samples, "Sampled negatives per positive (0 = off)");

  AnalyzeArgs aa;
  auto* ana = app.add_subcommand("analyze", "Reference/investigation week cohort analysis");
  add_common(ana, aa.seed, &aa.threads);
  ana->add_option("--events", aa.events, "Event file (JSON lines)");
  ana->add_option("--out", aa.out, "Cohort report CSV output file");
  ana->add_option("--plot", aa.plot, "Plot data output file");
  ana->add_option("--ref", aa.ref, "Reference window START..END (ISO-8601, half-open)");
  ana->add_option("--inv", aa.inv, "Investigation window START..END (ISO-8601, half-open)");
  ana->add_option("--platform", aa.platform, "ecommerce|video");
  ana->add_option("--buckets", aa.buckets, "Bucket lower edges, comma separated");
  ana->add_option("--ratio-cap", aa.ratio_cap, "Watch-ratio cap");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Closed-loop A/B retention simulation");
  add_common(sim, sa.seed, &sa.threads);
  sim->add_option("--out", sa.out, "Daily report CSV output file");
  sim->add_option("--seeds", sa.seeds, "Number of paired runs (seeds seed, seed+1, ...)");
  sim->add_option("--objA", sa.obj_a, "Control arm objective");
  sim->add_option("--objB", sa.obj_b, "Treatment arm objective");
  sim->add_option("--objective", sa.obj_b, "Alias of --objB");
  sim->add_option("--beta", sa.beta, "fixed:<v>|from-samples");
  sim->add_option("--rule", sa.rule, "Labeling rule used inside the simulator");
  sim->add_option("--lr", sa.lr, "Learning rate");
  sim->add_option("--epochs", sa.epochs, "Epochs per daily retrain");
  sim->add_option("--dim", sa.dim, "Model latent dimension");
  sim->add_option("--l2", sa.l2, "L2 regularization");
  sim->add_option("--batch", sa.batch, "Minibatch size");
  sim->add_option("--users", sa.sim.users, "Population size");
  sim->add_option("--items", sa.sim.items, "Catalog size");
  sim->add_option("--days", sa.sim.days, "Test days");
  sim->add_option("--slate", sa.sim.slate_size, "Slate size");
  sim->add_option("--sim-dim", sa.sim.dimension, "Dimension of simulated taste vectors");
  sim->add_option("--temperature", sa.sim.temperature, "Click temperature");
  sim->add_option("--gain", sa.sim.affinity_gain, "Content affinity gain");
  sim->add_option("--rho", sa.sim.correlation, "Surface/content correlation");
  sim->add_option("--concentration", sa.sim.taste_concentration, "Shared taste weight");
  sim->add_option("--decay", sa.sim.trust_decay, "Trust decay per tolerance event");
  sim->add_option("--recovery", sa.sim.trust_recovery, "Trust recovery per positive event");
  sim->add_flag("--warm-start", sa.sim.warm_start, "Warm-start daily retraining");

  ReportArgs ra;
  auto* rep = app.add_subcommand("report", "Merge analyze/simulate outputs into one summary");
  add_common(rep, ra.seed, nullptr);
  rep->add_option("--cohort", ra.cohort, "Cohort report CSV from analyze");
  rep->add_option("--sim", ra.sim, "Daily report CSV from simulate");
  rep->add_option("--out", ra.out, "Summary output file (Markdown)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) overlay_config(*sub, config_path);
    if (sub == label) return run_label(la, err);
    if (sub == trn) return run_train(ta, err);
    if (sub == ana) return run_analyze(aa, err);
    if (sub == sim) return run_simulate(sa, err);
    return run_report(ra, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace tolerec::cli
