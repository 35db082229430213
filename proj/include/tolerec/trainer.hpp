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
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tolerec/detail/numeric.hpp"
#include "tolerec/detail/parallel.hpp"
#include "tolerec/errors.hpp"
#include "tolerec/labeling.hpp"

namespace tolerec {

// Which labels are positives, and with what weight.
//   Standard:                 P and T positive, N negative (click objective).
//   ToleranceAsNegative:      P positive, T and N negative.
//   ToleranceAsWeakPositive:  P positive, T positive with weight beta, N negative.
enum class Objective { Standard, ToleranceAsNegative, ToleranceAsWeakPositive };

inline std::string_view to_string(Objective o) {
  switch (o) {
    case Objective::Standard: return "standard";
    case Objective::ToleranceAsNegative: return "tol-neg";
    case Objective::ToleranceAsWeakPositive: return "tol-weak";
  }
  return "?";
}

inline std::optional<Objective> objective_from_string(std::string_view s) {
  if (s == "standard") return Objective::Standard;
  if (s == "tol-neg") return Objective::ToleranceAsNegative;
  if (s == "tol-weak" || s == "tol-weak-positive") return Objective::ToleranceAsWeakPositive;
  return std::nullopt;
}

struct TrainConfig {
  Objective objective = Objective::Standard;
  double learning_rate = 0.05;
  int epochs = 10;
  std::size_t dimension = 8;
  double l2 = 0.0;
  std::uint64_t seed = 42;
  // nullopt: take beta from each tolerance sample. Otherwise one scalar for all.
  std::optional<double> fixed_beta;
  std::size_t batch_size = 32;
  std::size_t threads = 1;
  double init_scale = 0.01;

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw ConfigError("learning_rate must be positive");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (dimension < 1) throw ConfigError("dimension must be >= 1");
    if (!(l2 >= 0.0)) throw ConfigError("l2 must be non-negative");
    if (fixed_beta && !(*fixed_beta >= 0.0 && *fixed_beta <= 1.0))
      throw ConfigError("fixed beta must be in [0, 1]");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be non-negative");
  }
};

// Flat parameter storage shared by the model and its gradient. Flat
// coordinate order: global bias, user biases, item biases, user factors
// (row-major), item factors (row-major).
struct ParameterBlock {
  std::size_t dimension = 0;
  double global_bias = 0.0;
  std::vector<double> user_bias;
  std::vector<double> item_bias;
  std::vector<double> user_factors;
  std::vector<double> item_factors;

  ParameterBlock() = default;
  ParameterBlock(std::size_t dim, std::size_t users, std::size_t items)
      : dimension(dim),
        user_bias(users, 0.0),
        item_bias(items, 0.0),
        user_factors(users * dim, 0.0),
        item_factors(items * dim, 0.0) {}

  std::size_t users() const { return user_bias.size(); }
  std::size_t items() const { return item_bias.size(); }
  std::size_t size() const {
    return 1 + user_bias.size() + item_bias.size() + user_factors.size() + item_factors.size();
  }

  std::span<double> user(std::size_t u) { return {user_factors.data() + u * dimension, dimension}; }
  std::span<const double> user(std::size_t u) const {
    return {user_factors.data() + u * dimension, dimension};
  }
  std::span<double> item(std::size_t i) { return {item_factors.data() + i * dimension, dimension}; }
  std::span<const double> item(std::size_t i) const {
    return {item_factors.data() + i * dimension, dimension};
  }

  double& at(std::size_t k) {
    if (k == 0) return global_bias;
    k -= 1;
    if (k < user_bias.size()) return user_bias[k];
    k -= user_bias.size();
    if (k < item_bias.size()) return item_bias[k];
    k -= item_bias.size();
    if (k < user_factors.size()) return user_factors[k];
    k -= user_factors.size();
    return item_factors.at(k);
  }
  double at(std::size_t k) const { return const_cast<ParameterBlock*>(this)->at(k); }

  // Sum of squares of the regularized parameters (everything but the global bias).
  double regularized_norm2() const {
    auto sq = [](const std::vector<double>& v) {
      return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
    };
    return sq(user_bias) + sq(item_bias) + sq(user_factors) + sq(item_factors);
  }
};

// Biased matrix factorization with a sigmoid output:
//   score(u, i) = sigmoid(b + b_u + b_i + <p_u, q_i>).
class RankingModel {
 public:
  RankingModel() = default;
  explicit RankingModel(std::size_t dimension) : params_(dimension, 0, 0) {}

  std::size_t dimension() const { return params_.dimension; }
  ParameterBlock& params() { return params_; }
  const ParameterBlock& params() const { return params_; }

  const std::vector<std::string>& user_ids() const { return user_ids_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }

  std::optional<std::size_t> user_index(const std::string& id) const {
    auto it = user_index_.find(id);
    return it == user_index_.end() ? std::nullopt : std::optional(it->second);
  }
  std::optional<std::size_t> item_index(const std::string& id) const {
    auto it = item_index_.find(id);
    return it == item_index_.end() ? std::nullopt : std::optional(it->second);
  }

  std::size_t add_user(const std::string& id) {
    auto [it, inserted] = user_index_.try_emplace(id, user_ids_.size());
    if (inserted) {
      user_ids_.push_back(id);
      params_.user_bias.push_back(0.0);
      params_.user_factors.resize(params_.user_factors.size() + params_.dimension, 0.0);
    }
    return it->second;
  }
  std::size_t add_item(const std::string& id) {
    auto [it, inserted] = item_index_.try_emplace(id, item_ids_.size());
    if (inserted) {
      item_ids_.push_back(id);
      params_.item_bias.push_back(0.0);
      params_.item_factors.resize(params_.item_factors.size() + params_.dimension, 0.0);
    }
    return it->second;
  }

  // Pre-activation score; unknown ids contribute zero.
  double logit(const std::string& user, const std::string& item) const {
    auto u = user_index(user);
    auto i = item_index(item);
    double z = params_.global_bias;
    if (u) z += params_.user_bias[*u];
    if (i) z += params_.item_bias[*i];
    if (u && i) {
      auto p = params_.user(*u);
      auto q = params_.item(*i);
      z += std::inner_product(p.begin(), p.end(), q.begin(), 0.0);
    }
    return z;
  }

 private:
  ParameterBlock params_;
  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
  std::unordered_map<std::string, std::size_t> user_index_;
  std::unordered_map<std::string, std::size_t> item_index_;
};

inline double predict(const RankingModel& model, const std::string& user, const std::string& item) {
  return detail::sigmoid(model.logit(user, item));
}

// Target and weight of one sample's cross-entropy term.
struct SampleTerm {
  double target = 0.0;
  double weight = 1.0;
};

inline SampleTerm sample_term(const LabeledSample& s, const TrainConfig& config) {
  switch (s.label) {
    case Label::Positive: return {1.0, 1.0};
    case Label::Negative: return {0.0, 1.0};
    case Label::Tolerance:
      switch (config.objective) {
        case Objective::Standard: return {1.0, 1.0};
        case Objective::ToleranceAsNegative: return {0.0, 1.0};
        case Objective::ToleranceAsWeakPositive:
          if (config.fixed_beta) return {1.0, *config.fixed_beta};
          if (!s.beta)
            throw ConfigError("tolerance sample (" + s.user_id + ", " + s.item_id +
                              ") has no beta; use a fixed beta or relabel");
          return {1.0, *s.beta};
      }
  }
  return {};
}

namespace detail {

// -w [y log sigmoid(z) + (1 - y) log(1 - sigmoid(z))]
inline double weighted_bce(double z, SampleTerm t) {
  return t.weight * (t.target * softplus(-z) + (1.0 - t.target) * softplus(z));
}

struct ResolvedSample {
  std::optional<std::size_t> user;
  std::optional<std::size_t> item;
  SampleTerm term;
};

inline std::vector<ResolvedSample> resolve(const RankingModel& model,
                                           const std::vector<LabeledSample>& samples,
                                           const TrainConfig& config) {
  std::vector<ResolvedSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples)
    out.push_back({model.user_index(s.user_id), model.item_index(s.item_id), sample_term(s, config)});
  return out;
}

inline double logit(const ParameterBlock& p, const ResolvedSample& s) {
  double z = p.global_bias;
  if (s.user) z += p.user_bias[*s.user];
  if (s.item) z += p.item_bias[*s.item];
  if (s.user && s.item) {
    auto pu = p.user(*s.user);
    auto qi = p.item(*s.item);
    z += std::inner_product(pu.begin(), pu.end(), qi.begin(), 0.0);
  }
  return z;
}

inline double mean_loss(const ParameterBlock& p, const std::vector<ResolvedSample>& samples,
                        double l2) {
  double sum = 0.0;
  for (const auto& s : samples) sum += weighted_bce(logit(p, s), s.term);
  const double data = samples.empty() ? 0.0 : sum / static_cast<double>(samples.size());
  return data + 0.5 * l2 * p.regularized_norm2();
}

}  // namespace detail

// Mean weighted cross-entropy over the samples plus (l2 / 2) * ||theta||^2,
// where theta excludes the global bias.
inline double loss(const RankingModel& model, const std::vector<LabeledSample>& samples,
                   const TrainConfig& config) {
  return detail::mean_loss(model.params(), detail::resolve(model, samples, config), config.l2);
}

// Exact gradient of loss() with respect to every model parameter.
inline ParameterBlock gradient(const RankingModel& model, const std::vector<LabeledSample>& samples,
                               const TrainConfig& config) {
  const auto& p = model.params();
  ParameterBlock g(p.dimension, p.users(), p.items());
  const auto resolved = detail::resolve(model, samples, config);
  const double inv_n = resolved.empty() ? 0.0 : 1.0 / static_cast<double>(resolved.size());
  for (const auto& s : resolved) {
    const double dz = s.term.weight * (detail::sigmoid(detail::logit(p, s)) - s.term.target) * inv_n;
    g.global_bias += dz;
    if (s.user) g.user_bias[*s.user] += dz;
    if (s.item) g.item_bias[*s.item] += dz;
    if (s.user && s.item) {
      auto pu = p.user(*s.user);
      auto qi = p.item(*s.item);
      auto gu = g.user(*s.user);
      auto gi = g.item(*s.item);
      for (std::size_t k = 0; k < p.dimension; ++k) {
        gu[k] += dz * qi[k];
        gi[k] += dz * pu[k];
      }
    }
  }
  if (config.l2 > 0.0) {
    auto add = [&](std::vector<double>& gv, const std::vector<double>& pv) {
      for (std::size_t k = 0; k < gv.size(); ++k) gv[k] += config.l2 * pv[k];
    };
    add(g.user_bias, p.user_bias);
    add(g.item_bias, p.item_bias);
    add(g.user_factors, p.user_factors);
    add(g.item_factors, p.item_factors);
  }
  return g;
}

struct TrainResult {
  RankingModel model;
  // loss_history[0] is the loss at initialization, loss_history[e] after epoch e.
  std::vector<double> loss_history;
};

namespace detail {

// Sparse accumulator for one minibatch shard.
class ShardGradient {
 public:
  ShardGradient(std::size_t dim, std::size_t users, std::size_t items)
      : dim_(dim), user_(users * (dim + 1), 0.0), item_(items * (dim + 1), 0.0),
        user_seen_(users, false), item_seen_(items, false) {}

  void accumulate(const ParameterBlock& p, const ResolvedSample& s, double scale) {
    const double dz = s.term.weight * (sigmoid(logit(p, s)) - s.term.target) * scale;
    global_ += dz;
    const std::size_t u = *s.user;
    const std::size_t i = *s.item;
    touch(user_seen_, touched_users_, u);
    touch(item_seen_, touched_items_, i);
    double* gu = &user_[u * (dim_ + 1)];
    double* gi = &item_[i * (dim_ + 1)];
    gu[0] += dz;
    gi[0] += dz;
    auto pu = p.user(u);
    auto qi = p.item(i);
    for (std::size_t k = 0; k < dim_; ++k) {
      gu[k + 1] += dz * qi[k];
      gi[k + 1] += dz * pu[k];
    }
  }

  // Adds this shard into `into` and clears itself.
  void drain_into(ShardGradient& into) {
    into.global_ += global_;
    global_ = 0.0;
    for (std::size_t u : touched_users_) {
      into.touch(into.user_seen_, into.touched_users_, u);
      for (std::size_t k = 0; k <= dim_; ++k) {
        into.user_[u * (dim_ + 1) + k] += user_[u * (dim_ + 1) + k];
        user_[u * (dim_ + 1) + k] = 0.0;
      }
      user_seen_[u] = false;
    }
    for (std::size_t i : touched_items_) {
      into.touch(into.item_seen_, into.touched_items_, i);
      for (std::size_t k = 0; k <= dim_; ++k) {
        into.item_[i * (dim_ + 1) + k] += item_[i * (dim_ + 1) + k];
        item_[i * (dim_ + 1) + k] = 0.0;
      }
      item_seen_[i] = false;
    }
    touched_users_.clear();
    touched_items_.clear();
  }

  // SGD step on touched parameters (lazy l2), then clears.
  void apply(ParameterBlock& p, double lr, double l2) {
    p.global_bias -= lr * global_;
    global_ = 0.0;
    for (std::size_t u : touched_users_) {
      double* g = &user_[u * (dim_ + 1)];
      p.user_bias[u] -= lr * (g[0] + l2 * p.user_bias[u]);
      auto pu = p.user(u);
      for (std::size_t k = 0; k < dim_; ++k) pu[k] -= lr * (g[k + 1] + l2 * pu[k]);
      std::fill(g, g + dim_ + 1, 0.0);
      user_seen_[u] = false;
    }
    for (std::size_t i : touched_items_) {
      double* g = &item_[i * (dim_ + 1)];
      p.item_bias[i] -= lr * (g[0] + l2 * p.item_bias[i]);
      auto qi = p.item(i);
      for (std::size_t k = 0; k < dim_; ++k) qi[k] -= lr * (g[k + 1] + l2 * qi[k]);
      std::fill(g, g + dim_ + 1, 0.0);
      item_seen_[i] = false;
    }
    touched_users_.clear();
    touched_items_.clear();
  }

 private:
  static void touch(std::vector<bool>& seen, std::vector<std::size_t>& list, std::size_t k) {
    if (!seen[k]) {
      seen[k] = true;
      list.push_back(k);
    }
  }

  std::size_t dim_;
  double global_ = 0.0;
  std::vector<double> user_;
  std::vector<double> item_;
  std::vector<bool> user_seen_;
  std::vector<bool> item_seen_;
  std::vector<std::size_t> touched_users_;
  std::vector<std::size_t> touched_items_;
};

}  // namespace detail

// Minibatch SGD. Parameters start from seeded uniform(-init_scale, init_scale)
// (or from `warm_start` for ids it knows); the shuffle order is drawn from the
// same seeded engine. With threads == 1 the result is bitwise reproducible;
// threads > 1 splits each minibatch into shards whose gradients are summed in
// shard order.
inline TrainResult train(const std::vector<LabeledSample>& samples, const TrainConfig& config,
                         const RankingModel* warm_start = nullptr,
                         const std::string& context = {}) {
  config.validate();
  if (samples.empty()) throw DomainError("train requires a non-empty sample collection");
  if (warm_start && warm_start->dimension() != config.dimension)
    throw ConfigError("warm-start model dimension does not match config");

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> init(-config.init_scale, config.init_scale);

  TrainResult result{RankingModel(config.dimension), {}};
  RankingModel& model = result.model;
  for (const auto& s : samples) {
    model.add_user(s.user_id);
    model.add_item(s.item_id);
  }
  ParameterBlock& p = model.params();
  for (double& v : p.user_bias) v = init(rng);
  for (double& v : p.item_bias) v = init(rng);
  for (double& v : p.user_factors) v = init(rng);
  for (double& v : p.item_factors) v = init(rng);
  if (warm_start) {
    const auto& w = warm_start->params();
    p.global_bias = w.global_bias;
    for (std::size_t u = 0; u < model.user_ids().size(); ++u) {
      if (auto wu = warm_start->user_index(model.user_ids()[u])) {
        p.user_bias[u] = w.user_bias[*wu];
        std::copy_n(w.user(*wu).begin(), config.dimension, p.user(u).begin());
      }
    }
    for (std::size_t i = 0; i < model.item_ids().size(); ++i) {
      if (auto wi = warm_start->item_index(model.item_ids()[i])) {
        p.item_bias[i] = w.item_bias[*wi];
        std::copy_n(w.item(*wi).begin(), config.dimension, p.item(i).begin());
      }
    }
  }

  const auto resolved = detail::resolve(model, samples, config);
  auto full_loss = [&](int epoch) {
    const double l = detail::mean_loss(p, resolved, config.l2);
    if (!std::isfinite(l)) throw DivergenceError(epoch, context);
    return l;
  };
  result.loss_history.push_back(full_loss(0));

  const std::size_t shards = std::max<std::size_t>(1, config.threads);
  std::vector<detail::ShardGradient> shard_grads(
      shards, detail::ShardGradient(config.dimension, p.users(), p.items()));

  std::vector<std::size_t> order(resolved.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      detail::parallel_shards(end - start, shards,
                              [&](std::size_t b, std::size_t e, std::size_t shard) {
                                for (std::size_t k = b; k < e; ++k)
                                  shard_grads[shard].accumulate(p, resolved[order[start + k]], scale);
                              });
      for (std::size_t s = 1; s < shards; ++s) shard_grads[s].drain_into(shard_grads[0]);
      shard_grads[0].apply(p, config.learning_rate, config.l2);
    }
    result.loss_history.push_back(full_loss(epoch));
  }
  return result;
}

// Candidates by descending score, ties by ascending item id.
inline std::vector<std::string> rank(const RankingModel& model, const std::string& user,
                                     std::vector<std::string> candidates) {
  if (candidates.empty()) throw DomainError("rank requires at least one candidate");
  std::vector<std::pair<double, std::string>> scored;
  scored.reserve(candidates.size());
  for (auto& c : candidates) {
    const double s = predict(model, user, c);
    scored.emplace_back(s, std::move(c));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  out.reserve(scored.size());
  for (auto& [_, id] : scored) out.push_back(std::move(id));
  return out;
}

// Appends k sampled negatives per positive/tolerance sample, drawn uniformly
// from items the user never interacted with. For logs without impression records.
inline std::vector<LabeledSample> with_sampled_negatives(std::vector<LabeledSample> samples,
                                                         std::size_t k, std::uint64_t seed) {
  std::vector<std::string> items;
  std::unordered_map<std::string, std::unordered_set<std::string>> seen;
  {
    std::unordered_set<std::string> item_set;
    for (const auto& s : samples) {
      if (item_set.insert(s.item_id).second) items.push_back(s.item_id);
      seen[s.user_id].insert(s.item_id);
    }
  }
  std::sort(items.begin(), items.end());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, items.empty() ? 0 : items.size() - 1);
  const std::size_t n = samples.size();
  for (std::size_t s = 0; s < n; ++s) {
    if (samples[s].label == Label::Negative) continue;
    const auto& user_seen = seen[samples[s].user_id];
    if (user_seen.size() >= items.size()) continue;
    for (std::size_t j = 0; j < k; ++j) {
      for (int attempt = 0; attempt < 64; ++attempt) {
        const std::string& candidate = items[pick(rng)];
        if (user_seen.count(candidate)) continue;
        samples.push_back(LabeledSample{samples[s].user_id, candidate, samples[s].timestamp,
                                        Label::Negative, std::nullopt});
        break;
      }
    }
  }
  return samples;
}

// ---------------------------------------------------------------------------
// Model snapshot: a line-oriented text format with shortest round-trip decimals.
//
//   tolerec-model 1
//   dimension <d>
//   global_bias <b>
//   users <U>
//   <json-quoted id>\t<bias>\t<f_1>\t...\t<f_d>     (U lines)
//   items <I>
//   <json-quoted id>\t<bias>\t<f_1>\t...\t<f_d>     (I lines)

inline void write_model(std::ostream& out, const RankingModel& model) {
  const auto& p = model.params();
  out << "tolerec-model 1\n";
  out << "dimension " << p.dimension << "\n";
  out << "global_bias " << detail::format_double(p.global_bias) << "\n";
  auto rows = [&](const char* tag, const std::vector<std::string>& ids,
                  const std::vector<double>& bias, auto factors) {
    out << tag << " " << ids.size() << "\n";
    for (std::size_t k = 0; k < ids.size(); ++k) {
      out << nlohmann::json(ids[k]).dump() << '\t' << detail::format_double(bias[k]);
      for (double f : factors(k)) out << '\t' << detail::format_double(f);
      out << '\n';
    }
  };
  rows("users", model.user_ids(), p.user_bias, [&](std::size_t u) { return p.user(u); });
  rows("items", model.item_ids(), p.item_bias, [&](std::size_t i) { return p.item(i); });
}

inline RankingModel read_model(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) throw ParseError(line_no + 1, "unexpected end of model snapshot");
    ++line_no;
    return line;
  };
  auto header = [&](std::string_view key) -> std::string {
    const std::string& l = next();
    if (l.rfind(std::string(key) + " ", 0) != 0)
      throw ParseError(line_no, "expected '" + std::string(key) + "'");
    return l.substr(key.size() + 1);
  };
  auto number = [&](const std::string& text) {
    double v = 0.0;
    if (!detail::parse_double(text, v)) throw ParseError(line_no, "bad number '" + text + "'");
    return v;
  };
  auto count = [&](const std::string& text) -> std::size_t {
    std::size_t v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      throw ParseError(line_no, "bad count '" + text + "'");
    return v;
  };

  if (next() != "tolerec-model 1") throw ParseError(line_no, "not a tolerec model snapshot");
  const std::size_t dim = count(header("dimension"));
  if (dim < 1) throw ParseError(line_no, "dimension must be >= 1");
  RankingModel model(dim);
  model.params().global_bias = number(header("global_bias"));

  auto read_rows = [&](std::string_view tag, bool users) {
    const std::size_t n = count(header(tag));
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<std::string> fields;
      std::stringstream ss(next());
      for (std::string f; std::getline(ss, f, '\t');) fields.push_back(f);
      if (fields.size() != dim + 2) throw ParseError(line_no, "expected " + std::to_string(dim + 2) + " fields");
      std::string id;
      try {
        id = nlohmann::json::parse(fields[0]).get<std::string>();
      } catch (const nlohmann::json::exception&) {
        throw ParseError(line_no, "bad id field");
      }
      auto& p = model.params();
      const std::size_t k = users ? model.add_user(id) : model.add_item(id);
      (users ? p.user_bias : p.item_bias)[k] = number(fields[1]);
      auto factors = users ? p.user(k) : p.item(k);
      for (std::size_t d = 0; d < dim; ++d) factors[d] = number(fields[d + 2]);
    }
  };
  read_rows("users", true);
  read_rows("items", false);
  return model;
}

}  // namespace tolerec
