/*
 * Copyright 2026 The Monocheck Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "monocheck/core.hpp"
#include "monocheck/datasets.hpp"
#include "monocheck/report.hpp"
#include "monocheck/rng.hpp"
#include "monocheck/tree.hpp"
#include "monocheck/verifier.hpp"

namespace monocheck {

struct VbtConfig {
  // Oracle rows used to train the first surrogate.
  std::size_t max_orcl = 1000;
  std::size_t max_samples = 1000;
  // Optional training set of the model under test; a fraction of oracle
  // instances is drawn from it (labels are replaced by the model's).
  std::shared_ptr<const Dataset> training_data;
  // Fraction of oracle rows taken from training_data. Defaults to 0.1 when
  // training data is given and 0 otherwise.
  std::optional<double> training_mix;
  TreeParams tree;
  bool stop_at_first = true;
  bool prune_instances = true;
  bool prune_branches = true;
  std::uint64_t seed = 0;

  double effective_mix() const {
    if (!training_data || training_data->empty()) return 0.0;
    return training_mix.value_or(0.1);
  }

  void validate() const {
    if (max_orcl < 1) throw ConfigError("max_orcl must be at least 1");
    if (max_samples < 1) throw ConfigError("max_samples must be at least 1");
    const double mix = effective_mix();
    if (!(mix >= 0 && mix <= 1)) throw ConfigError("training_mix must lie in [0, 1]");
    if (training_mix && *training_mix > 0 && !training_data)
      throw ConfigError("training_mix given without training data");
  }
};

inline constexpr std::size_t kOracleAttemptsPerRow = 100;

// max_orcl distinct instances labelled by M: round(mix * max_orcl) taken
// without replacement from the training data, the rest uniform random.
inline Dataset generate_oracle(const Model& m, const FeatureSpace& fs,
                               const VbtConfig& cfg, Rng& rng) {
  cfg.validate();
  Dataset oracle{fs, {}, "class"};
  std::set<Instance> seen;
  auto add = [&](Instance x) {
    if (!seen.insert(x).second) return false;
    const ClassRank y = detail::query_model(m, x, fs);
    oracle.rows.push_back({std::move(x), y});
    return true;
  };

  std::size_t from_training = 0;
  if (const double mix = cfg.effective_mix(); mix > 0) {
    const auto& rows = cfg.training_data->rows;
    from_training = std::min(
        rows.size(), static_cast<std::size_t>(std::llround(mix * static_cast<double>(cfg.max_orcl))));
    // Partial Fisher-Yates over row indices.
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::size_t taken = 0;
    for (std::size_t i = 0; i < order.size() && taken < from_training; ++i) {
      std::swap(order[i], order[i + rng.index(order.size() - i)]);
      const Instance& x = rows[order[i]].x;
      if (!fs.contains(x))
        throw InputError("training row " + std::to_string(order[i]) +
                         " lies outside the feature space");
      if (add(x)) ++taken;
    }
    from_training = taken;
  }

  const std::size_t attempts_cap = kOracleAttemptsPerRow * cfg.max_orcl;
  std::size_t attempts = 0;
  while (oracle.rows.size() < cfg.max_orcl) {
    if (++attempts > attempts_cap)
      throw GenerationError("oracle: feature space too small for " +
                            std::to_string(cfg.max_orcl) + " distinct instances");
    add(sample_uniform(fs, rng));
  }
  return oracle;
}

// Candidate counterexamples from one surrogate: the base witness followed by
// the enabled pruning variations. Each carries the tree's classes.
inline std::vector<CounterExample> veri_gen(const TreeModel& tree,
                                            const MonotonicityConstraint& c,
                                            const FeatureSpace& fs,
                                            bool with_instances = true,
                                            bool with_branches = true) {
  const TreeQuery query(tree, c, fs);
  std::vector<CounterExample> out;
  const auto base = query.find();
  if (!base) return out;
  auto push = [&](const Witness& w) {
    out.push_back({w.x, w.x_prime, w.class1, w.class2, CexStatus::kCandidate});
  };
  push(*base);
  if (with_instances)
    for (const auto& w : prune_instances(*base, query)) push(w);
  if (with_branches)
    for (const auto& w : prune_branches(*base, query)) push(w);
  return out;
}

// Verification-based testing: train a surrogate tree on oracle data, compute
// candidate counterexamples on it, validate them against M, and feed
// mispredicted candidates back into the oracle until a counterexample is
// confirmed, the surrogate yields no new candidates, or max_samples pairs
// have been generated.
inline TestReport veri_test(const Model& m, const MonotonicityConstraint& c,
                            const FeatureSpace& fs, const VbtConfig& cfg) {
  cfg.validate();
  c.check(fs);
  detail::Stopwatch clock;
  TestReport report;
  report.method = Method::kVbt;
  Rng rng(cfg.seed);
  Rng tree_rng = rng.fork(1);

  std::set<std::pair<Instance, Instance>> ts;
  std::size_t checked = 0;
  bool found = false;
  try {
    Dataset oracle = generate_oracle(m, fs, cfg, rng);
    std::set<Instance> in_oracle;
    for (const auto& row : oracle.rows) in_oracle.insert(row.x);

    bool first_round = true;
    while (ts.size() < cfg.max_samples) {
      const TreeModel tree = train_tree(oracle, cfg.tree, &tree_rng);
      if (!first_round) ++report.retrainings;
      first_round = false;

      std::vector<CounterExample> fresh;
      for (auto& cand : veri_gen(tree, c, fs, cfg.prune_instances, cfg.prune_branches))
        if (ts.emplace(cand.x, cand.x_prime).second) fresh.push_back(std::move(cand));
      if (fresh.empty()) break;

      bool stop = false;
      for (auto& cand : fresh) {
        const ClassRank my = detail::query_model(m, cand.x, fs);
        const ClassRank my2 = detail::query_model(m, cand.x_prime, fs);
        if (is_violation(my, my2)) {
          if (!found) report.failed_attempts = checked;
          found = true;
          report.counterexamples.push_back(
              {cand.x, cand.x_prime, my, my2, CexStatus::kValidated});
          if (cfg.stop_at_first) {
            stop = true;
            break;
          }
        }
        ++checked;
        if (cand.y != my && in_oracle.insert(cand.x).second)
          oracle.rows.push_back({cand.x, my});
        if (cand.y_prime != my2 && in_oracle.insert(cand.x_prime).second)
          oracle.rows.push_back({cand.x_prime, my2});
      }
      if (stop) break;
    }
    report.oracle_size = oracle.rows.size();
  } catch (const ModelError& e) {
    report.error = e.what();
  }
  report.tests_generated = ts.size();
  if (!found) report.failed_attempts = checked;
  report.wall_time_seconds = clock.seconds();
  return report;
}

}  // namespace monocheck
