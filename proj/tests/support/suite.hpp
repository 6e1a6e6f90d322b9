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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "monocheck/datasets.hpp"
#include "monocheck/harness.hpp"
#include "monocheck/models.hpp"
#include "monocheck/rng.hpp"

namespace monocheck::testing {

// Ground truth used to label synthetic training data.
struct Generator {
  std::string name;
  FeatureSpace space;
  std::function<ClassRank(const Instance&)> label;
  double noise = 0;
};

inline FeatureSpace real_space(std::size_t n, double hi, std::size_t classes) {
  std::vector<FeatureSpec> fs;
  for (std::size_t i = 0; i < n; ++i)
    fs.push_back({"x" + std::to_string(i), FeatureKind::kReal, 0.0, hi, {}});
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < classes; ++k) labels.push_back("c" + std::to_string(k));
  return FeatureSpace(std::move(fs), std::move(labels));
}

inline ClassRank quantize(double s, double step, std::size_t classes) {
  const auto k = static_cast<ClassRank>(std::floor(s / step));
  return std::clamp<ClassRank>(k, 0, static_cast<ClassRank>(classes - 1));
}

// Increasing in x0, plus label noise.
inline Generator linear_noisy() {
  return {"linear", real_space(3, 10, 3),
          [](const Instance& x) { return quantize(x[0] + 0.5 * x[1] + 0.3 * x[2], 4.5, 3); },
          0.05};
}

// Increasing in x0 except for a small pocket where the class drops.
inline Generator dip() {
  return {"dip", real_space(4, 10, 3),
          [](const Instance& x) {
            ClassRank y = quantize(x[0] + 0.4 * x[1], 4.0, 3);
            if (x[0] >= 6 && x[0] < 7.5 && x[1] >= 2 && x[1] < 5) y = std::max(0, y - 1);
            return y;
          },
          0.0};
}

// Integer features, increasing in x0 and x1, plus label noise.
inline Generator integer_grid() {
  std::vector<FeatureSpec> fs;
  for (int i = 0; i < 3; ++i)
    fs.push_back({"n" + std::to_string(i), FeatureKind::kInteger, 0.0, 20.0, {}});
  return {"integer", FeatureSpace(std::move(fs), {"low", "mid", "high"}),
          [](const Instance& x) { return quantize(x[0] + x[1] + 0.2 * x[2], 14.0, 3); }, 0.08};
}

// Increasing in x0 and slightly decreasing in x1.
inline Generator negative_slope() {
  return {"negative", real_space(3, 10, 2),
          [](const Instance& x) { return x[0] - 0.6 * x[1] + 0.1 * x[2] > 2.5 ? 1 : 0; }, 0.02};
}

inline Dataset synthesize(const Generator& g, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d{g.space, {}, "class"};
  for (std::size_t r = 0; r < n; ++r) {
    Instance x = sample_uniform(g.space, rng);
    ClassRank y = g.label(x);
    if (rng.bernoulli(g.noise)) y = static_cast<ClassRank>(rng.index(g.space.class_count()));
    d.rows.push_back({std::move(x), y});
  }
  return d;
}

struct SuiteEntry {
  std::string name;
  ModelKind kind;
  Generator gen;
  MonotonicityConstraint constraint;
};

inline std::vector<SuiteEntry> suite_entries() {
  const MonotonicityConstraint w0(Variant::kWeak, {0});
  const MonotonicityConstraint w1(Variant::kWeak, {1});
  const MonotonicityConstraint s0(Variant::kStrong, {0});
  const MonotonicityConstraint s1(Variant::kStrong, {1});
  const MonotonicityConstraint w01(Variant::kWeak, {0, 1});
  return {
      {"cart-linear", ModelKind::kTree, linear_noisy(), w0},
      {"cart-dip", ModelKind::kTree, dip(), w0},
      {"cart-dip-strong", ModelKind::kTree, dip(), s0},
      {"cart-integer", ModelKind::kTree, integer_grid(), w01},
      {"forest-linear", ModelKind::kForest, linear_noisy(), w0},
      {"forest-dip", ModelKind::kForest, dip(), w0},
      {"forest-integer", ModelKind::kForest, integer_grid(), w01},
      {"knn-linear", ModelKind::kKnn, linear_noisy(), w0},
      {"knn-dip", ModelKind::kKnn, dip(), w0},
      {"knn-integer", ModelKind::kKnn, integer_grid(), w01},
      {"logreg-negative", ModelKind::kLogistic, negative_slope(), w1},
      {"logreg-negative-strong", ModelKind::kLogistic, negative_slope(), s1},
      {"cart-negative", ModelKind::kTree, negative_slope(), w1},
      {"forest-negative", ModelKind::kForest, negative_slope(), w1},
  };
}

// Independent dense scan: for sampled base points, sweep each monotone
// feature upward over a fine grid with every other feature held fixed. Any
// hit is a weak (hence also strong) violation.
inline std::optional<std::pair<Instance, Instance>> scan_violation(
    const Model& m, const MonotonicityConstraint& c, const FeatureSpace& fs,
    std::size_t bases = 1500, std::size_t steps = 120, std::uint64_t seed = 99) {
  Rng rng(seed);
  for (std::size_t b = 0; b < bases; ++b) {
    const Instance x = sample_uniform(fs, rng);
    const ClassRank y = m.predict(x);
    for (std::size_t f : c.features()) {
      const auto& spec = fs.feature(f);
      Instance x2 = x;
      for (std::size_t s = 1; s <= steps; ++s) {
        double v = x[f] + (spec.upper - x[f]) * static_cast<double>(s) / static_cast<double>(steps);
        if (spec.integral()) v = std::floor(v);
        if (v <= x[f]) continue;
        x2[f] = v;
        if (m.predict(x2) < y) return std::make_pair(x, x2);
      }
    }
  }
  return std::nullopt;
}

struct SuiteModel {
  std::string name;
  std::shared_ptr<const Dataset> data;
  std::shared_ptr<const BuiltinModel> model;
  MonotonicityConstraint constraint;
  std::pair<Instance, Instance> known_violation;
};

// Training seed s = 1, 2, ... is the first for which the dense scan
// confirms the trained model is not monotone.
inline std::vector<SuiteModel> build_suite() {
  std::vector<SuiteModel> out;
  for (const auto& e : suite_entries()) {
    for (std::uint64_t s = 1; s <= 20; ++s) {
      auto data = std::make_shared<const Dataset>(synthesize(e.gen, 400, s));
      Rng rng(1000 + s);
      Hyperparams hp;
      auto model = std::make_shared<const BuiltinModel>(train_builtin(e.kind, *data, hp, rng));
      if (auto v = scan_violation(*model, e.constraint, data->space)) {
        out.push_back({e.name, data, model, e.constraint, *v});
        break;
      }
    }
  }
  return out;
}

// Budgets: max_samples 1000, ini 100, pool 50; seeds 1..repetitions.
inline ExperimentPlan suite_plan(const std::vector<SuiteModel>& suite, std::size_t repetitions) {
  ExperimentPlan plan;
  plan.workers = 1;
  for (const auto& m : suite) {
    Task t{m.name, [model = m.model] { return model; }, m.data->space, m.constraint};
    t.seeds.clear();
    for (std::size_t r = 1; r <= repetitions; ++r) t.seeds.push_back(r);
    t.training_data = m.data;
    plan.tasks.push_back(std::move(t));
  }
  return plan;
}

}  // namespace monocheck::testing
