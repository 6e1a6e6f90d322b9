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

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "monocheck/core.hpp"
#include "monocheck/datasets.hpp"
#include "monocheck/rng.hpp"
#include "monocheck/tree.hpp"

namespace monocheck {

// Always predicts the same class.
class ConstantModel : public Model {
 public:
  explicit ConstantModel(ClassRank rank) : rank_(rank) {}
  ClassRank predict(std::span<const double>) const override { return rank_; }

 private:
  ClassRank rank_;
};

// Majority vote over trees; ties go to the lowest rank.
class RandomForest {
 public:
  RandomForest(std::vector<TreeModel> trees, std::size_t class_count)
      : trees_(std::move(trees)), class_count_(class_count) {
    if (trees_.empty()) throw ConfigError("forest has no trees");
  }

  ClassRank predict(std::span<const double> x) const {
    std::vector<std::size_t> votes(class_count_, 0);
    for (const auto& t : trees_) ++votes[static_cast<std::size_t>(t.predict(x))];
    return static_cast<ClassRank>(std::max_element(votes.begin(), votes.end()) -
                                  votes.begin());
  }

  const std::vector<TreeModel>& trees() const { return trees_; }

 private:
  std::vector<TreeModel> trees_;
  std::size_t class_count_;
};

// k nearest training rows under Euclidean distance. Equal distances prefer
// the lower row index; vote ties go to the lowest rank.
class Knn {
 public:
  Knn(std::size_t k, std::vector<Row> rows, std::size_t class_count)
      : k_(k), rows_(std::move(rows)), class_count_(class_count) {
    if (k_ == 0) throw ConfigError("knn: k must be positive");
    if (k_ > rows_.size())
      throw ConfigError("knn: k = " + std::to_string(k_) + " exceeds " +
                        std::to_string(rows_.size()) + " training rows");
  }

  ClassRank predict(std::span<const double> x) const {
    std::vector<std::pair<double, std::size_t>> d(rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      double s = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double diff = x[i] - rows_[r].x[i];
        s += diff * diff;
      }
      d[r] = {s, r};
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k_), d.end());
    std::vector<std::size_t> votes(class_count_, 0);
    for (std::size_t j = 0; j < k_; ++j)
      ++votes[static_cast<std::size_t>(rows_[d[j].second].y)];
    return static_cast<ClassRank>(std::max_element(votes.begin(), votes.end()) -
                                  votes.begin());
  }

  std::size_t k() const { return k_; }

 private:
  std::size_t k_;
  std::vector<Row> rows_;
  std::size_t class_count_;
};

// One-vs-rest linear scores over standardized features; argmax with ties
// to the lowest rank. Classes absent from training never win.
class LogisticRegression {
 public:
  LogisticRegression(std::vector<std::vector<double>> weights, std::vector<double> bias,
                     std::vector<double> mean, std::vector<double> scale)
      : weights_(std::move(weights)),
        bias_(std::move(bias)),
        mean_(std::move(mean)),
        scale_(std::move(scale)) {}

  ClassRank predict(std::span<const double> x) const {
    ClassRank best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      const double s = score(k, x);
      if (s > best_score) {
        best_score = s;
        best = static_cast<ClassRank>(k);
      }
    }
    return best;
  }

  double score(std::size_t k, std::span<const double> x) const {
    if (weights_[k].empty()) return -std::numeric_limits<double>::infinity();
    double s = bias_[k];
    for (std::size_t i = 0; i < x.size(); ++i)
      s += weights_[k][i] * (x[i] - mean_[i]) / scale_[i];
    return s;
  }

 private:
  std::vector<std::vector<double>> weights_;  // empty for unseen classes
  std::vector<double> bias_;
  std::vector<double> mean_;
  std::vector<double> scale_;
};

enum class ModelKind { kTree, kForest, kKnn, kLogistic };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kTree: return "tree";
    case ModelKind::kForest: return "forest";
    case ModelKind::kKnn: return "knn";
    case ModelKind::kLogistic: return "logreg";
  }
  return "?";
}

struct Hyperparams {
  TreeParams tree;
  // Forest.
  std::size_t trees = 10;
  bool bootstrap = true;
  // Features tried per node; unset means ceil(sqrt(n)).
  std::optional<std::size_t> forest_features;
  // kNN.
  std::size_t k = 3;
  // Logistic regression: full-batch gradient descent on mean log-loss.
  std::size_t iterations = 500;
  double step = 0.5;
};

class BuiltinModel : public Model {
 public:
  using Variant = std::variant<TreeModel, RandomForest, Knn, LogisticRegression>;

  explicit BuiltinModel(Variant v) : model_(std::move(v)) {}

  ClassRank predict(std::span<const double> x) const override {
    return std::visit([&](const auto& m) { return m.predict(x); }, model_);
  }

  ModelKind kind() const { return static_cast<ModelKind>(model_.index()); }
  const Variant& get() const { return model_; }

 private:
  Variant model_;
};

namespace detail {

inline LogisticRegression fit_logistic(const Dataset& data, const Hyperparams& hp) {
  const std::size_t n = data.space.size();
  const std::size_t classes = data.space.class_count();
  const double count = static_cast<double>(data.size());
  std::vector<double> mean(n, 0), scale(n, 0);
  for (const auto& r : data.rows)
    for (std::size_t i = 0; i < n; ++i) mean[i] += r.x[i] / count;
  for (const auto& r : data.rows)
    for (std::size_t i = 0; i < n; ++i) scale[i] += (r.x[i] - mean[i]) * (r.x[i] - mean[i]) / count;
  for (auto& s : scale) s = s > 0 ? std::sqrt(s) : 1.0;

  std::vector<std::vector<double>> z(data.size(), std::vector<double>(n));
  for (std::size_t r = 0; r < data.size(); ++r)
    for (std::size_t i = 0; i < n; ++i) z[r][i] = (data.rows[r].x[i] - mean[i]) / scale[i];

  std::vector<std::vector<double>> weights(classes);
  std::vector<double> bias(classes, 0);
  std::vector<double> grad(n);
  for (std::size_t k = 0; k < classes; ++k) {
    const bool present = std::any_of(data.rows.begin(), data.rows.end(), [&](const Row& r) {
      return static_cast<std::size_t>(r.y) == k;
    });
    if (!present) continue;
    std::vector<double> w(n, 0);
    double b = 0;
    for (std::size_t it = 0; it < hp.iterations; ++it) {
      std::fill(grad.begin(), grad.end(), 0);
      double gb = 0;
      for (std::size_t r = 0; r < data.size(); ++r) {
        double s = b;
        for (std::size_t i = 0; i < n; ++i) s += w[i] * z[r][i];
        const double p = 1 / (1 + std::exp(-s));
        const double err = p - (static_cast<std::size_t>(data.rows[r].y) == k ? 1.0 : 0.0);
        for (std::size_t i = 0; i < n; ++i) grad[i] += err * z[r][i];
        gb += err;
      }
      for (std::size_t i = 0; i < n; ++i) w[i] -= hp.step * grad[i] / count;
      b -= hp.step * gb / count;
    }
    weights[k] = std::move(w);
    bias[k] = b;
  }
  return LogisticRegression(std::move(weights), std::move(bias), std::move(mean),
                            std::move(scale));
}

}  // namespace detail

// Trains a built-in model. Only the forest consumes randomness (bootstrap
// rows and per-node feature subsets).
inline BuiltinModel train_builtin(ModelKind kind, const Dataset& data,
                                  const Hyperparams& hp, Rng& rng) {
  if (data.empty()) throw InputError("train_builtin: empty dataset");
  switch (kind) {
    case ModelKind::kTree:
      return BuiltinModel(train_tree(data, hp.tree));
    case ModelKind::kKnn:
      return BuiltinModel(Knn(hp.k, data.rows, data.space.class_count()));
    case ModelKind::kLogistic:
      return BuiltinModel(detail::fit_logistic(data, hp));
    case ModelKind::kForest: {
      if (hp.trees == 0) throw ConfigError("forest needs at least one tree");
      const std::size_t n = data.space.size();
      TreeParams params = hp.tree;
      params.max_features = hp.forest_features.value_or(
          static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n)))));
      std::vector<TreeModel> trees;
      for (std::size_t t = 0; t < hp.trees; ++t) {
        Rng tree_rng = rng.fork(t);
        Dataset sample{data.space, {}, data.class_column};
        if (hp.bootstrap) {
          sample.rows.reserve(data.size());
          for (std::size_t r = 0; r < data.size(); ++r)
            sample.rows.push_back(data.rows[tree_rng.index(data.size())]);
        } else {
          sample.rows = data.rows;
        }
        trees.push_back(train_tree(sample, params, &tree_rng));
      }
      return BuiltinModel(RandomForest(std::move(trees), data.space.class_count()));
    }
  }
  throw ConfigError("unknown model kind");
}

}  // namespace monocheck
