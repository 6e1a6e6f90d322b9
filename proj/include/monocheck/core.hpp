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
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "monocheck/error.hpp"

namespace monocheck {

// Index into FeatureSpace::class_labels(); a lower rank precedes a higher one
// in the class order.
using ClassRank = int;

// One value per feature, in FeatureSpace order. Ordered categorical values are
// stored as their integer code.
using Instance = std::vector<double>;

enum class FeatureKind { kInteger, kReal, kOrderedCategorical };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kReal;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  // Declared order of an ordered categorical feature; code i is categories[i].
  std::vector<std::string> categories;

  // Integer and categorical features only take integral values.
  bool integral() const { return kind != FeatureKind::kReal; }
  bool bounded() const { return std::isfinite(lower) && std::isfinite(upper); }
  bool degenerate() const { return lower == upper; }
};

class FeatureSpace {
 public:
  FeatureSpace() = default;

  FeatureSpace(std::vector<FeatureSpec> features,
               std::vector<std::string> class_labels)
      : features_(std::move(features)), class_labels_(std::move(class_labels)) {
    if (features_.empty()) throw ConfigError("feature space has no features");
    if (class_labels_.size() < 2)
      throw ConfigError("feature space needs at least two class labels");
    std::unordered_set<std::string> seen;
    for (auto& f : features_) {
      if (!seen.insert(f.name).second)
        throw ConfigError("duplicate feature name '" + f.name + "'");
      if (f.kind == FeatureKind::kOrderedCategorical) {
        if (f.categories.empty())
          throw ConfigError("categorical feature '" + f.name +
                            "' declares no values");
        f.lower = 0;
        f.upper = static_cast<double>(f.categories.size() - 1);
      }
      if (std::isnan(f.lower) || std::isnan(f.upper) || f.lower > f.upper)
        throw ConfigError("feature '" + f.name + "' has lower > upper");
    }
    std::unordered_set<std::string> labels;
    for (const auto& l : class_labels_)
      if (!labels.insert(l).second)
        throw ConfigError("duplicate class label '" + l + "'");
  }

  std::size_t size() const { return features_.size(); }
  const FeatureSpec& feature(std::size_t i) const { return features_.at(i); }
  const std::vector<FeatureSpec>& features() const { return features_; }

  std::size_t class_count() const { return class_labels_.size(); }
  const std::vector<std::string>& class_labels() const { return class_labels_; }
  const std::string& class_label(ClassRank r) const {
    return class_labels_.at(static_cast<std::size_t>(r));
  }

  std::optional<std::size_t> find_feature(const std::string& name) const {
    for (std::size_t i = 0; i < features_.size(); ++i)
      if (features_[i].name == name) return i;
    return std::nullopt;
  }

  std::optional<ClassRank> find_class(const std::string& label) const {
    for (std::size_t i = 0; i < class_labels_.size(); ++i)
      if (class_labels_[i] == label) return static_cast<ClassRank>(i);
    return std::nullopt;
  }

  bool valid_rank(ClassRank r) const {
    return r >= 0 && static_cast<std::size_t>(r) < class_labels_.size();
  }

  void check_dimension(std::span<const double> x) const {
    if (x.size() != features_.size())
      throw InputError("instance has " + std::to_string(x.size()) +
                       " values, feature space has " +
                       std::to_string(features_.size()));
  }

  // Length, bounds and integrality.
  bool contains(std::span<const double> x) const {
    if (x.size() != features_.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto& f = features_[i];
      if (!(x[i] >= f.lower && x[i] <= f.upper)) return false;
      if (f.integral() && std::floor(x[i]) != x[i]) return false;
    }
    return true;
  }

  // Integer points of an integral feature, clipped to its bounds.
  std::int64_t integer_lower(std::size_t i) const {
    return static_cast<std::int64_t>(std::ceil(features_.at(i).lower));
  }
  std::int64_t integer_upper(std::size_t i) const {
    return static_cast<std::int64_t>(std::floor(features_.at(i).upper));
  }

 private:
  std::vector<FeatureSpec> features_;
  std::vector<std::string> class_labels_;
};

enum class Variant { kWeak, kStrong };

inline const char* to_string(Variant v) {
  return v == Variant::kWeak ? "weak" : "strong";
}

// A weak or strong monotonicity requirement over a group of features. With a
// single feature it is plain (weak/strong) monotonicity; with several it is
// group monotonicity.
class MonotonicityConstraint {
 public:
  MonotonicityConstraint(Variant variant, std::vector<std::size_t> features)
      : variant_(variant), features_(std::move(features)) {
    std::sort(features_.begin(), features_.end());
    features_.erase(std::unique(features_.begin(), features_.end()),
                    features_.end());
    if (features_.empty())
      throw ConfigError("monotone feature set must not be empty");
  }

  Variant variant() const { return variant_; }
  const std::vector<std::size_t>& features() const { return features_; }

  bool monotone(std::size_t feature) const {
    return std::binary_search(features_.begin(), features_.end(), feature);
  }

  void check(const FeatureSpace& fs) const {
    if (features_.back() >= fs.size())
      throw ConfigError("monotone feature index " +
                        std::to_string(features_.back()) + " out of range");
  }

 private:
  Variant variant_;
  std::vector<std::size_t> features_;
};

// Black-box classifier. Implementations must be deterministic and safe for
// concurrent const calls.
class Model {
 public:
  virtual ~Model() = default;
  virtual ClassRank predict(std::span<const double> x) const = 0;
};

enum class CexStatus { kCandidate, kValidated };

struct CounterExample {
  Instance x;
  Instance x_prime;
  ClassRank y = 0;
  ClassRank y_prime = 0;
  CexStatus status = CexStatus::kCandidate;
};

// Whether (x, x2) is a test pair for constraint c: monotone features do not
// decrease, and under the weak variant every other feature is unchanged
// (compared exactly).
inline bool precondition_holds(std::span<const double> x,
                               std::span<const double> x2,
                               const MonotonicityConstraint& c,
                               const FeatureSpace& fs) {
  fs.check_dimension(x);
  fs.check_dimension(x2);
  c.check(fs);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (c.monotone(i)) {
      if (!(x[i] <= x2[i])) return false;
    } else if (c.variant() == Variant::kWeak && x[i] != x2[i]) {
      return false;
    }
  }
  return true;
}

// M(x) not below-or-equal M(x') in the class order.
inline bool is_violation(ClassRank y, ClassRank y2) { return y > y2; }

}  // namespace monocheck
