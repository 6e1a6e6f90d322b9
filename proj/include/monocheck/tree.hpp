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
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "monocheck/core.hpp"
#include "monocheck/datasets.hpp"
#include "monocheck/format.hpp"
#include "monocheck/rng.hpp"

namespace monocheck {

using NodeIndex = int;

// Internal nodes send x left when x[feature] < threshold and right otherwise.
struct Node {
  int feature = -1;
  double threshold = 0;
  NodeIndex left = -1;
  NodeIndex right = -1;
  ClassRank label = 0;

  bool is_leaf() const { return feature < 0; }

  static Node leaf(ClassRank r) { return Node{-1, 0, -1, -1, r}; }
  static Node split(int f, double t, NodeIndex l, NodeIndex r) {
    return Node{f, t, l, r, 0};
  }
};

// One edge of a root-to-leaf path: x[feature] >= threshold when `at_least`,
// x[feature] < threshold otherwise.
struct PathCondition {
  std::size_t feature = 0;
  double threshold = 0;
  bool at_least = false;

  bool holds(std::span<const double> x) const {
    return at_least ? x[feature] >= threshold : x[feature] < threshold;
  }
  PathCondition negated() const { return {feature, threshold, !at_least}; }

  friend bool operator==(const PathCondition&, const PathCondition&) = default;
};

class TreeModel : public Model {
 public:
  TreeModel() : TreeModel({Node::leaf(0)}, 1, 2) {}

  // Node 0 is the root. Throws ConfigError unless every node is reachable
  // exactly once from the root and all indices are in range.
  TreeModel(std::vector<Node> nodes, std::size_t feature_count,
            std::size_t class_count)
      : nodes_(std::move(nodes)),
        feature_count_(feature_count),
        class_count_(class_count) {
    validate();
  }

  ClassRank predict(std::span<const double> x) const override {
    return nodes_[static_cast<std::size_t>(leaf_of(x))].label;
  }

  NodeIndex leaf_of(std::span<const double> x) const {
    if (x.size() != feature_count_)
      throw InputError("tree expects " + std::to_string(feature_count_) +
                       " features, got " + std::to_string(x.size()));
    NodeIndex i = 0;
    while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
      const Node& n = nodes_[static_cast<std::size_t>(i)];
      i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return i;
  }

  // Conditions satisfied along x's traversal, root first.
  std::vector<PathCondition> get_path(std::span<const double> x) const {
    return path_to(leaf_of(x));
  }

  // Conditions on the path from the root to `node`, root first.
  std::vector<PathCondition> path_to(NodeIndex node) const {
    std::vector<PathCondition> path;
    NodeIndex child = node;
    NodeIndex parent = parents_.at(static_cast<std::size_t>(node));
    while (parent >= 0) {
      const Node& p = nodes_[static_cast<std::size_t>(parent)];
      path.push_back({static_cast<std::size_t>(p.feature), p.threshold,
                      p.right == child});
      child = parent;
      parent = parents_[static_cast<std::size_t>(parent)];
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  // Leaf node indices in preorder (left subtree first).
  const std::vector<NodeIndex>& leaves() const { return leaves_; }

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(NodeIndex i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  std::size_t feature_count() const { return feature_count_; }
  std::size_t class_count() const { return class_count_; }

  std::size_t depth() const {
    std::size_t d = 0;
    for (auto leaf : leaves_) d = std::max(d, path_to(leaf).size());
    return d;
  }

  // Text form:
  //   monocheck-tree 1
  //   features <n>
  //   classes <k>
  //   nodes <m>
  //   <index> split <feature> <threshold> <left> <right>
  //   <index> leaf <rank>
  std::string serialize() const {
    std::ostringstream out;
    out << "monocheck-tree 1\n"
        << "features " << feature_count_ << "\n"
        << "classes " << class_count_ << "\n"
        << "nodes " << nodes_.size() << "\n";
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      if (n.is_leaf())
        out << i << " leaf " << n.label << "\n";
      else
        out << i << " split " << n.feature << " " << format_number(n.threshold)
            << " " << n.left << " " << n.right << "\n";
    }
    return out.str();
  }

  static TreeModel parse(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    int version = 0;
    auto fail = [](const std::string& what) -> TreeModel {
      throw ConfigError("tree file: " + what);
    };
    if (!(in >> word >> version) || word != "monocheck-tree" || version != 1)
      return fail("bad header");
    std::size_t features = 0, classes = 0, count = 0;
    if (!(in >> word >> features) || word != "features") return fail("expected 'features'");
    if (!(in >> word >> classes) || word != "classes") return fail("expected 'classes'");
    if (!(in >> word >> count) || word != "nodes") return fail("expected 'nodes'");
    std::vector<Node> nodes(count);
    std::vector<bool> seen(count, false);
    for (std::size_t k = 0; k < count; ++k) {
      std::size_t idx = 0;
      if (!(in >> idx >> word) || idx >= count || seen[idx])
        return fail("bad node line " + std::to_string(k));
      seen[idx] = true;
      if (word == "leaf") {
        ClassRank r = 0;
        if (!(in >> r)) return fail("bad leaf " + std::to_string(idx));
        nodes[idx] = Node::leaf(r);
      } else if (word == "split") {
        int f = 0;
        std::string t;
        NodeIndex l = 0, r = 0;
        if (!(in >> f >> t >> l >> r)) return fail("bad split " + std::to_string(idx));
        auto v = parse_number(t);
        if (!v) return fail("bad threshold '" + t + "'");
        nodes[idx] = Node::split(f, *v, l, r);
      } else {
        return fail("unknown node kind '" + word + "'");
      }
    }
    return TreeModel(std::move(nodes), features, classes);
  }

 private:
  void validate() {
    if (nodes_.empty()) throw ConfigError("tree has no nodes");
    if (feature_count_ == 0) throw ConfigError("tree has no features");
    parents_.assign(nodes_.size(), -2);
    parents_[0] = -1;
    leaves_.clear();
    // Iterative preorder walk; each node must be entered exactly once.
    std::vector<NodeIndex> stack{0};
    std::size_t visited = 0;
    while (!stack.empty()) {
      const NodeIndex i = stack.back();
      stack.pop_back();
      ++visited;
      const Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.is_leaf()) {
        if (n.label < 0 || static_cast<std::size_t>(n.label) >= class_count_)
          throw ConfigError("leaf " + std::to_string(i) + " has class rank " +
                            std::to_string(n.label) + " out of range");
        leaves_.push_back(i);
        continue;
      }
      if (static_cast<std::size_t>(n.feature) >= feature_count_)
        throw ConfigError("node " + std::to_string(i) + " splits on feature " +
                          std::to_string(n.feature) + " out of range");
      if (!std::isfinite(n.threshold))
        throw ConfigError("node " + std::to_string(i) + " has a non-finite threshold");
      for (NodeIndex c : {n.right, n.left}) {
        if (c < 0 || static_cast<std::size_t>(c) >= nodes_.size() ||
            parents_[static_cast<std::size_t>(c)] != -2 || c == 0)
          throw ConfigError("node " + std::to_string(i) +
                            " has an invalid or shared child " + std::to_string(c));
        parents_[static_cast<std::size_t>(c)] = i;
        stack.push_back(c);
      }
    }
    if (visited != nodes_.size())
      throw ConfigError("tree has unreachable nodes");
  }

  std::vector<Node> nodes_;
  std::size_t feature_count_;
  std::size_t class_count_;
  std::vector<NodeIndex> parents_;
  std::vector<NodeIndex> leaves_;
};

struct TreeParams {
  std::size_t max_depth = 20;
  std::size_t min_samples_leaf = 1;
  // Features considered per node; 0 considers all of them. Subsampling is the
  // only use of the Rng passed to train_tree.
  std::size_t max_features = 0;
};

namespace detail {

class CartBuilder {
 public:
  CartBuilder(const std::vector<Row>& rows, std::size_t features,
              std::size_t classes, const TreeParams& params, Rng* rng)
      : rows_(rows),
        features_(features),
        classes_(classes),
        params_(params),
        rng_(rng) {}

  std::vector<Node> build() {
    std::vector<std::size_t> idx(rows_.size());
    std::iota(idx.begin(), idx.end(), 0);
    grow(idx, 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    std::size_t feature;
    double threshold;
    double score;
  };

  NodeIndex grow(const std::vector<std::size_t>& idx, std::size_t depth) {
    const NodeIndex self = static_cast<NodeIndex>(nodes_.size());
    std::vector<std::size_t> counts(classes_, 0);
    for (auto i : idx) ++counts[static_cast<std::size_t>(rows_[i].y)];
    const ClassRank majority = static_cast<ClassRank>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    nodes_.push_back(Node::leaf(majority));

    const bool pure =
        std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
    if (pure || depth >= params_.max_depth ||
        idx.size() < 2 * std::max<std::size_t>(1, params_.min_samples_leaf))
      return self;
    auto split = best_split(idx);
    if (!split) return self;

    std::vector<std::size_t> left, right;
    for (auto i : idx)
      (rows_[i].x[split->feature] < split->threshold ? left : right).push_back(i);
    const NodeIndex l = grow(left, depth + 1);
    const NodeIndex r = grow(right, depth + 1);
    nodes_[static_cast<std::size_t>(self)] =
        Node::split(static_cast<int>(split->feature), split->threshold, l, r);
    return self;
  }

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> fs(features_);
    std::iota(fs.begin(), fs.end(), 0);
    const std::size_t k = params_.max_features;
    if (k == 0 || k >= features_ || rng_ == nullptr) return fs;
    for (std::size_t i = 0; i < k; ++i)
      std::swap(fs[i], fs[i + rng_->index(features_ - i)]);
    fs.resize(k);
    std::sort(fs.begin(), fs.end());
    return fs;
  }

  // Minimizes the size-weighted Gini impurity of the children. Ties keep the
  // lowest feature index, then the lowest threshold.
  std::optional<Split> best_split(const std::vector<std::size_t>& idx) {
    const std::size_t n = idx.size();
    const std::size_t min_leaf = std::max<std::size_t>(1, params_.min_samples_leaf);
    std::vector<std::size_t> total(classes_, 0);
    for (auto i : idx) ++total[static_cast<std::size_t>(rows_[i].y)];

    std::optional<Split> best;
    std::vector<std::size_t> order(idx);
    std::vector<std::size_t> left(classes_);
    for (auto f : candidate_features()) {
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
        return rows_[a].x[f] < rows_[b].x[f];
      });
      std::fill(left.begin(), left.end(), 0);
      double left_sq = 0;
      double right_sq = 0;
      for (auto c : total) right_sq += static_cast<double>(c) * static_cast<double>(c);
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto c = static_cast<std::size_t>(rows_[order[k]].y);
        const double lc = static_cast<double>(left[c]);
        const double rc = static_cast<double>(total[c] - left[c]);
        left_sq += 2 * lc + 1;
        right_sq -= 2 * rc - 1;
        ++left[c];
        const double v = rows_[order[k]].x[f];
        const double next = rows_[order[k + 1]].x[f];
        if (!(v < next)) continue;
        const std::size_t nl = k + 1;
        const std::size_t nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double score = (static_cast<double>(nl) - left_sq / static_cast<double>(nl)) +
                             (static_cast<double>(nr) - right_sq / static_cast<double>(nr));
        if (!best || score < best->score - 1e-9) {
          double t = v + (next - v) / 2;
          if (!(t > v)) t = next;
          best = Split{f, t, score};
        }
      }
    }
    return best;
  }

  const std::vector<Row>& rows_;
  std::size_t features_;
  std::size_t classes_;
  TreeParams params_;
  Rng* rng_;
  std::vector<Node> nodes_;
};

}  // namespace detail

// Greedy CART with Gini impurity. Thresholds are midpoints between
// consecutive distinct values; growth stops at pure nodes, max_depth, or when
// no split leaves min_samples_leaf rows on both sides. Leaves predict the
// majority rank, lowest rank on ties. Deterministic unless max_features > 0.
inline TreeModel train_tree(const Dataset& data, const TreeParams& params = {},
                            Rng* rng = nullptr) {
  if (data.empty()) throw InputError("train_tree: empty dataset");
  detail::CartBuilder builder(data.rows, data.space.size(),
                              data.space.class_count(), params, rng);
  return TreeModel(builder.build(), data.space.size(), data.space.class_count());
}

}  // namespace monocheck
