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

#include <gtest/gtest.h>

#include "monocheck/banking.hpp"
#include "monocheck/tree.hpp"
#include "random_trees.hpp"

namespace monocheck {
namespace {

using banking::kContract, banking::kIncome;

TEST(TreeModelTest, BankingPredictions) {
  const auto tree = banking::tree();
  const auto fs = banking::tree_space();
  EXPECT_EQ(fs.class_label(tree.predict(std::vector<double>{30.0, 0, 9})), "high");
  EXPECT_EQ(tree.predict(std::vector<double>{30.0, 0, 9}), 2);
  EXPECT_EQ(tree.predict(std::vector<double>{30.0, 0, 10}), 1);
  EXPECT_EQ(tree.predict(std::vector<double>{29.9, 3, 2}), 0);
  EXPECT_EQ(tree.predict(std::vector<double>{50.0, 0, 10}), 2);
  EXPECT_THROW(tree.predict(std::vector<double>{30.0, 0}), InputError);
}

TEST(TreeModelTest, SingleLeafTree) {
  const TreeModel t({Node::leaf(1)}, 2, 3);
  EXPECT_EQ(t.predict(std::vector<double>{-5, 5}), 1);
  EXPECT_TRUE(t.get_path(std::vector<double>{0, 0}).empty());
  EXPECT_EQ(t.leaves(), (std::vector<NodeIndex>{0}));
  EXPECT_EQ(t.depth(), 0u);
}

TEST(TreeModelTest, PathsOfBankingTree) {
  const auto tree = banking::tree();
  EXPECT_EQ(tree.get_path(std::vector<double>{30.0, 0, 9}),
            (std::vector<PathCondition>{{kContract, 10, false}, {kIncome, 30, true}}));
  EXPECT_EQ(tree.get_path(std::vector<double>{60.0, 0, 11}),
            (std::vector<PathCondition>{{kContract, 10, true}, {kIncome, 50, true}}));
  EXPECT_EQ(tree.leaves(), (std::vector<NodeIndex>{2, 3, 5, 6}));
  EXPECT_EQ(tree.path_to(5), tree.get_path(std::vector<double>{20.0, 0, 10}));
  EXPECT_EQ(tree.depth(), 2u);
}

TEST(TreeModelTest, PathConditionsHoldAlongTraversal) {
  Rng rng(12);
  for (int k = 0; k < 200; ++k) {
    const auto tc = testing::random_tree(rng);
    for (const auto& x : testing::all_points(tc.space)) {
      for (const auto& cond : tc.tree.get_path(x)) EXPECT_TRUE(cond.holds(x));
      EXPECT_EQ(tc.tree.path_to(tc.tree.leaf_of(x)), tc.tree.get_path(x));
    }
  }
}

TEST(TreeModelTest, RejectsMalformedNodeArrays) {
  EXPECT_THROW(TreeModel({}, 1, 2), ConfigError);
  EXPECT_THROW(TreeModel({Node::leaf(2)}, 1, 2), ConfigError);
  EXPECT_THROW(TreeModel({Node::split(0, 1, 1, 1), Node::leaf(0)}, 1, 2), ConfigError);
  EXPECT_THROW(TreeModel({Node::split(3, 1, 1, 2), Node::leaf(0), Node::leaf(1)}, 1, 2),
               ConfigError);
  EXPECT_THROW(TreeModel({Node::split(0, 1, 1, 0), Node::leaf(0)}, 1, 2), ConfigError);
  EXPECT_THROW(TreeModel({Node::leaf(0), Node::leaf(1)}, 1, 2), ConfigError);
  EXPECT_THROW(TreeModel({Node::split(0, std::nan(""), 1, 2), Node::leaf(0), Node::leaf(1)}, 1, 2),
               ConfigError);
}

TEST(TreeModelTest, SerializationRoundTrip) {
  const auto tree = banking::tree();
  const auto text = tree.serialize();
  const auto back = TreeModel::parse(text);
  EXPECT_EQ(back.serialize(), text);
  Rng rng(13);
  for (int k = 0; k < 100; ++k) {
    const auto tc = testing::random_tree(rng);
    const auto t2 = TreeModel::parse(tc.tree.serialize());
    for (const auto& x : testing::all_points(tc.space)) EXPECT_EQ(t2.predict(x), tc.tree.predict(x));
  }
  EXPECT_THROW(TreeModel::parse("garbage"), ConfigError);
  EXPECT_THROW(TreeModel::parse("monocheck-tree 1\nfeatures 1\nclasses 2\nnodes 2\n0 leaf 0\n"),
               ConfigError);
}

TEST(CartTest, FitsBankingTableExactly) {
  const Dataset d = banking::dataset();
  const TreeModel t = train_tree(d);
  for (const auto& row : d.rows) EXPECT_EQ(t.predict(row.x), row.y);
}

TEST(CartTest, SingleRowGivesLeaf) {
  Dataset d{banking::tree_space(), {{{30, 1, 5}, 2}}, "class"};
  const TreeModel t = train_tree(d);
  EXPECT_EQ(t.nodes().size(), 1u);
  EXPECT_EQ(t.predict(std::vector<double>{99, 0, 20}), 2);
}

// Best Gini split by brute force over every (feature, midpoint).
std::pair<std::size_t, double> brute_best_split(const Dataset& d) {
  double best = 1e9;
  std::pair<std::size_t, double> arg{0, 0};
  const std::size_t k = d.space.class_count();
  auto gini = [&](const std::vector<int>& c, int n) {
    double s = 1;
    for (int v : c) s -= (static_cast<double>(v) / n) * (static_cast<double>(v) / n);
    return s;
  };
  for (std::size_t f = 0; f < d.space.size(); ++f) {
    std::vector<double> vals;
    for (const auto& r : d.rows) vals.push_back(r.x[f]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      const double t = (vals[i] + vals[i + 1]) / 2;
      std::vector<int> l(k), r(k);
      int nl = 0, nr = 0;
      for (const auto& row : d.rows) {
        if (row.x[f] < t) ++l[static_cast<std::size_t>(row.y)], ++nl;
        else ++r[static_cast<std::size_t>(row.y)], ++nr;
      }
      const double score = (nl * gini(l, nl) + nr * gini(r, nr)) / static_cast<double>(d.size());
      if (score < best - 1e-9) best = score, arg = {f, t};
    }
  }
  return arg;
}

TEST(CartTest, PerfectSeparatorGivesDepthOneTree) {
  Rng rng(14);
  FeatureSpace fs({{"a", FeatureKind::kReal, 0, 10, {}}, {"b", FeatureKind::kReal, 0, 10, {}},
                   {"c", FeatureKind::kReal, 0, 10, {}}},
                  {"n", "y"});
  for (int k = 0; k < 20; ++k) {
    Dataset d{fs, {}, "class"};
    const std::size_t sep = rng.index(3);
    for (int r = 0; r < 40; ++r) {
      Instance x{rng.uniform_real(0, 10), rng.uniform_real(0, 10), rng.uniform_real(0, 10)};
      d.rows.push_back({x, x[sep] >= 5 ? 1 : 0});
    }
    const TreeModel t = train_tree(d);
    ASSERT_EQ(t.depth(), 1u);
    const auto [f, thr] = brute_best_split(d);
    EXPECT_EQ(static_cast<std::size_t>(t.node(0).feature), f);
    EXPECT_DOUBLE_EQ(t.node(0).threshold, thr);
    for (const auto& row : d.rows) EXPECT_EQ(t.predict(row.x), row.y);
  }
}

TEST(CartTest, RootSplitMatchesBruteForce) {
  Rng rng(15);
  const auto fs = testing::grid_space({6, 6, 6}, 3);
  for (int k = 0; k < 30; ++k) {
    Dataset d{fs, {}, "class"};
    for (int r = 0; r < 30; ++r)
      d.rows.push_back({sample_uniform(fs, rng), static_cast<ClassRank>(rng.index(3))});
    const TreeModel t = train_tree(d);
    if (t.nodes().size() == 1) continue;
    const auto [f, thr] = brute_best_split(d);
    EXPECT_EQ(static_cast<std::size_t>(t.node(0).feature), f);
    EXPECT_DOUBLE_EQ(t.node(0).threshold, thr);
  }
}

TEST(CartTest, RespectsDepthAndLeafSize) {
  Rng rng(16);
  const auto fs = testing::grid_space({8, 8}, 2);
  Dataset d{fs, {}, "class"};
  for (int r = 0; r < 200; ++r)
    d.rows.push_back({sample_uniform(fs, rng), static_cast<ClassRank>(rng.index(2))});
  TreeParams p;
  p.max_depth = 3;
  EXPECT_LE(train_tree(d, p).depth(), 3u);
  p.max_depth = 20;
  p.min_samples_leaf = 10;
  const TreeModel t = train_tree(d, p);
  for (NodeIndex leaf : t.leaves()) {
    int n = 0;
    for (const auto& row : d.rows) n += t.leaf_of(row.x) == leaf;
    EXPECT_GE(n, 10);
  }
}

TEST(CartTest, DeterministicWithFeatureSubsets) {
  Rng data_rng(17);
  const auto fs = testing::grid_space({8, 8, 8, 8}, 3);
  Dataset d{fs, {}, "class"};
  for (int r = 0; r < 300; ++r)
    d.rows.push_back({sample_uniform(fs, data_rng), static_cast<ClassRank>(data_rng.index(3))});
  TreeParams p;
  p.max_features = 2;
  Rng a(5), b(5);
  EXPECT_EQ(train_tree(d, p, &a).serialize(), train_tree(d, p, &b).serialize());
}

TEST(CartTest, EmptyDatasetRejected) {
  Dataset d{banking::tree_space(), {}, "class"};
  EXPECT_THROW(train_tree(d), InputError);
}

}  // namespace
}  // namespace monocheck
