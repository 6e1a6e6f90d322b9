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
#include "monocheck/models.hpp"
#include "suite.hpp"

namespace monocheck {
namespace {

TEST(KnnTest, OneNeighbourReproducesTrainingLabels) {
  const Dataset d = banking::dataset();
  Rng rng(0);
  Hyperparams hp;
  hp.k = 1;
  const auto knn = train_builtin(ModelKind::kKnn, d, hp, rng);
  EXPECT_EQ(knn.kind(), ModelKind::kKnn);
  for (const auto& row : d.rows) EXPECT_EQ(knn.predict(row.x), row.y);
}

TEST(KnnTest, VoteTiesGoToLowestRank) {
  const auto fs = testing::real_space(1, 10, 3);
  const Knn knn(2, {{{1}, 2}, {{3}, 1}, {{9}, 0}}, 3);
  EXPECT_EQ(knn.predict(std::vector<double>{2}), 1);
  // Distance ties prefer the lower row index.
  const Knn one(1, {{{1}, 2}, {{3}, 1}}, 3);
  EXPECT_EQ(one.predict(std::vector<double>{2}), 2);
}

TEST(KnnTest, InvalidK) {
  EXPECT_THROW(Knn(0, {{{1}, 0}}, 2), ConfigError);
  EXPECT_THROW(Knn(2, {{{1}, 0}}, 2), ConfigError);
}

TEST(TreeLearnerTest, FitsBankingTable) {
  const Dataset d = banking::dataset();
  Rng rng(0);
  const auto tree = train_builtin(ModelKind::kTree, d, Hyperparams{}, rng);
  for (const auto& row : d.rows) EXPECT_EQ(tree.predict(row.x), row.y);
}

TEST(ForestTest, SingleTreeWithoutSubsamplingMatchesTree) {
  const auto data = testing::synthesize(testing::linear_noisy(), 200, 3);
  Hyperparams hp;
  hp.trees = 1;
  hp.bootstrap = false;
  hp.forest_features = data.space.size();
  Rng rng(4);
  const auto forest = train_builtin(ModelKind::kForest, data, hp, rng);
  const TreeModel tree = train_tree(data);
  Rng probe(5);
  for (int k = 0; k < 100; ++k) {
    const auto x = sample_uniform(data.space, probe);
    EXPECT_EQ(forest.predict(x), tree.predict(x));
  }
}

TEST(ForestTest, MajorityVoteWithLowestRankTieBreak) {
  const RandomForest f({TreeModel({Node::leaf(2)}, 1, 3), TreeModel({Node::leaf(1)}, 1, 3)}, 3);
  EXPECT_EQ(f.predict(std::vector<double>{0}), 1);
  const RandomForest g({TreeModel({Node::leaf(2)}, 1, 3), TreeModel({Node::leaf(0)}, 1, 3),
                        TreeModel({Node::leaf(2)}, 1, 3)},
                       3);
  EXPECT_EQ(g.predict(std::vector<double>{0}), 2);
  EXPECT_THROW(RandomForest({}, 2), ConfigError);
}

TEST(ForestTest, DeterministicUnderSeed) {
  const auto data = testing::synthesize(testing::dip(), 200, 2);
  Rng a(9), b(9);
  const auto f1 = train_builtin(ModelKind::kForest, data, Hyperparams{}, a);
  const auto f2 = train_builtin(ModelKind::kForest, data, Hyperparams{}, b);
  Rng probe(1);
  for (int k = 0; k < 200; ++k) {
    const auto x = sample_uniform(data.space, probe);
    EXPECT_EQ(f1.predict(x), f2.predict(x));
  }
}

TEST(LogisticTest, LearnsSeparableLinearBoundary) {
  const auto fs = testing::real_space(2, 10, 2);
  Dataset d{fs, {}, "class"};
  Rng rng(6);
  for (int r = 0; r < 300; ++r) {
    const auto x = sample_uniform(fs, rng);
    d.rows.push_back({x, x[0] + x[1] > 10 ? 1 : 0});
  }
  Hyperparams hp;
  hp.iterations = 2000;
  const auto m = train_builtin(ModelKind::kLogistic, d, hp, rng);
  int correct = 0;
  for (const auto& row : d.rows) correct += m.predict(row.x) == row.y;
  EXPECT_GE(correct, 285);
}

TEST(LogisticTest, UnseenClassNeverPredicted) {
  const auto fs = testing::real_space(1, 10, 3);
  Dataset d{fs, {{{1}, 0}, {{2}, 0}, {{8}, 2}, {{9}, 2}}, "class"};
  Rng rng(0);
  const auto m = train_builtin(ModelKind::kLogistic, d, Hyperparams{}, rng);
  for (double v = 0; v <= 10; v += 0.25) EXPECT_NE(m.predict(std::vector<double>{v}), 1);
  EXPECT_EQ(m.predict(std::vector<double>{0}), 0);
  EXPECT_EQ(m.predict(std::vector<double>{10}), 2);
}

TEST(BuiltinTest, EmptyDataRejected) {
  Dataset d{testing::real_space(1, 1, 2), {}, "class"};
  Rng rng(0);
  EXPECT_THROW(train_builtin(ModelKind::kTree, d, Hyperparams{}, rng), InputError);
  EXPECT_STREQ(to_string(ModelKind::kLogistic), "logreg");
}

TEST(SuiteTest, EveryModelHasAKnownViolation) {
  const auto suite = testing::build_suite();
  ASSERT_GE(suite.size(), 12u);
  for (const auto& m : suite) {
    const auto& [x, x2] = m.known_violation;
    EXPECT_TRUE(precondition_holds(x, x2, m.constraint, m.data->space)) << m.name;
    EXPECT_TRUE(is_violation(m.model->predict(x), m.model->predict(x2))) << m.name;
  }
}

}  // namespace
}  // namespace monocheck
