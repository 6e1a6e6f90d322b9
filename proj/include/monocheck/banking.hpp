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

#include "monocheck/core.hpp"
#include "monocheck/datasets.hpp"
#include "monocheck/tree.hpp"

// The running banking example: five loan applications and a decision tree
// that fits them exactly yet is not weakly monotone in "contract".

namespace monocheck::banking {

inline constexpr const char* kCsv =
    "income,children,contract,loan\n"
    "100.0,1,20,high\n"
    "25.0,0,2,no\n"
    "17.8,3,5,no\n"
    "25.5,2,15,medium\n"
    "39.0,0,11,medium\n";

// Bounds are inferred from the data.
inline constexpr const char* kSpecJson = R"({
  "features": [
    {"name": "income", "kind": "real"},
    {"name": "children", "kind": "integer"},
    {"name": "contract", "kind": "integer"}
  ],
  "class_column": "loan",
  "class_order": ["no", "low", "medium", "high"],
  "monotone": ["contract"],
  "variant": "weak"
})";

inline ConstraintSpec spec() { return ConstraintSpec::parse(kSpecJson); }

inline Dataset dataset() { return parse_csv(kCsv, spec()); }

// Space of the example tree: the data's bounds and the three classes the
// tree predicts, ranked no < medium < high.
inline FeatureSpace tree_space() {
  return FeatureSpace({{"income", FeatureKind::kReal, 17.8, 100.0, {}},
                       {"children", FeatureKind::kInteger, 0, 3, {}},
                       {"contract", FeatureKind::kInteger, 2, 20, {}}},
                      {"no", "medium", "high"});
}

inline constexpr std::size_t kIncome = 0;
inline constexpr std::size_t kChildren = 1;
inline constexpr std::size_t kContract = 2;

// contract < 10:  income < 30 -> no,     income >= 30 -> high
// contract >= 10: income < 50 -> medium, income >= 50 -> high
inline TreeModel tree() {
  return TreeModel({Node::split(kContract, 10, 1, 4), Node::split(kIncome, 30, 2, 3),
                    Node::leaf(0), Node::leaf(2), Node::split(kIncome, 50, 5, 6),
                    Node::leaf(1), Node::leaf(2)},
                   3, 3);
}

inline MonotonicityConstraint weak_contract() {
  return MonotonicityConstraint(Variant::kWeak, {kContract});
}

}  // namespace monocheck::banking
