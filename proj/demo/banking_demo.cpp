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

// Walks through the loan example: the tree fits all five applications, yet
// a longer contract can lower the offered loan.

#include <cstdio>
#include <string>

#include "monocheck/monocheck.hpp"

using namespace monocheck;

namespace {

std::string show(const FeatureSpace& fs, const Instance& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ", ";
    s += fs.feature(i).name + "=" + format_number(x[i]);
  }
  return s + ")";
}

void print_report(const FeatureSpace& fs, const TestReport& r) {
  std::printf("%-4s %-13s tests=%-5zu failed_attempts=%zu\n", to_string(r.method),
              to_string(r.verdict()), r.tests_generated, r.failed_attempts);
  if (r.non_monotone()) {
    const auto& c = r.counterexamples.front();
    std::printf("     %s -> %s\n     %s -> %s\n", show(fs, c.x).c_str(),
                fs.class_labels()[c.y].c_str(), show(fs, c.x_prime).c_str(),
                fs.class_labels()[c.y_prime].c_str());
  }
}

}  // namespace

int main() {
  const Dataset data = banking::dataset();
  const TreeModel tree = banking::tree();
  const FeatureSpace fs = banking::tree_space();
  const auto c = banking::weak_contract();

  std::printf("training rows: %zu\n", data.size());

  if (const auto w = find_counterexample(tree, c, fs)) {
    std::printf("verifier: %s -> %s but %s -> %s\n\n", show(fs, w->x).c_str(),
                fs.class_labels()[w->class1].c_str(), show(fs, w->x_prime).c_str(),
                fs.class_labels()[w->class2].c_str());
  }

  VbtConfig vc;
  vc.seed = 7;
  print_report(fs, veri_test(tree, c, fs, vc));
  ArtConfig ac;
  ac.seed = 7;
  print_report(fs, art_test(tree, c, fs, ac));
  PtConfig pc;
  pc.seed = 7;
  print_report(fs, pt_test(tree, c, fs, pc));
  return 0;
}
