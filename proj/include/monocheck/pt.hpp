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
#include "monocheck/report.hpp"
#include "monocheck/rng.hpp"

namespace monocheck {

struct PtConfig {
  std::size_t max_samples = 1000;
  bool stop_at_first = true;
  std::uint64_t seed = 0;
};

// Property-based random testing: independent random precondition pairs from
// the same generators ART uses, no deduplication and no distance guidance.
inline TestReport pt_test(const Model& m, const MonotonicityConstraint& c,
                          const FeatureSpace& fs, const PtConfig& cfg) {
  c.check(fs);
  detail::Stopwatch clock;
  TestReport report;
  report.method = Method::kPt;
  Rng rng(cfg.seed);
  std::size_t checked = 0;
  bool found = false;
  try {
    while (checked < cfg.max_samples) {
      Instance x = sample_uniform(fs, rng);
      Instance x2 = sample_successor(x, c, fs, rng);
      ++report.tests_generated;
      const ClassRank y = detail::query_model(m, x, fs);
      const ClassRank y2 = detail::query_model(m, x2, fs);
      if (is_violation(y, y2)) {
        if (!found) report.failed_attempts = checked;
        found = true;
        report.counterexamples.push_back(
            {std::move(x), std::move(x2), y, y2, CexStatus::kValidated});
        if (cfg.stop_at_first) break;
      }
      ++checked;
    }
  } catch (const ModelError& e) {
    report.error = e.what();
  }
  if (!found) report.failed_attempts = checked;
  report.wall_time_seconds = clock.seconds();
  return report;
}

}  // namespace monocheck
