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

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "monocheck/core.hpp"

namespace monocheck {

enum class Method { kVbt, kArt, kPt };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::kVbt: return "vbt";
    case Method::kArt: return "art";
    case Method::kPt: return "pt";
  }
  return "?";
}

inline std::optional<Method> parse_method(const std::string& s) {
  if (s == "vbt") return Method::kVbt;
  if (s == "art") return Method::kArt;
  if (s == "pt") return Method::kPt;
  return std::nullopt;
}

enum class Verdict { kNonMonotone, kNoCexFound };

inline const char* to_string(Verdict v) {
  return v == Verdict::kNonMonotone ? "non_monotone" : "no_cex_found";
}

// Outcome of one monotonicity test run, shared by all three methods.
struct TestReport {
  Method method = Method::kVbt;
  // Validated counterexamples, in detection order.
  std::vector<CounterExample> counterexamples;
  std::size_t tests_generated = 0;
  // Test pairs checked before the first validated counterexample; equals
  // the number of checked pairs when none was found.
  std::size_t failed_attempts = 0;
  std::size_t retrainings = 0;
  std::size_t oracle_size = 0;
  double wall_time_seconds = 0;
  // Set when the model under test failed mid-run.
  std::optional<std::string> error;

  Verdict verdict() const {
    return counterexamples.empty() ? Verdict::kNoCexFound : Verdict::kNonMonotone;
  }
  bool non_monotone() const { return !counterexamples.empty(); }

  // Validated counterexamples per generated test pair.
  double detection_rate() const {
    return tests_generated == 0
               ? 0.0
               : static_cast<double>(counterexamples.size()) /
                     static_cast<double>(tests_generated);
  }
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Prediction with a range check; any failure surfaces as ModelError.
inline ClassRank query_model(const Model& m, std::span<const double> x,
                             const FeatureSpace& fs) {
  ClassRank r;
  try {
    r = m.predict(x);
  } catch (const ModelError&) {
    throw;
  } catch (const std::exception& e) {
    throw ModelError(std::string("model prediction failed: ") + e.what());
  }
  if (!fs.valid_rank(r))
    throw ModelError("model returned class rank " + std::to_string(r) +
                     " outside [0, " + std::to_string(fs.class_count() - 1) + "]");
  return r;
}

}  // namespace detail

}  // namespace monocheck
