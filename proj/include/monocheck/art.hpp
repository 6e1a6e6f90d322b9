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
#include <limits>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "monocheck/core.hpp"
#include "monocheck/datasets.hpp"
#include "monocheck/report.hpp"
#include "monocheck/rng.hpp"

namespace monocheck {

struct TestPair {
  Instance x;
  Instance x_prime;

  friend auto operator<=>(const TestPair&, const TestPair&) = default;
};

namespace detail {

inline double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Pair length and midpoint; the distance only depends on these.
struct PairShape {
  double length = 0;
  std::vector<double> mid;

  explicit PairShape(const TestPair& p) : length(euclid(p.x, p.x_prime)), mid(p.x.size()) {
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = (p.x[i] + p.x_prime[i]) / 2;
  }

  double distance(const PairShape& o) const {
    return std::abs(length - o.length) / 2 + euclid(mid, o.mid) / 2;
  }
};

inline void check_pair_dims(const TestPair& p, std::size_t n) {
  if (p.x.size() != n || p.x_prime.size() != n)
    throw InputError("test pair dimension mismatch");
}

}  // namespace detail

// Half the difference of the pairs' Euclidean lengths plus half the Euclidean
// distance of their midpoints. Raw feature units are used, so features on
// large scales dominate.
inline double pair_distance(const TestPair& p, const TestPair& q) {
  const std::size_t n = p.x.size();
  detail::check_pair_dims(p, n);
  detail::check_pair_dims(q, n);
  return detail::PairShape(p).distance(detail::PairShape(q));
}

inline double min_distance(const TestPair& cand, std::span<const TestPair> ts) {
  if (ts.empty()) throw InputError("min_distance: empty test set");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : ts) best = std::min(best, pair_distance(cand, p));
  return best;
}

struct ArtConfig {
  std::size_t ini_samples = 100;
  std::size_t pool_size = 50;
  std::size_t max_samples = 1000;
  bool stop_at_first = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (pool_size < 1) throw ConfigError("pool_size must be at least 1");
    if (ini_samples > max_samples)
      throw ConfigError("ini_samples must not exceed max_samples");
  }
};

inline constexpr int kArtDistinctAttempts = 1000;

// Adaptive random test generation. Starts from ini_samples distinct random
// pairs; then, until max_samples pairs exist, draws pool_size fresh distinct
// candidates and keeps the one whose minimum distance to the test set is
// largest. Ties keep the earliest candidate, and the first candidate is kept
// when every distance is 0. Pairs are returned in insertion order.
inline std::vector<TestPair> art_gen(const MonotonicityConstraint& c,
                                     const FeatureSpace& fs, const ArtConfig& cfg,
                                     Rng& rng) {
  cfg.validate();
  c.check(fs);
  std::vector<TestPair> ts;
  std::vector<detail::PairShape> shapes;
  std::set<TestPair> in_ts;
  ts.reserve(cfg.max_samples);
  shapes.reserve(cfg.max_samples);

  auto draw = [&] {
    Instance x = sample_uniform(fs, rng);
    Instance x2 = sample_successor(x, c, fs, rng);
    return TestPair{std::move(x), std::move(x2)};
  };
  auto add = [&](TestPair p) {
    shapes.emplace_back(p);
    in_ts.insert(p);
    ts.push_back(std::move(p));
  };

  while (ts.size() < cfg.ini_samples) {
    int attempt = 0;
    for (;; ++attempt) {
      if (attempt >= kArtDistinctAttempts)
        throw GenerationError("art_gen: cannot find a new distinct pair");
      TestPair p = draw();
      if (!in_ts.count(p)) {
        add(std::move(p));
        break;
      }
    }
  }

  std::vector<TestPair> pool;
  std::set<TestPair> in_pool;
  while (ts.size() < cfg.max_samples) {
    pool.clear();
    in_pool.clear();
    while (pool.size() < cfg.pool_size) {
      int attempt = 0;
      for (;; ++attempt) {
        if (attempt >= kArtDistinctAttempts)
          throw GenerationError("art_gen: cannot fill candidate pool");
        TestPair p = draw();
        if (!in_ts.count(p) && in_pool.insert(p).second) {
          pool.push_back(std::move(p));
          break;
        }
      }
    }
    std::size_t best = 0;
    double best_dist = 0;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (ts.empty()) break;
      const detail::PairShape shape(pool[k]);
      double d = std::numeric_limits<double>::infinity();
      for (const auto& s : shapes) {
        d = std::min(d, shape.distance(s));
        if (d <= best_dist) break;  // cannot beat the current best
      }
      if (d > best_dist) {
        best = k;
        best_dist = d;
      }
    }
    add(std::move(pool[best]));
  }
  return ts;
}

namespace detail {

// Checks pairs in order against M.
inline void check_pairs(const Model& m, const FeatureSpace& fs,
                        std::span<const TestPair> pairs, bool stop_at_first,
                        TestReport& report) {
  std::size_t checked = 0;
  bool found = false;
  try {
    for (const auto& p : pairs) {
      const ClassRank y = query_model(m, p.x, fs);
      const ClassRank y2 = query_model(m, p.x_prime, fs);
      if (is_violation(y, y2)) {
        if (!found) report.failed_attempts = checked;
        found = true;
        report.counterexamples.push_back({p.x, p.x_prime, y, y2, CexStatus::kValidated});
        if (stop_at_first) break;
      }
      ++checked;
    }
  } catch (const ModelError& e) {
    report.error = e.what();
  }
  if (!found) report.failed_attempts = checked;
}

}  // namespace detail

// Generates the full adaptive random test set, then checks it pair by pair.
inline TestReport art_test(const Model& m, const MonotonicityConstraint& c,
                           const FeatureSpace& fs, const ArtConfig& cfg) {
  detail::Stopwatch clock;
  TestReport report;
  report.method = Method::kArt;
  Rng rng(cfg.seed);
  const auto pairs = art_gen(c, fs, cfg, rng);
  report.tests_generated = pairs.size();
  detail::check_pairs(m, fs, pairs, cfg.stop_at_first, report);
  report.wall_time_seconds = clock.seconds();
  return report;
}

}  // namespace monocheck
