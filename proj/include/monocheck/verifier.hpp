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
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "monocheck/core.hpp"
#include "monocheck/format.hpp"
#include "monocheck/tree.hpp"

// Exact counterexample search on decision trees.
//
// The non-monotonicity query for a tree is a disjunction, over ordered leaf
// pairs (L1, L2) with rank(L1) > rank(L2), of a conjunction of per-feature
// atoms: x lies in L1's box, x' lies in L2's box, and each feature is linked
// by x_i <= x'_i (monotone feature), x_j = x'_j (other feature, weak variant)
// or nothing (other feature, strong variant). Each conjunct is decided per
// feature, so the whole query is decided exactly by scanning leaf pairs.

namespace monocheck {

// Interval with optionally open ends and a finite set of excluded points.
struct Interval {
  double lo = 0;
  double hi = 0;
  bool lo_closed = true;
  bool hi_closed = true;
  std::vector<double> excluded;

  static Interval closed(double lo, double hi) { return Interval{lo, hi, true, true, {}}; }

  static Interval domain(const FeatureSpec& f) { return closed(f.lower, f.upper); }

  bool is_excluded(double v) const {
    return std::find(excluded.begin(), excluded.end(), v) != excluded.end();
  }

  bool contains(double v, bool integral) const {
    if (integral && std::floor(v) != v) return false;
    if (v < lo || (v == lo && !lo_closed)) return false;
    if (v > hi || (v == hi && !hi_closed)) return false;
    return !is_excluded(v);
  }

  // Keeps values >= v (closed) or > v (open).
  void restrict_below(double v, bool closed_at_v) {
    if (v > lo) {
      lo = v;
      lo_closed = closed_at_v;
    } else if (v == lo) {
      lo_closed = lo_closed && closed_at_v;
    }
  }

  // Keeps values <= v (closed) or < v (open).
  void restrict_above(double v, bool closed_at_v) {
    if (v < hi) {
      hi = v;
      hi_closed = closed_at_v;
    } else if (v == hi) {
      hi_closed = hi_closed && closed_at_v;
    }
  }

  void intersect(const Interval& other) {
    restrict_below(other.lo, other.lo_closed);
    restrict_above(other.hi, other.hi_closed);
    excluded.insert(excluded.end(), other.excluded.begin(), other.excluded.end());
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

namespace detail {

// Rewrites an interval so that every closed end is an attainable value: for
// integral domains both ends become the extreme surviving integers; for real
// domains an excluded closed end becomes open.
inline Interval normalize(Interval v, bool integral) {
  if (integral) {
    double lo = v.lo_closed ? std::ceil(v.lo) : std::floor(v.lo) + 1;
    double hi = v.hi_closed ? std::floor(v.hi) : std::ceil(v.hi) - 1;
    while (lo <= hi && v.is_excluded(lo)) lo += 1;
    while (lo <= hi && v.is_excluded(hi)) hi -= 1;
    v.lo = lo;
    v.hi = hi;
    v.lo_closed = v.hi_closed = true;
    return v;
  }
  if (v.lo_closed && v.is_excluded(v.lo)) v.lo_closed = false;
  if (v.hi_closed && v.is_excluded(v.hi)) v.hi_closed = false;
  return v;
}

// Least and greatest representable, non-excluded values of a normalized
// interval. Reals are finite doubles, so an open interval between adjacent
// doubles holds nothing.
inline double lowest_value(const Interval& v) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double x = v.lo_closed ? v.lo : std::nextafter(v.lo, inf);
  while (x <= v.hi && v.is_excluded(x)) x = std::nextafter(x, inf);
  return x;
}

inline double highest_value(const Interval& v) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double x = v.hi_closed ? v.hi : std::nextafter(v.hi, -inf);
  while (x >= v.lo && v.is_excluded(x)) x = std::nextafter(x, -inf);
  return x;
}

// Emptiness of a normalized interval.
inline bool normalized_empty(const Interval& v) {
  if (v.lo > v.hi) return true;
  return lowest_value(v) > highest_value(v);
}

// Offset used to step inside an open real end.
inline double open_offset(const Interval& v) {
  return std::min(0.5, (v.hi - v.lo) / 2);
}

// Real value near an open end, stepping inward and halving the step until
// the value is not excluded. Falls back to the extreme representable value.
inline double step_inside(const Interval& v, bool from_low) {
  double delta = open_offset(v);
  for (int k = 0; k < 1100; ++k) {
    const double c = from_low ? v.lo + delta : v.hi - delta;
    if (c > v.lo && c < v.hi && !v.is_excluded(c)) return c;
    delta /= 2;
  }
  return from_low ? lowest_value(v) : highest_value(v);
}

}  // namespace detail

inline bool is_empty(const Interval& v, bool integral) {
  return detail::normalized_empty(detail::normalize(v, integral));
}

// Least attainable value; an open real end is entered by
// min(0.5, width / 2), an open integer end by 1.
inline std::optional<double> min_attainable(const Interval& v, bool integral) {
  const Interval n = detail::normalize(v, integral);
  if (detail::normalized_empty(n)) return std::nullopt;
  if (integral || n.lo_closed) return n.lo;
  return detail::step_inside(n, true);
}

inline std::optional<double> max_attainable(const Interval& v, bool integral) {
  const Interval n = detail::normalize(v, integral);
  if (detail::normalized_empty(n)) return std::nullopt;
  if (integral || n.hi_closed) return n.hi;
  return detail::step_inside(n, false);
}

enum class Link {
  kLessEqual,  // x_i <= x'_i
  kEqual,      // x_i == x'_i
  kFree,       // unconstrained
};

// Per-feature link implied by a constraint.
inline std::vector<Link> links_for(const MonotonicityConstraint& c,
                                   const FeatureSpace& fs) {
  std::vector<Link> links(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i)
    links[i] = c.monotone(i) ? Link::kLessEqual
               : c.variant() == Variant::kWeak ? Link::kEqual
                                               : Link::kFree;
  return links;
}

using Box = std::vector<Interval>;

struct BoxPair {
  Box first;   // constraints on x
  Box second;  // constraints on x'
  std::vector<Link> links;
  ClassRank class1 = 0;
  ClassRank class2 = 0;
};

struct Witness {
  Instance x;
  Instance x_prime;
  ClassRank class1 = 0;
  ClassRank class2 = 0;

  friend bool operator==(const Witness&, const Witness&) = default;
};

// Box of all points reaching `leaf`: its path conditions intersected with the
// (closed) feature bounds.
inline Box leaf_box(const TreeModel& tree, NodeIndex leaf, const FeatureSpace& fs) {
  Box box;
  box.reserve(fs.size());
  for (const auto& f : fs.features()) box.push_back(Interval::domain(f));
  for (const auto& cond : tree.path_to(leaf)) {
    auto& iv = box.at(cond.feature);
    if (cond.at_least)
      iv.restrict_below(cond.threshold, true);
    else
      iv.restrict_above(cond.threshold, false);
  }
  return box;
}

namespace detail {

// Feasibility of one linked feature over two normalized, non-empty intervals.
inline bool link_feasible(const Interval& a, const Interval& b, Link link,
                          bool integral) {
  switch (link) {
    case Link::kFree:
      return true;
    case Link::kLessEqual: {
      // Some u in a lies at or below some v in b.
      return lowest_value(a) <= highest_value(b);
    }
    case Link::kEqual: {
      Interval both = a;
      both.intersect(b);
      return !is_empty(both, integral);
    }
  }
  return false;
}

// Witness values for one linked feature; intervals normalized and feasible.
inline std::pair<double, double> link_values(const Interval& a, const Interval& b,
                                             Link link, bool integral) {
  switch (link) {
    case Link::kFree:
      return {*min_attainable(a, integral), *min_attainable(b, integral)};
    case Link::kEqual: {
      Interval both = a;
      both.intersect(b);
      const double v = *min_attainable(both, integral);
      return {v, v};
    }
    case Link::kLessEqual: {
      // x at the largest attainable value of a not above b's supremum, x' at
      // the least attainable value of b not below x.
      Interval capped = a;
      capped.restrict_above(b.hi, b.hi_closed);
      double u = *max_attainable(capped, integral);
      Interval above = b;
      above.restrict_below(u, true);
      if (is_empty(above, integral)) {
        // Exclusions crowd b's top end; cap at b's greatest value instead.
        capped = a;
        capped.restrict_above(highest_value(b), true);
        u = *max_attainable(capped, integral);
        above = b;
        above.restrict_below(u, true);
      }
      return {u, *min_attainable(above, integral)};
    }
  }
  throw std::logic_error("unknown link");
}

}  // namespace detail

// Decides whether some (x, x') inside the pair's boxes satisfies all links.
// Witness values follow a fixed rule: less-equal features put x at the top of
// its feasible range and x' at the least value not below it; equal features
// take the least common value; free features take each box's least value.
inline std::optional<Witness> solve_pair(const BoxPair& b, const FeatureSpace& fs) {
  const std::size_t n = fs.size();
  if (b.first.size() != n || b.second.size() != n || b.links.size() != n)
    throw InputError("solve_pair: box dimension mismatch");
  std::vector<Interval> first(n), second(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool integral = fs.feature(i).integral();
    first[i] = detail::normalize(b.first[i], integral);
    second[i] = detail::normalize(b.second[i], integral);
    if (detail::normalized_empty(first[i]) || detail::normalized_empty(second[i]))
      return std::nullopt;
    if (!detail::link_feasible(first[i], second[i], b.links[i], integral))
      return std::nullopt;
  }
  Witness w{Instance(n), Instance(n), b.class1, b.class2};
  for (std::size_t i = 0; i < n; ++i) {
    std::tie(w.x[i], w.x_prime[i]) = detail::link_values(
        first[i], second[i], b.links[i], fs.feature(i).integral());
  }
  return w;
}

enum class Side { kFirst, kSecond };

// Additional atom conjoined to the query: either "feature != value" or a path
// condition, on the x (first) or x' (second) variables.
struct ExtraConstraint {
  Side side = Side::kFirst;
  std::size_t feature = 0;
  std::optional<double> excluded_value;
  std::optional<PathCondition> condition;

  static ExtraConstraint exclude(Side side, std::size_t feature, double value) {
    return {side, feature, value, std::nullopt};
  }
  static ExtraConstraint require(Side side, PathCondition cond) {
    return {side, cond.feature, std::nullopt, cond};
  }

  void apply(Interval& iv) const {
    if (excluded_value) iv.excluded.push_back(*excluded_value);
    if (condition) {
      if (condition->at_least)
        iv.restrict_below(condition->threshold, true);
      else
        iv.restrict_above(condition->threshold, false);
    }
  }
};

// Leaf boxes of a tree under a constraint, precomputed once and shared by all
// queries against the same (tree, constraint, feature space).
class TreeQuery {
 public:
  TreeQuery(const TreeModel& tree, const MonotonicityConstraint& c,
            const FeatureSpace& fs)
      : tree_(&tree), fs_(&fs), links_(links_for(c, fs)) {
    c.check(fs);
    if (tree.feature_count() != fs.size())
      throw InputError("tree and feature space disagree on feature count");
    for (const auto& f : fs.features())
      if (!f.bounded())
        throw ConfigError("feature '" + f.name + "' is unbounded");
    for (NodeIndex leaf : tree.leaves()) {
      boxes_.push_back(leaf_box(tree, leaf, fs));
      ranks_.push_back(tree.node(leaf).label);
    }
  }

  const TreeModel& tree() const { return *tree_; }
  const FeatureSpace& space() const { return *fs_; }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<Box>& boxes() const { return boxes_; }

  // First witness over ordered leaf pairs (L1, L2) with rank(L1) > rank(L2),
  // L1 in preorder, then L2 in preorder.
  std::optional<Witness> find(std::span<const ExtraConstraint> extra = {}) const {
    const std::size_t n = fs_->size();
    const std::size_t leaves = boxes_.size();
    std::vector<Box> first(leaves), second(leaves);
    std::vector<bool> first_ok(leaves), second_ok(leaves);
    for (std::size_t l = 0; l < leaves; ++l) {
      first[l] = constrained(l, Side::kFirst, extra);
      second[l] = constrained(l, Side::kSecond, extra);
      first_ok[l] = second_ok[l] = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (detail::normalized_empty(first[l][i])) first_ok[l] = false;
        if (detail::normalized_empty(second[l][i])) second_ok[l] = false;
      }
    }
    for (std::size_t a = 0; a < leaves; ++a) {
      if (!first_ok[a]) continue;
      for (std::size_t b = 0; b < leaves; ++b) {
        if (!second_ok[b] || !(ranks_[a] > ranks_[b])) continue;
        bool feasible = true;
        for (std::size_t i = 0; i < n && feasible; ++i)
          feasible = detail::link_feasible(first[a][i], second[b][i], links_[i],
                                           fs_->feature(i).integral());
        if (!feasible) continue;
        auto w = solve_pair(BoxPair{first[a], second[b], links_, ranks_[a], ranks_[b]},
                            *fs_);
        if (!w) throw std::logic_error("feasible leaf pair produced no witness");
        return w;
      }
    }
    return std::nullopt;
  }

 private:
  Box constrained(std::size_t leaf, Side side,
                  std::span<const ExtraConstraint> extra) const {
    Box box = boxes_[leaf];
    for (const auto& e : extra)
      if (e.side == side) e.apply(box.at(e.feature));
    for (std::size_t i = 0; i < box.size(); ++i)
      box[i] = detail::normalize(box[i], fs_->feature(i).integral());
    return box;
  }

  const TreeModel* tree_;
  const FeatureSpace* fs_;
  std::vector<Link> links_;
  std::vector<Box> boxes_;
  std::vector<ClassRank> ranks_;
};

// A witness pair the tree itself classifies non-monotonically, or nullopt
// when the tree is monotone with respect to c (under `extra`).
inline std::optional<Witness> find_counterexample(
    const TreeModel& tree, const MonotonicityConstraint& c, const FeatureSpace& fs,
    std::span<const ExtraConstraint> extra = {}) {
  return TreeQuery(tree, c, fs).find(extra);
}

// Re-solves with each single witness value excluded, x's features first,
// then x''s.
inline std::vector<Witness> prune_instances(const Witness& w, const TreeQuery& query) {
  std::vector<Witness> out;
  for (Side side : {Side::kFirst, Side::kSecond}) {
    const Instance& v = side == Side::kFirst ? w.x : w.x_prime;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const ExtraConstraint extra[] = {ExtraConstraint::exclude(side, i, v[i])};
      if (auto found = query.find(extra)) out.push_back(std::move(*found));
    }
  }
  return out;
}

inline std::vector<Witness> prune_instances(const Witness& w, const TreeModel& tree,
                                            const MonotonicityConstraint& c,
                                            const FeatureSpace& fs) {
  return prune_instances(w, TreeQuery(tree, c, fs));
}

// Re-solves with each condition on x's tree path negated in turn, then each
// condition on x''s path.
inline std::vector<Witness> prune_branches(const Witness& w, const TreeQuery& query) {
  std::vector<Witness> out;
  for (Side side : {Side::kFirst, Side::kSecond}) {
    const Instance& v = side == Side::kFirst ? w.x : w.x_prime;
    for (const auto& cond : query.tree().get_path(v)) {
      const ExtraConstraint extra[] = {ExtraConstraint::require(side, cond.negated())};
      if (auto found = query.find(extra)) out.push_back(std::move(*found));
    }
  }
  return out;
}

inline std::vector<Witness> prune_branches(const Witness& w, const TreeModel& tree,
                                           const MonotonicityConstraint& c,
                                           const FeatureSpace& fs) {
  return prune_branches(w, TreeQuery(tree, c, fs));
}

namespace detail {

inline std::string smt_name(const std::string& name, int copy) {
  std::string out;
  for (char ch : name)
    out.push_back(std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_');
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0]))) out = "f_" + out;
  return out + std::to_string(copy);
}

inline std::string smt_number(double v, bool integral) {
  std::string s;
  if (integral) {
    s = format_number(std::abs(v));
  } else {
    s = format_number(std::abs(v));
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    if (s.find('e') != std::string::npos) {
      std::ostringstream o;
      o.precision(17);
      o << std::fixed << std::abs(v);
      s = o.str();
    }
  }
  return v < 0 ? "(- " + s + ")" : s;
}

inline std::string smt_conj(const std::vector<std::string>& atoms) {
  if (atoms.empty()) return "true";
  if (atoms.size() == 1) return atoms[0];
  std::string out = "(and";
  for (const auto& a : atoms) out += " " + a;
  return out + ")";
}

}  // namespace detail

// SMT-LIB2 rendering of the non-monotonicity query, for inspection only.
// Integer thresholds are rounded up so every atom is well-sorted.
inline std::string to_smtlib(const TreeModel& tree, const MonotonicityConstraint& c,
                             const FeatureSpace& fs) {
  std::ostringstream out;
  const auto links = links_for(c, fs);
  out << "; Declaring components of x and x' and their classes\n";
  for (int copy = 1; copy <= 2; ++copy)
    for (const auto& f : fs.features())
      out << "(declare-fun " << detail::smt_name(f.name, copy) << " () "
          << (f.integral() ? "Int" : "Real") << ")\n";
  out << "(declare-fun class1 () Int) (declare-fun class2 () Int)\n";
  out << "; Feature bounds\n";
  for (int copy = 1; copy <= 2; ++copy)
    for (const auto& f : fs.features()) {
      const auto v = detail::smt_name(f.name, copy);
      out << "(assert (and (<= " << detail::smt_number(f.lower, f.integral()) << " "
          << v << ") (<= " << v << " " << detail::smt_number(f.upper, f.integral())
          << ")))\n";
    }
  out << "; Specifying prediction of decision tree (";
  for (std::size_t r = 0; r < fs.class_count(); ++r)
    out << (r ? ", " : "") << fs.class_label(static_cast<ClassRank>(r)) << "=" << r;
  out << ")\n";
  for (int copy = 1; copy <= 2; ++copy) {
    for (NodeIndex leaf : tree.leaves()) {
      std::vector<std::string> atoms;
      for (const auto& cond : tree.path_to(leaf)) {
        const auto& f = fs.feature(cond.feature);
        const double t = f.integral() ? std::ceil(cond.threshold) : cond.threshold;
        atoms.push_back(std::string("(") + (cond.at_least ? ">=" : "<") + " " +
                        detail::smt_name(f.name, copy) + " " +
                        detail::smt_number(t, f.integral()) + ")");
      }
      out << "(assert (=> " << detail::smt_conj(atoms) << " (= class" << copy << " "
          << tree.node(leaf).label << ")))\n";
    }
  }
  out << "; Non-monotonicity constraint\n";
  std::vector<std::string> pre;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto a = detail::smt_name(fs.feature(i).name, 1);
    const auto b = detail::smt_name(fs.feature(i).name, 2);
    if (links[i] == Link::kLessEqual) pre.push_back("(<= " + a + " " + b + ")");
    if (links[i] == Link::kEqual) pre.push_back("(= " + a + " " + b + ")");
  }
  out << "(assert " << detail::smt_conj(pre) << ")\n";
  out << "(assert (not (<= class1 class2)))\n";
  out << "(check-sat)\n(get-model)\n";
  return out.str();
}

}  // namespace monocheck
