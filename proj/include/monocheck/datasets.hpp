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
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "monocheck/core.hpp"
#include "monocheck/format.hpp"
#include "monocheck/rng.hpp"

namespace monocheck {

struct Row {
  Instance x;
  ClassRank y = 0;

  friend bool operator==(const Row&, const Row&) = default;
};

struct Dataset {
  FeatureSpace space;
  std::vector<Row> rows;
  std::string class_column = "class";

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
};

// One feature declaration of a constraint-spec file. Bounds may be omitted,
// in which case they are inferred from the data at ingestion time.
struct FeatureDecl {
  std::string name;
  FeatureKind kind = FeatureKind::kReal;
  std::optional<double> lower;
  std::optional<double> upper;
  std::vector<std::string> categories;
};

// Contents of a constraint-spec file (JSON):
//
//   {
//     "features": [
//       {"name": "income",   "kind": "real",    "lower": 0, "upper": 120},
//       {"name": "children", "kind": "integer"},
//       {"name": "grade",    "kind": "categorical", "values": ["C", "B", "A"]}
//     ],
//     "class_column": "loan",
//     "class_order":  ["no", "low", "medium", "high"],
//     "monotone":     ["income"],
//     "variant":      "weak"
//   }
//
// "class_column" defaults to "class" and "variant" to "weak".
struct ConstraintSpec {
  std::vector<FeatureDecl> features;
  std::string class_column = "class";
  std::vector<std::string> class_order;
  std::vector<std::string> monotone;
  Variant variant = Variant::kWeak;

  static ConstraintSpec parse(std::string_view text) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("constraint spec is not valid JSON: ") +
                        e.what());
    }
    try {
      ConstraintSpec spec;
      for (const auto& f : j.at("features")) {
        FeatureDecl d;
        d.name = f.at("name").get<std::string>();
        const std::string kind = f.value("kind", "real");
        if (kind == "real") {
          d.kind = FeatureKind::kReal;
        } else if (kind == "integer") {
          d.kind = FeatureKind::kInteger;
        } else if (kind == "categorical") {
          d.kind = FeatureKind::kOrderedCategorical;
          d.categories = f.at("values").get<std::vector<std::string>>();
        } else {
          throw ConfigError("feature '" + d.name + "': unknown kind '" + kind +
                            "'");
        }
        if (f.contains("lower")) d.lower = f.at("lower").get<double>();
        if (f.contains("upper")) d.upper = f.at("upper").get<double>();
        spec.features.push_back(std::move(d));
      }
      spec.class_column = j.value("class_column", "class");
      spec.class_order = j.at("class_order").get<std::vector<std::string>>();
      spec.monotone = j.at("monotone").get<std::vector<std::string>>();
      const std::string variant = j.value("variant", "weak");
      if (variant == "weak") {
        spec.variant = Variant::kWeak;
      } else if (variant == "strong") {
        spec.variant = Variant::kStrong;
      } else {
        throw ConfigError("unknown variant '" + variant + "'");
      }
      return spec;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("constraint spec: ") + e.what());
    }
  }

  static ConstraintSpec load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open constraint spec '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  // Feature space from declared bounds only; every bound must be present.
  FeatureSpace feature_space() const {
    std::vector<FeatureSpec> specs;
    for (const auto& d : features) {
      FeatureSpec s{d.name, d.kind, 0, 0, d.categories};
      if (d.kind != FeatureKind::kOrderedCategorical) {
        if (!d.lower || !d.upper)
          throw ConfigError("feature '" + d.name +
                            "' has no declared bounds and no data to infer "
                            "them from");
        s.lower = *d.lower;
        s.upper = *d.upper;
      }
      specs.push_back(std::move(s));
    }
    return FeatureSpace(std::move(specs), class_order);
  }

  MonotonicityConstraint constraint(const FeatureSpace& fs) const {
    std::vector<std::size_t> idx;
    for (const auto& name : monotone) {
      auto i = fs.find_feature(name);
      if (!i) throw ConfigError("monotone feature '" + name + "' is not declared");
      idx.push_back(*i);
    }
    return MonotonicityConstraint(variant, std::move(idx));
  }
};

namespace detail {

// RFC 4180 records: quoted fields, doubled quotes, CRLF or LF line ends.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    if (!(record.size() == 1 && record[0].empty() && !field_started))
      records.push_back(std::move(record));
    record.clear();
    field_started = false;
  };
  while (i < text.size()) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      // handled by the '\n'
    } else if (ch == '\n') {
      end_record();
    } else {
      field.push_back(ch);
      field_started = true;
    }
    ++i;
  }
  if (quoted) throw IngestionError("csv: unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

// Parses CSV text against a constraint spec. Row numbers in messages are
// 1-based data rows (the header is row 0).
inline Dataset parse_csv(std::string_view text, const ConstraintSpec& spec) {
  const auto records = detail::parse_csv(text);
  if (records.empty()) throw IngestionError("csv: empty file (no header)");
  const auto& header = records.front();
  auto column_of = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw IngestionError("csv: missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> cols;
  for (const auto& d : spec.features) cols.push_back(column_of(d.name));
  const std::size_t class_col = column_of(spec.class_column);
  if (records.size() == 1) throw IngestionError("csv: empty dataset");

  const std::size_t n = spec.features.size();
  std::vector<Row> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    auto where = [&](const std::string& col) {
      return "csv row " + std::to_string(r) + ", column '" + col + "'";
    };
    auto cell = [&](std::size_t c, const std::string& col) -> const std::string& {
      if (c >= rec.size()) throw IngestionError(where(col) + ": missing cell");
      return rec[c];
    };
    Row row;
    row.x.resize(n);
    for (std::size_t f = 0; f < n; ++f) {
      const auto& d = spec.features[f];
      const std::string& text_value = cell(cols[f], d.name);
      if (d.kind == FeatureKind::kOrderedCategorical) {
        auto it = std::find(d.categories.begin(), d.categories.end(), text_value);
        if (it == d.categories.end())
          throw IngestionError(where(d.name) + ": unknown categorical value '" +
                               text_value + "'");
        row.x[f] = static_cast<double>(it - d.categories.begin());
        continue;
      }
      auto v = parse_number(text_value);
      if (!v || !std::isfinite(*v))
        throw IngestionError(where(d.name) + ": cannot parse '" + text_value +
                             "' as a number");
      if (d.kind == FeatureKind::kInteger && std::floor(*v) != *v)
        throw IngestionError(where(d.name) + ": '" + text_value +
                             "' is not an integer");
      if ((d.lower && *v < *d.lower) || (d.upper && *v > *d.upper))
        throw IngestionError(where(d.name) + ": value " + text_value +
                             " outside declared bounds");
      row.x[f] = *v;
    }
    const std::string& label = cell(class_col, spec.class_column);
    auto it = std::find(spec.class_order.begin(), spec.class_order.end(), label);
    if (it == spec.class_order.end())
      throw IngestionError(where(spec.class_column) + ": class label '" + label +
                           "' not in class_order");
    row.y = static_cast<ClassRank>(it - spec.class_order.begin());
    rows.push_back(std::move(row));
  }

  std::vector<FeatureSpec> specs;
  for (std::size_t f = 0; f < n; ++f) {
    const auto& d = spec.features[f];
    FeatureSpec s{d.name, d.kind, 0, 0, d.categories};
    if (d.kind != FeatureKind::kOrderedCategorical) {
      auto [lo, hi] = std::minmax_element(
          rows.begin(), rows.end(),
          [f](const Row& a, const Row& b) { return a.x[f] < b.x[f]; });
      s.lower = d.lower.value_or(lo->x[f]);
      s.upper = d.upper.value_or(hi->x[f]);
    }
    specs.push_back(std::move(s));
  }
  return Dataset{FeatureSpace(std::move(specs), spec.class_order),
                 std::move(rows), spec.class_column};
}

inline Dataset load_csv(const std::string& path, const ConstraintSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open csv '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), spec);
}

// Header of feature names plus the class column; categorical values and
// classes are written as labels, numbers in shortest round-trip form.
inline std::string to_csv(const Dataset& data) {
  const auto& fs = data.space;
  std::string out;
  for (std::size_t f = 0; f < fs.size(); ++f) {
    out += detail::csv_escape(fs.feature(f).name);
    out += ',';
  }
  out += detail::csv_escape(data.class_column);
  out += '\n';
  for (const auto& row : data.rows) {
    for (std::size_t f = 0; f < fs.size(); ++f) {
      const auto& spec = fs.feature(f);
      if (spec.kind == FeatureKind::kOrderedCategorical)
        out += detail::csv_escape(spec.categories.at(static_cast<std::size_t>(row.x[f])));
      else
        out += format_number(row.x[f]);
      out += ',';
    }
    out += detail::csv_escape(fs.class_label(row.y));
    out += '\n';
  }
  return out;
}

inline void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write csv '" + path + "'");
  out << to_csv(data);
}

// Spec equivalent to a feature space (bounds declared), used for round trips.
inline ConstraintSpec spec_for(const FeatureSpace& fs,
                               const MonotonicityConstraint& c,
                               std::string class_column = "class") {
  ConstraintSpec spec;
  for (const auto& f : fs.features()) {
    FeatureDecl d{f.name, f.kind, f.lower, f.upper, f.categories};
    if (f.kind == FeatureKind::kOrderedCategorical) d.lower = d.upper = std::nullopt;
    spec.features.push_back(std::move(d));
  }
  spec.class_column = std::move(class_column);
  spec.class_order = fs.class_labels();
  for (auto i : c.features()) spec.monotone.push_back(fs.feature(i).name);
  spec.variant = c.variant();
  return spec;
}

namespace detail {

inline double draw_between(const FeatureSpec& f, double lo, double hi, Rng& rng) {
  if (f.integral()) {
    return static_cast<double>(rng.uniform_int(
        static_cast<std::int64_t>(std::ceil(lo)),
        static_cast<std::int64_t>(std::floor(hi))));
  }
  return rng.uniform_real(lo, hi);
}

inline void require_bounded(const FeatureSpace& fs) {
  for (const auto& f : fs.features())
    if (!f.bounded())
      throw ConfigError("feature '" + f.name +
                        "' is unbounded; sampling needs finite bounds");
}

}  // namespace detail

// Independent uniform draw per feature: integers over the inclusive integer
// range, reals over [lower, upper) (or the single point when lower == upper).
inline Instance sample_uniform(const FeatureSpace& fs, Rng& rng) {
  detail::require_bounded(fs);
  Instance x(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto& f = fs.feature(i);
    x[i] = detail::draw_between(f, f.lower, f.upper, rng);
  }
  return x;
}

inline constexpr int kSuccessorAttempts = 1000;

// Random x' with (x, x') satisfying the precondition of c. Monotone features
// are drawn from [x_i, upper_i]; other features are copied (weak) or redrawn
// over their full range (strong, resampled until x' != x).
inline Instance sample_successor(std::span<const double> x,
                                 const MonotonicityConstraint& c,
                                 const FeatureSpace& fs, Rng& rng) {
  fs.check_dimension(x);
  c.check(fs);
  detail::require_bounded(fs);
  Instance out(x.begin(), x.end());
  auto draw_monotone = [&](std::size_t i) {
    const auto& f = fs.feature(i);
    out[i] = x[i] >= f.upper ? x[i] : detail::draw_between(f, x[i], f.upper, rng);
  };
  if (c.variant() == Variant::kWeak) {
    for (auto i : c.features()) draw_monotone(i);
    return out;
  }

  bool can_move = false;
  for (std::size_t i = 0; i < fs.size() && !can_move; ++i) {
    const auto& f = fs.feature(i);
    can_move = c.monotone(i) ? x[i] < f.upper : !f.degenerate();
  }
  if (!can_move)
    throw GenerationError(
        "strong successor: every feature is pinned, no x' != x exists");
  for (int attempt = 0; attempt < kSuccessorAttempts; ++attempt) {
    for (std::size_t i = 0; i < fs.size(); ++i) {
      if (c.monotone(i)) {
        draw_monotone(i);
      } else {
        const auto& f = fs.feature(i);
        out[i] = detail::draw_between(f, f.lower, f.upper, rng);
      }
    }
    if (!std::equal(out.begin(), out.end(), x.begin())) return out;
  }
  throw GenerationError("strong successor: no x' != x after " +
                        std::to_string(kSuccessorAttempts) + " attempts");
}

}  // namespace monocheck
