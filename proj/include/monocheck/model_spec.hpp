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

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "monocheck/banking.hpp"
#include "monocheck/core.hpp"
#include "monocheck/datasets.hpp"
#include "monocheck/external_model.hpp"
#include "monocheck/format.hpp"
#include "monocheck/models.hpp"
#include "monocheck/tree.hpp"

// Model sources named on the command line and in plan files:
//
//   loan                      the banking example tree
//   constant:<rank>              constant classifier
//   tree:<file>                  serialized TreeModel
//   cart|forest|knn|logreg[:key=value,...]
//                                built-in model trained on the given data;
//                                keys: depth, leaf, trees, features,
//                                bootstrap, k, iters, step, seed
//   exec:<command line>          external model over the stdio protocol

namespace monocheck {

using ModelFactory = std::function<std::shared_ptr<const Model>()>;

struct ModelSource {
  std::string text;
  ModelFactory make;
  // Data the model was trained on, when known.
  std::shared_ptr<const Dataset> training_data;
};

namespace detail {

inline std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline std::map<std::string, std::string> parse_options(const std::string& s) {
  std::map<std::string, std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("model option '" + item + "' lacks '='");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline ModelSource resolve_model(const std::string& text, const FeatureSpace& fs,
                                 std::shared_ptr<const Dataset> data,
                                 const std::filesystem::path& base_dir = {}) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto resolve_path = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };

  if (head == "loan") {
    if (fs.size() != 3 || fs.class_count() != 3)
      throw ConfigError("loan needs 3 features and the classes no < medium < high");
    auto tree = std::make_shared<const TreeModel>(banking::tree());
    return {text, [tree] { return tree; }, nullptr};
  }
  if (head == "constant") {
    auto r = parse_number(rest);
    if (!r || !fs.valid_rank(static_cast<ClassRank>(*r)))
      throw ConfigError("constant model needs a valid class rank, got '" + rest + "'");
    auto m = std::make_shared<const ConstantModel>(static_cast<ClassRank>(*r));
    return {text, [m] { return m; }, nullptr};
  }
  if (head == "tree") {
    auto tree = std::make_shared<const TreeModel>(
        TreeModel::parse(detail::read_file(resolve_path(rest))));
    if (tree->feature_count() != fs.size() || tree->class_count() != fs.class_count())
      throw ConfigError("tree file does not match the feature space");
    return {text, [tree] { return tree; }, nullptr};
  }
  if (head == "exec") {
    auto argv = detail::split_words(rest);
    if (argv.empty()) throw ConfigError("exec model needs a command");
    return {text, [argv, fs] { return std::make_shared<const ExternalModel>(argv, fs); },
            nullptr};
  }

  ModelKind kind;
  if (head == "cart") kind = ModelKind::kTree;
  else if (head == "forest") kind = ModelKind::kForest;
  else if (head == "knn") kind = ModelKind::kKnn;
  else if (head == "logreg") kind = ModelKind::kLogistic;
  else throw ConfigError("unknown model source '" + text + "'");
  if (!data) throw ConfigError("model '" + text + "' needs training data (--data)");

  Hyperparams hp;
  std::uint64_t seed = 0;
  for (const auto& [key, value] : detail::parse_options(rest)) {
    auto v = parse_number(value);
    if (!v || *v < 0) throw ConfigError("model option " + key + "='" + value + "' is invalid");
    const auto u = static_cast<std::size_t>(*v);
    if (key == "depth") hp.tree.max_depth = u;
    else if (key == "leaf") hp.tree.min_samples_leaf = u;
    else if (key == "trees") hp.trees = u;
    else if (key == "features") hp.forest_features = u;
    else if (key == "bootstrap") hp.bootstrap = u != 0;
    else if (key == "k") hp.k = u;
    else if (key == "iters") hp.iterations = u;
    else if (key == "step") hp.step = *v;
    else if (key == "seed") seed = static_cast<std::uint64_t>(*v);
    else throw ConfigError("unknown model option '" + key + "'");
  }
  Rng rng(seed);
  auto model = std::make_shared<const BuiltinModel>(train_builtin(kind, *data, hp, rng));
  return {text, [model] { return model; }, data};
}

}  // namespace monocheck
