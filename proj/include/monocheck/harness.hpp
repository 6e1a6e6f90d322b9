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
#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "monocheck/art.hpp"
#include "monocheck/core.hpp"
#include "monocheck/datasets.hpp"
#include "monocheck/model_spec.hpp"
#include "monocheck/pt.hpp"
#include "monocheck/report.hpp"
#include "monocheck/vbt.hpp"

namespace monocheck {

struct Budgets {
  std::size_t max_samples = 1000;
  std::size_t ini_samples = 100;
  std::size_t pool_size = 50;
  std::size_t max_orcl = 1000;
  bool stop_at_first = true;
  bool prune_instances = true;
  bool prune_branches = true;
  std::optional<double> training_mix;
};

struct Task {
  std::string name;
  ModelFactory model;
  FeatureSpace space;
  MonotonicityConstraint constraint;
  std::vector<Method> methods{Method::kVbt, Method::kArt, Method::kPt};
  // One seed per repetition.
  std::vector<std::uint64_t> seeds{0};
  Budgets budgets{};
  std::shared_ptr<const Dataset> training_data{};
  TreeParams surrogate{};
};

struct ExperimentPlan {
  std::vector<Task> tasks;
  // Worker threads across cells; 0 uses the hardware concurrency.
  std::size_t workers = 0;

  void validate() const {
    for (const auto& t : tasks) {
      if (t.seeds.empty()) throw ConfigError("task '" + t.name + "' has no repetitions");
      if (std::set<std::uint64_t>(t.seeds.begin(), t.seeds.end()).size() != t.seeds.size())
        throw ConfigError("task '" + t.name + "' repeats a seed");
      if (!t.model) throw ConfigError("task '" + t.name + "' has no model");
      t.constraint.check(t.space);
    }
  }
};

// One (task, method, repetition) run.
struct CellResult {
  std::size_t task = 0;
  std::string task_name;
  Method method = Method::kVbt;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  bool stop_at_first = true;
  TestReport report;
};

struct MethodAggregate {
  std::string task;
  Method method = Method::kVbt;
  std::size_t runs = 0;
  std::size_t failed_runs = 0;
  std::size_t detections = 0;
  double mean_tests_generated = 0;
  double mean_failed_attempts = 0;
  double median_failed_attempts = 0;
  double mean_retrainings = 0;
  double mean_detection_rate = 0;
  double mean_wall_time_seconds = 0;
};

struct RunReport {
  static constexpr int kSchemaVersion = 1;

  std::vector<CellResult> cells;
  std::vector<MethodAggregate> aggregates;
  // Venn regions: method set ("vbt+art", "none", ...) -> task names. A task
  // belongs to the region of methods that detected it in any repetition.
  std::map<std::string, std::vector<std::string>> overlap;

  nlohmann::json to_json(const ExperimentPlan* plan = nullptr) const {
    using nlohmann::json;
    json j;
    j["schema_version"] = kSchemaVersion;
    j["cells"] = json::array();
    for (const auto& c : cells) {
      const auto& r = c.report;
      json cell = {{"task", c.task_name},
                   {"task_index", c.task},
                   {"method", to_string(c.method)},
                   {"repetition", c.repetition},
                   {"seed", c.seed},
                   {"verdict", to_string(r.verdict())},
                   {"tests_generated", r.tests_generated},
                   {"failed_attempts", r.failed_attempts},
                   {"wall_time_s", r.wall_time_seconds},
                   {"error", r.error ? json(*r.error) : json(nullptr)}};
      if (c.method == Method::kVbt) {
        cell["retrainings"] = r.retrainings;
        cell["oracle_size"] = r.oracle_size;
      }
      if (!c.stop_at_first) cell["detection_rate"] = r.detection_rate();
      json cexs = json::array();
      const FeatureSpace* fs = plan ? &plan->tasks.at(c.task).space : nullptr;
      for (const auto& cex : r.counterexamples) {
        json e = {{"x", cex.x}, {"x_prime", cex.x_prime}, {"y", cex.y}, {"y_prime", cex.y_prime}};
        if (fs) {
          e["y_label"] = fs->class_label(cex.y);
          e["y_prime_label"] = fs->class_label(cex.y_prime);
        }
        cexs.push_back(std::move(e));
      }
      cell["counterexamples"] = std::move(cexs);
      j["cells"].push_back(std::move(cell));
    }
    j["aggregates"] = json::array();
    for (const auto& a : aggregates)
      j["aggregates"].push_back({{"task", a.task},
                                 {"method", to_string(a.method)},
                                 {"runs", a.runs},
                                 {"failed_runs", a.failed_runs},
                                 {"detections", a.detections},
                                 {"mean_tests_generated", a.mean_tests_generated},
                                 {"mean_failed_attempts", a.mean_failed_attempts},
                                 {"median_failed_attempts", a.median_failed_attempts},
                                 {"mean_retrainings", a.mean_retrainings},
                                 {"mean_detection_rate", a.mean_detection_rate},
                                 {"mean_wall_time_s", a.mean_wall_time_seconds}});
    j["overlap"] = json::object();
    for (const auto& [region, tasks] : overlap) j["overlap"][region] = tasks;
    return j;
  }
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
}

namespace detail {

inline TestReport run_cell_unguarded(const Task& task, Method method, std::uint64_t seed) {
  const auto& b = task.budgets;
  std::shared_ptr<const Model> model;
  try {
    model = task.model();
  } catch (const Error& e) {
    TestReport r;
    r.method = method;
    r.error = e.what();
    return r;
  }
  switch (method) {
    case Method::kVbt: {
      VbtConfig cfg;
      cfg.max_orcl = b.max_orcl;
      cfg.max_samples = b.max_samples;
      cfg.training_data = task.training_data;
      cfg.training_mix = b.training_mix;
      cfg.tree = task.surrogate;
      cfg.stop_at_first = b.stop_at_first;
      cfg.prune_instances = b.prune_instances;
      cfg.prune_branches = b.prune_branches;
      cfg.seed = seed;
      return veri_test(*model, task.constraint, task.space, cfg);
    }
    case Method::kArt:
      return art_test(*model, task.constraint, task.space,
                      ArtConfig{b.ini_samples, b.pool_size, b.max_samples, b.stop_at_first, seed});
    case Method::kPt:
      return pt_test(*model, task.constraint, task.space,
                     PtConfig{b.max_samples, b.stop_at_first, seed});
  }
  throw ConfigError("unknown method");
}

}  // namespace detail

// Runs one cell. Any failure (building or querying the model, or generating
// tests) is recorded in report.error instead of escaping the worker.
inline TestReport run_cell(const Task& task, Method method, std::uint64_t seed) {
  try {
    return detail::run_cell_unguarded(task, method, seed);
  } catch (const Error& e) {
    TestReport r;
    r.method = method;
    r.error = e.what();
    return r;
  }
}

namespace detail {

inline void aggregate(RunReport& report, const ExperimentPlan& plan) {
  std::map<std::pair<std::size_t, Method>, std::vector<const CellResult*>> groups;
  for (const auto& c : report.cells) groups[{c.task, c.method}].push_back(&c);
  std::map<std::size_t, std::set<Method>> detected;
  for (const auto& [key, cells] : groups) {
    MethodAggregate a;
    a.task = plan.tasks[key.first].name;
    a.method = key.second;
    std::vector<double> failed;
    for (const auto* c : cells) {
      const auto& r = c->report;
      ++a.runs;
      if (r.error) ++a.failed_runs;
      if (r.non_monotone()) {
        ++a.detections;
        detected[key.first].insert(key.second);
      }
      a.mean_tests_generated += static_cast<double>(r.tests_generated);
      a.mean_failed_attempts += static_cast<double>(r.failed_attempts);
      a.mean_retrainings += static_cast<double>(r.retrainings);
      a.mean_detection_rate += r.detection_rate();
      a.mean_wall_time_seconds += r.wall_time_seconds;
      failed.push_back(static_cast<double>(r.failed_attempts));
    }
    const double n = static_cast<double>(a.runs);
    a.mean_tests_generated /= n;
    a.mean_failed_attempts /= n;
    a.mean_retrainings /= n;
    a.mean_detection_rate /= n;
    a.mean_wall_time_seconds /= n;
    a.median_failed_attempts = median(std::move(failed));
    report.aggregates.push_back(std::move(a));
  }
  for (std::size_t t = 0; t < plan.tasks.size(); ++t) {
    std::string region;
    for (Method m : {Method::kVbt, Method::kArt, Method::kPt})
      if (detected[t].count(m)) region += (region.empty() ? "" : "+") + std::string(to_string(m));
    report.overlap[region.empty() ? "none" : region].push_back(plan.tasks[t].name);
  }
}

}  // namespace detail

// Executes every (task, method, repetition) cell on a bounded worker pool.
// Cells are independent and seeded, so the report does not depend on the
// number of workers except for wall times.
inline RunReport run_plan(const ExperimentPlan& plan) {
  plan.validate();
  RunReport report;
  for (std::size_t t = 0; t < plan.tasks.size(); ++t) {
    const auto& task = plan.tasks[t];
    for (Method m : task.methods)
      for (std::size_t rep = 0; rep < task.seeds.size(); ++rep)
        report.cells.push_back(
            {t, task.name, m, rep, task.seeds[rep], task.budgets.stop_at_first, {}});
  }
  std::size_t workers = plan.workers ? plan.workers : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, report.cells.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < report.cells.size();) {
      auto& cell = report.cells[i];
      cell.report = run_cell(plan.tasks[cell.task], cell.method, cell.seed);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  detail::aggregate(report, plan);
  return report;
}

enum class PruningStrategy { kInstances, kBranches };

struct TaskRate {
  std::string task;
  // Mean over repetitions of validated counterexamples per test pair.
  double detection_rate = 0;
  std::size_t counterexamples = 0;
  std::size_t tests_generated = 0;
};

// VBT with exactly one pruning strategy and without stopping at the first
// counterexample, reported per task.
// The underlying cells are stored in *cells when given.
inline std::vector<TaskRate> detection_rate_sweep(ExperimentPlan plan,
                                                  PruningStrategy strategy,
                                                  RunReport* cells = nullptr) {
  for (auto& t : plan.tasks) {
    t.methods = {Method::kVbt};
    t.budgets.stop_at_first = false;
    t.budgets.prune_instances = strategy == PruningStrategy::kInstances;
    t.budgets.prune_branches = strategy == PruningStrategy::kBranches;
  }
  const RunReport report = run_plan(plan);
  std::vector<TaskRate> rates(plan.tasks.size());
  for (std::size_t t = 0; t < plan.tasks.size(); ++t) rates[t].task = plan.tasks[t].name;
  for (const auto& c : report.cells) {
    auto& r = rates[c.task];
    r.detection_rate += c.report.detection_rate() /
                        static_cast<double>(plan.tasks[c.task].seeds.size());
    r.counterexamples += c.report.counterexamples.size();
    r.tests_generated += c.report.tests_generated;
  }
  if (cells) *cells = report;
  return rates;
}

struct AuditResult {
  std::size_t checked = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

// Re-validates every counterexample in a JSON report against its task's
// model: precondition and class violation through a fresh model instance.
inline AuditResult audit_report(const nlohmann::json& report, const ExperimentPlan& plan) {
  AuditResult out;
  std::map<std::size_t, std::shared_ptr<const Model>> models;
  for (const auto& cell : report.at("cells")) {
    const auto t = cell.at("task_index").get<std::size_t>();
    const auto& task = plan.tasks.at(t);
    for (const auto& cex : cell.at("counterexamples")) {
      ++out.checked;
      if (!models.count(t)) models[t] = task.model();
      const auto x = cex.at("x").get<Instance>();
      const auto x2 = cex.at("x_prime").get<Instance>();
      std::string where = task.name + "/" + cell.at("method").get<std::string>() + "#" +
                          std::to_string(cell.at("repetition").get<std::size_t>());
      if (!task.space.contains(x) || !task.space.contains(x2)) {
        out.failures.push_back(where + ": instance outside the feature space");
      } else if (!precondition_holds(x, x2, task.constraint, task.space)) {
        out.failures.push_back(where + ": precondition violated");
      } else if (!is_violation(models[t]->predict(x), models[t]->predict(x2))) {
        out.failures.push_back(where + ": model does not confirm the violation");
      }
    }
  }
  return out;
}

// Plan file (JSON):
//
//   {
//     "workers": 2,
//     "tasks": [
//       {"name": "banking", "model": "loan", "constraint": "loan.json",
//        "data": "banking.csv", "methods": ["vbt", "art", "pt"],
//        "repetitions": 10, "seed": 1, "max_samples": 1000, "ini_samples": 100,
//        "pool_size": 50, "max_orcl": 1000, "stop_at_first": true,
//        "training_mix": 0.1, "surrogate_depth": 20}
//     ]
//   }
//
// Paths are relative to the plan file. Repetition r uses seed + r unless an
// explicit "seeds" list is given.
inline ExperimentPlan parse_plan(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  ExperimentPlan plan;
  try {
    plan.workers = j.value("workers", std::size_t{0});
    for (const auto& tj : j.at("tasks")) {
      auto path = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base_dir / fp;
      };
      const auto spec = ConstraintSpec::load(path(tj.at("constraint").get<std::string>()).string());
      std::shared_ptr<const Dataset> data;
      if (tj.contains("data"))
        data = std::make_shared<const Dataset>(
            load_csv(path(tj.at("data").get<std::string>()).string(), spec));
      FeatureSpace fs = data ? data->space : spec.feature_space();
      const auto source = resolve_model(tj.at("model").get<std::string>(), fs, data, base_dir);
      Task task{tj.value("name", source.text), source.make, fs, spec.constraint(fs)};
      if (tj.contains("methods")) {
        task.methods.clear();
        for (const auto& m : tj.at("methods")) {
          auto method = parse_method(m.get<std::string>());
          if (!method) throw ConfigError("unknown method '" + m.get<std::string>() + "'");
          task.methods.push_back(*method);
        }
      }
      if (tj.contains("seeds")) {
        task.seeds = tj.at("seeds").get<std::vector<std::uint64_t>>();
      } else {
        const auto reps = tj.value("repetitions", std::size_t{1});
        const auto seed = tj.value("seed", std::uint64_t{0});
        if (reps < 1) throw ConfigError("repetitions must be at least 1");
        task.seeds.clear();
        for (std::size_t r = 0; r < reps; ++r) task.seeds.push_back(seed + r);
      }
      auto& b = task.budgets;
      b.max_samples = tj.value("max_samples", b.max_samples);
      b.ini_samples = tj.value("ini_samples", b.ini_samples);
      b.pool_size = tj.value("pool_size", b.pool_size);
      b.max_orcl = tj.value("max_orcl", b.max_orcl);
      b.stop_at_first = tj.value("stop_at_first", b.stop_at_first);
      if (tj.contains("training_mix")) b.training_mix = tj.at("training_mix").get<double>();
      task.surrogate.max_depth = tj.value("surrogate_depth", task.surrogate.max_depth);
      task.training_data = data;
      plan.tasks.push_back(std::move(task));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("plan file: ") + e.what());
  }
  plan.validate();
  return plan;
}

inline ExperimentPlan load_plan(const std::string& path) {
  const auto text = detail::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("plan file is not valid JSON: " + std::string(e.what()));
  }
  return parse_plan(j, std::filesystem::path(path).parent_path());
}

}  // namespace monocheck
