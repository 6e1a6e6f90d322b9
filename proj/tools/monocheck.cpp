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

// monocheck: command-line front end.
//
//   monocheck test --model <spec> [--data <csv>] --constraint <file>
//                  --method vbt|art|pt --seed N --max-samples N
//                  [--no-stop-at-first] --out report.json
//   monocheck bench --plan <file> --out report.json
//   monocheck surrogate --model <spec> [--data <csv>] --constraint <file>
//                       --dump tree.txt
//
// Exit codes: 0 ran, 1 usage or input error, 2 model or protocol failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "monocheck/monocheck.hpp"

namespace {

using namespace monocheck;

constexpr int kExitUsage = 1;
constexpr int kExitModel = 2;

struct Loaded {
  FeatureSpace space;
  MonotonicityConstraint constraint;
  ModelSource source;
  std::shared_ptr<const Dataset> data;
};

Loaded load(const std::string& model, const std::string& data_path,
            const std::string& constraint_path) {
  const auto spec = ConstraintSpec::load(constraint_path);
  std::shared_ptr<const Dataset> data;
  if (!data_path.empty()) data = std::make_shared<const Dataset>(load_csv(data_path, spec));
  FeatureSpace fs = data ? data->space : spec.feature_space();
  auto source = resolve_model(model, fs, data, std::filesystem::current_path());
  auto c = spec.constraint(fs);
  return {std::move(fs), std::move(c), std::move(source), std::move(data)};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

void write_report(const std::string& path, const RunReport& report, const ExperimentPlan& plan) {
  const std::string text = report.to_json(&plan).dump(2) + "\n";
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_text(path, text);
}

void print_summary(const RunReport& report) {
  for (const auto& a : report.aggregates) {
    std::fprintf(stderr, "%-24s %-3s detected %zu/%zu  failed_attempts mean %.1f  tests mean %.1f%s\n",
                 a.task.c_str(), to_string(a.method), a.detections, a.runs,
                 a.mean_failed_attempts, a.mean_tests_generated,
                 a.failed_runs ? "  (model failures)" : "");
  }
  for (const auto& c : report.cells)
    if (c.report.error)
      std::fprintf(stderr, "error in %s/%s#%zu: %s\n", c.task_name.c_str(), to_string(c.method),
                   c.repetition, c.report.error->c_str());
}

int exit_code(const RunReport& report) {
  for (const auto& c : report.cells)
    if (c.report.error) return kExitModel;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monotonicity testing for black-box classifiers"};
  app.require_subcommand(1);

  std::string model, data, constraint, method = "vbt", out, plan_path, dump;
  std::uint64_t seed = 0;
  std::size_t max_samples = 1000, max_orcl = 1000, ini = 100, pool = 50;
  std::optional<double> training_mix;
  bool no_stop = false;

  auto* test = app.add_subcommand("test", "Test one model with one method");
  test->add_option("--model", model, "loan | constant:<rank> | tree:<file> | exec:<cmd> | "
                                     "cart|forest|knn|logreg[:k=v,...]")->required();
  test->add_option("--data", data, "CSV dataset (required for built-in learners)");
  test->add_option("--constraint", constraint, "Constraint spec (JSON)")->required();
  test->add_option("--method", method, "vbt | art | pt")
      ->check(CLI::IsMember({"vbt", "art", "pt"}));
  test->add_option("--seed", seed, "Random seed");
  test->add_option("--max-samples", max_samples, "Test-pair budget")->check(CLI::PositiveNumber);
  test->add_option("--max-orcl", max_orcl, "Initial oracle size (vbt)")->check(CLI::PositiveNumber);
  test->add_option("--ini", ini, "Initial random pairs (art)");
  test->add_option("--pool", pool, "Candidate pool size (art)")->check(CLI::PositiveNumber);
  test->add_option("--training-mix", training_mix, "Share of oracle rows from --data (vbt)")
      ->check(CLI::Range(0.0, 1.0));
  test->add_flag("--no-stop-at-first", no_stop, "Keep testing after the first counterexample");
  test->add_option("--out", out, "Report path ('-' for stdout)");

  auto* bench = app.add_subcommand("bench", "Run an experiment plan");
  bench->add_option("--plan", plan_path, "Plan file (JSON)")->required()->check(CLI::ExistingFile);
  bench->add_option("--out", out, "Report path ('-' for stdout)");

  auto* surrogate = app.add_subcommand("surrogate", "Train and dump a surrogate tree");
  surrogate->add_option("--model", model, "Model source, as for test")->required();
  surrogate->add_option("--data", data, "CSV dataset");
  surrogate->add_option("--constraint", constraint, "Constraint spec (JSON)")->required();
  surrogate->add_option("--seed", seed, "Random seed");
  surrogate->add_option("--max-orcl", max_orcl, "Oracle size")->check(CLI::PositiveNumber);
  surrogate->add_option("--dump", dump, "Tree output; the SMT-LIB dump goes to <dump>.smt2")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*test) {
      Loaded l = load(model, data, constraint);
      ExperimentPlan plan;
      plan.workers = 1;
      Task task{l.source.text, l.source.make, l.space, l.constraint};
      task.methods = {*parse_method(method)};
      task.seeds = {seed};
      task.budgets.max_samples = max_samples;
      task.budgets.max_orcl = max_orcl;
      task.budgets.ini_samples = ini;
      task.budgets.pool_size = pool;
      task.budgets.stop_at_first = !no_stop;
      task.budgets.training_mix = training_mix;
      task.training_data = l.data;
      plan.tasks.push_back(std::move(task));
      const RunReport report = run_plan(plan);
      write_report(out, report, plan);
      const auto& r = report.cells.front().report;
      std::fprintf(stderr, "%s: %s, %zu counterexample(s), %zu tests, %zu failed attempts\n",
                   method.c_str(), to_string(r.verdict()), r.counterexamples.size(),
                   r.tests_generated, r.failed_attempts);
      if (r.error) std::fprintf(stderr, "model failure: %s\n", r.error->c_str());
      return exit_code(report);
    }
    if (*bench) {
      const ExperimentPlan plan = load_plan(plan_path);
      const RunReport report = run_plan(plan);
      write_report(out, report, plan);
      print_summary(report);
      return exit_code(report);
    }
    if (*surrogate) {
      Loaded l = load(model, data, constraint);
      const auto m = l.source.make();
      VbtConfig cfg;
      cfg.max_orcl = max_orcl;
      cfg.training_data = l.data;
      Rng rng(seed);
      Rng tree_rng = rng.fork(1);
      const Dataset oracle = generate_oracle(*m, l.space, cfg, rng);
      const TreeModel tree = train_tree(oracle, cfg.tree, &tree_rng);
      write_text(dump, tree.serialize());
      write_text(dump + ".smt2", to_smtlib(tree, l.constraint, l.space));
      std::fprintf(stderr, "surrogate: %zu nodes, depth %zu, trained on %zu oracle rows\n",
                   tree.nodes().size(), tree.depth(), oracle.size());
      return 0;
    }
  } catch (const ModelError& e) {
    std::fprintf(stderr, "model failure: %s\n", e.what());
    return kExitModel;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
