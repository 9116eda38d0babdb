// Copyright 2026 The labaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Every subcommand accepts --config, --seed (master
// seed override) and --out (output directory).
//
// Exit codes: 0 success, 1 invalid input, 2 a pipeline cell failed.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "labaudit/labaudit.hpp"

namespace fs = std::filesystem;
using namespace labaudit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitCellFailure = 2;

struct CommonOptions {
  std::string config;
  std::optional<std::int64_t> seed;
  std::string out = ".";
};

void AddCommon(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "Experiment config (JSON)");
  cmd->add_option("--seed", opts.seed, "Master seed (overrides the config)");
  cmd->add_option("--out", opts.out, "Output directory")->capture_default_str();
}

ExperimentConfig LoadConfig(const CommonOptions& opts) {
  ExperimentConfig c =
      opts.config.empty() ? ExperimentConfig{} : LoadExperimentConfig(opts.config);
  if (opts.seed) c.master_seed = *opts.seed;
  return c;
}

std::string OutPath(const CommonOptions& opts, const std::string& name) {
  fs::create_directories(opts.out);
  return (fs::path(opts.out) / name).string();
}

Dataset DatasetFor(const ExperimentConfig& c, const std::string& data_path) {
  return data_path.empty() ? PrepareDataset(c, 0) : LoadDataset(data_path);
}

int RunSynth(const CommonOptions& opts, std::optional<std::size_t> n,
             std::optional<std::size_t> d, std::optional<double> separation) {
  ExperimentConfig c = LoadConfig(opts);
  if (n) c.data.n = *n;
  if (d) c.data.d = *d;
  if (separation) c.data.separation = *separation;
  const Dataset data =
      SynthesizeDataset(c.data.n, c.data.d, c.data.separation, DataSeed(c, 0));
  const std::string path = OutPath(opts, "dataset.csv");
  SaveDataset(data, path);
  std::cout << "wrote " << data.size() << " examples to " << path << "\n";
  return kExitOk;
}

int RunCanary(const CommonOptions& opts, const std::string& data_path,
              std::optional<double> flip_rate) {
  ExperimentConfig c = LoadConfig(opts);
  if (flip_rate) c.flip_rate = *flip_rate;
  const Dataset data = DatasetFor(c, data_path);
  const CanaryPlan plan = SelectCanaries(data, c.flip_rate, CanarySeed(c, 0));
  SaveCanaryPlan(plan, OutPath(opts, "canary_plan.json"));
  SaveDataset(ApplyCanaries(data, plan), OutPath(opts, "dataset_canaried.csv"));
  std::cout << "selected " << plan.size() << " canaries (" << plan.flipped_count()
            << " flipped) from " << data.size() << " examples\n";
  return kExitOk;
}

int RunTrain(const CommonOptions& opts, const std::string& data_path,
             const std::string& plan_path, const std::string& epsilon) {
  const ExperimentConfig c = LoadConfig(opts);
  const PrivacyBudget eps =
      epsilon.empty() ? c.epsilons.front() : PrivacyBudget::Parse(epsilon);
  const Dataset data = DatasetFor(c, data_path);
  const CanaryPlan plan = plan_path.empty()
                              ? SelectCanaries(data, c.flip_rate, CanarySeed(c, 0))
                              : LoadCanaryPlan(plan_path);
  if (plan_path.empty()) SaveCanaryPlan(plan, OutPath(opts, "canary_plan.json"));

  CellArtifacts cell;
  try {
    cell = RunChallenger(c, data, plan, eps, 0);
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCellFailure;
  }
  ExportPredictions(cell.records, OutPath(opts, "predictions.jsonl"));
  WriteFile(OutPath(opts, "model.json"), TrainedModelToJson(cell.model).dump(2) + "\n");

  nlohmann::ordered_json summary;
  summary["epsilon"] = eps.ToString();
  summary["train_accuracy"] = cell.train_accuracy;
  summary["keep_fraction"] = cell.keep_fraction;
  summary["provenance"] = CellProvenance(c, plan, eps, 0);
  WriteFile(OutPath(opts, "train_summary.json"), summary.dump(2) + "\n");
  std::cout << "epsilon=" << eps.ToString()
            << " train_accuracy=" << FormatDouble(cell.train_accuracy) << "\n";
  return kExitOk;
}

int RunAttackCmd(const CommonOptions& opts, const std::string& predictions_path,
                 const std::string& plan_path) {
  const ExperimentConfig c = LoadConfig(opts);
  const auto records =
      CanaryRecords(ImportPredictions(predictions_path), LoadCanaryPlan(plan_path));
  auto arr = nlohmann::ordered_json::array();
  for (const AttackConfig& a : c.attacks) {
    const InferenceResult result = RunAttack(records, a);
    nlohmann::ordered_json j = AttackConfigToJson(a);
    auto inferred = nlohmann::ordered_json::array();
    for (const auto& g : result.inferred) {
      inferred.push_back({{"id", g.id}, {"label", g.label}});
    }
    j["inferred"] = std::move(inferred);
    arr.push_back(std::move(j));
  }
  nlohmann::ordered_json out;
  out["attacks"] = std::move(arr);
  WriteFile(OutPath(opts, "inferences.json"), out.dump(2) + "\n");
  std::cout << "inferred " << records.size() << " canary labels with "
            << c.attacks.size() << " attacks\n";
  return kExitOk;
}

void PrintReports(const std::vector<AuditReport>& reports) {
  for (const auto& r : reports) {
    std::cout << "eps=" << r.epsilon << " trial=" << r.trial << " " << r.attack_name;
    if (r.threshold_kind) std::cout << "/" << ToString(*r.threshold_kind);
    if (r.failed()) {
      std::cout << " FAILED: " << *r.error << "\n";
      continue;
    }
    std::cout << " sr=" << FormatDouble(r.success_ratio) << " (" << r.correct << "/"
              << r.n << ") p=" << FormatDouble(r.p_value) << " "
              << ToString(r.verdict) << "\n";
  }
}

int RunAudit(const CommonOptions& opts, const std::string& predictions_path,
             const std::string& plan_path) {
  const ExperimentConfig c = LoadConfig(opts);
  const auto reports =
      AuditExternal(predictions_path, plan_path, c.attacks, c.significance);
  WriteFile(OutPath(opts, "audit.json"), ReportsToJson(reports));
  WriteFile(OutPath(opts, "audit.csv"), ReportsToCsv(reports));
  PrintReports(reports);
  return kExitOk;
}

int RunSweep(const CommonOptions& opts) {
  const ExperimentConfig c = LoadConfig(opts);
  const SweepResult result = SweepEpsilon(c);
  WriteFile(OutPath(opts, "sweep.json"), ReportsToJson(result.rows));
  WriteFile(OutPath(opts, "sweep.csv"), ReportsToCsv(result.rows));
  PrintReports(result.rows);
  return result.any_failed() ? kExitCellFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"labaudit: audit label memorization with canaries and passive "
               "label inference attacks"};
  app.require_subcommand(1);

  CommonOptions synth_opts, canary_opts, train_opts, attack_opts, audit_opts,
      sweep_opts;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic two-cluster dataset");
  AddCommon(synth, synth_opts);
  std::optional<std::size_t> synth_n, synth_d;
  std::optional<double> synth_sep;
  synth->add_option("--n", synth_n, "Number of examples");
  synth->add_option("--d", synth_d, "Feature dimension");
  synth->add_option("--separation", synth_sep, "Distance between cluster means per coordinate");

  auto* canary = app.add_subcommand("canary", "Select canaries and write the plan");
  AddCommon(canary, canary_opts);
  std::string canary_data;
  std::optional<double> canary_rate;
  canary->add_option("--data", canary_data, "Dataset CSV (default: config data source)");
  canary->add_option("--flip-rate", canary_rate, "Fraction of examples used as canaries");

  auto* train = app.add_subcommand("train", "Apply canaries and RR, train, dump predictions");
  AddCommon(train, train_opts);
  std::string train_data, train_plan, train_eps;
  train->add_option("--data", train_data, "Dataset CSV (default: config data source)");
  train->add_option("--plan", train_plan, "Canary plan JSON (default: select one)");
  train->add_option("--epsilon", train_eps, "Privacy budget (default: first in config)");

  auto* attack = app.add_subcommand("attack", "Infer canary labels from a prediction dump");
  AddCommon(attack, attack_opts);
  std::string attack_pred, attack_plan;
  attack->add_option("--predictions", attack_pred, "Prediction dump (JSON Lines)")->required();
  attack->add_option("--plan", attack_plan, "Canary plan JSON")->required();

  auto* audit = app.add_subcommand("audit", "Audit a prediction dump against a canary plan");
  AddCommon(audit, audit_opts);
  std::string audit_pred, audit_plan;
  audit->add_option("--predictions", audit_pred, "Prediction dump (JSON Lines)")->required();
  audit->add_option("--plan", audit_plan, "Canary plan JSON")->required();

  auto* sweep = app.add_subcommand("sweep", "Run the full pipeline over the epsilon grid");
  AddCommon(sweep, sweep_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*synth) return RunSynth(synth_opts, synth_n, synth_d, synth_sep);
    if (*canary) return RunCanary(canary_opts, canary_data, canary_rate);
    if (*train) return RunTrain(train_opts, train_data, train_plan, train_eps);
    if (*attack) return RunAttackCmd(attack_opts, attack_pred, attack_plan);
    if (*audit) return RunAudit(audit_opts, audit_pred, audit_plan);
    if (*sweep) return RunSweep(sweep_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
