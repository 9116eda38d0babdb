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

// End-to-end audit pipeline:
//
//   D --select--> CanaryPlan --apply--> D' --RR(eps)--> training labels
//     --train--> model --predict--> records --canary rows--> attacks --> SR
//
// Every stochastic stage takes its seed from DeriveSeed(master_seed, stage,
// epsilon, trial) with stages "data", "canary" (epsilon "*": shared by all
// budgets of a trial), "rr" and "train".

#ifndef LABAUDIT_HARNESS_HPP_
#define LABAUDIT_HARNESS_HPP_

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "labaudit/attacks.hpp"
#include "labaudit/dataset.hpp"
#include "labaudit/error.hpp"
#include "labaudit/io.hpp"
#include "labaudit/metrics.hpp"
#include "labaudit/model.hpp"
#include "labaudit/privacy.hpp"
#include "labaudit/random.hpp"

namespace labaudit {

struct DataSource {
  std::optional<std::string> path;  // CSV; when unset, synthesize
  std::size_t n = 2000;
  std::size_t d = 20;
  double separation = 2.0;
};

inline std::vector<PrivacyBudget> DefaultEpsilonGrid() {
  return {PrivacyBudget::Infinite(), PrivacyBudget::Of(4),
          PrivacyBudget::Of(2),      PrivacyBudget::Of(1),
          PrivacyBudget::Of(0.8),    PrivacyBudget::Of(0.5),
          PrivacyBudget::Of(0.3)};
}

inline std::vector<AttackConfig> DefaultAttacks() {
  return {ThresholdConfig{ThresholdKind::kFixed},
          ThresholdConfig{ThresholdKind::kMean},
          ThresholdConfig{ThresholdKind::kMedian}, DeltaMarginConfig{1.0, 1.0}};
}

struct ExperimentConfig {
  DataSource data;
  double flip_rate = 0.02;
  std::vector<PrivacyBudget> epsilons = DefaultEpsilonGrid();
  ModelSpec model;  // model.seed is replaced by the derived "train" seed
  std::vector<AttackConfig> attacks = DefaultAttacks();
  std::int64_t master_seed = 0;
  std::optional<std::int64_t> rr_seed;  // overrides master_seed for "rr"
  int trials = 3;
  double significance = kDefaultSignificance;

  void Validate() const {
    if (!(flip_rate > 0.0 && flip_rate <= 1.0)) {
      throw InvalidArgument("flip_rate must be in (0, 1]");
    }
    if (epsilons.empty()) throw InvalidArgument("epsilon list is empty");
    if (attacks.empty()) throw InvalidArgument("no attacks configured");
    for (const auto& a : attacks) {
      if (const auto* dm = std::get_if<DeltaMarginConfig>(&a)) dm->Validate();
    }
    if (trials < 1) throw InvalidArgument("trials must be at least 1");
    if (!(significance > 0.0 && significance < 1.0)) {
      throw InvalidArgument("significance must be in (0, 1)");
    }
    if (!data.path && (data.n < 2 || data.d < 1)) {
      throw InvalidArgument("synthetic data needs n >= 2 and d >= 1");
    }
    model.Validate();
  }
};

// ---------------------------------------------------------------------------
// Config file (JSON). Unknown keys are rejected so typos do not silently
// fall back to defaults.

namespace detail {

inline void RejectUnknownKeys(const nlohmann::json& j,
                              std::initializer_list<const char*> allowed,
                              const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      throw InvalidArgument("unknown config key '" + key + "' in " + where);
    }
  }
}

inline PrivacyBudget BudgetFromJson(const nlohmann::json& v) {
  if (v.is_string()) return PrivacyBudget::Parse(v.get<std::string>());
  if (v.is_number()) return PrivacyBudget::Of(v.get<double>());
  throw InvalidArgument("epsilon entries must be numbers or \"inf\"");
}

}  // namespace detail

inline ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  detail::RejectUnknownKeys(j,
                            {"data", "flip_rate", "epsilon", "model", "attacks",
                             "master_seed", "rr_seed", "trials", "significance"},
                            "config");
  ExperimentConfig c;
  try {
    if (j.contains("data")) {
      const auto& d = j["data"];
      detail::RejectUnknownKeys(d, {"path", "synth"}, "data");
      if (d.contains("path")) c.data.path = d["path"].get<std::string>();
      if (d.contains("synth")) {
        const auto& s = d["synth"];
        detail::RejectUnknownKeys(s, {"n", "d", "separation"}, "data.synth");
        if (s.contains("n")) c.data.n = s["n"].get<std::size_t>();
        if (s.contains("d")) c.data.d = s["d"].get<std::size_t>();
        if (s.contains("separation")) {
          c.data.separation = s["separation"].get<double>();
        }
      }
    }
    if (j.contains("flip_rate")) c.flip_rate = j["flip_rate"].get<double>();
    if (j.contains("epsilon")) {
      c.epsilons.clear();
      const auto& e = j["epsilon"];
      if (e.is_array()) {
        for (const auto& v : e) c.epsilons.push_back(detail::BudgetFromJson(v));
      } else {
        c.epsilons.push_back(detail::BudgetFromJson(e));
      }
    }
    if (j.contains("model")) {
      const auto& m = j["model"];
      detail::RejectUnknownKeys(m,
                                {"kind", "hidden_units", "l2", "epochs",
                                 "batch_size", "learning_rate"},
                                "model");
      if (m.contains("kind")) c.model.kind = ParseModelKind(m["kind"].get<std::string>());
      if (m.contains("hidden_units")) c.model.hidden_units = m["hidden_units"].get<int>();
      if (m.contains("l2")) c.model.l2 = m["l2"].get<double>();
      if (m.contains("epochs")) c.model.epochs = m["epochs"].get<int>();
      if (m.contains("batch_size")) c.model.batch_size = m["batch_size"].get<int>();
      if (m.contains("learning_rate")) {
        c.model.learning_rate = m["learning_rate"].get<double>();
      }
    }
    if (j.contains("attacks")) {
      const auto& a = j["attacks"];
      detail::RejectUnknownKeys(a, {"threshold", "delta_margin"}, "attacks");
      c.attacks.clear();
      if (a.contains("threshold")) {
        for (const auto& k : a["threshold"]) {
          c.attacks.push_back(ThresholdConfig{ParseThresholdKind(k.get<std::string>())});
        }
      }
      if (a.contains("delta_margin")) {
        for (const auto& p : a["delta_margin"]) {
          detail::RejectUnknownKeys(p, {"alpha", "beta"}, "attacks.delta_margin");
          DeltaMarginConfig dm;
          if (p.contains("alpha")) dm.alpha = p["alpha"].get<double>();
          if (p.contains("beta")) dm.beta = p["beta"].get<double>();
          c.attacks.push_back(dm);
        }
      }
    }
    if (j.contains("master_seed")) c.master_seed = j["master_seed"].get<std::int64_t>();
    if (j.contains("rr_seed")) c.rr_seed = j["rr_seed"].get<std::int64_t>();
    if (j.contains("trials")) c.trials = j["trials"].get<int>();
    if (j.contains("significance")) c.significance = j["significance"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  c.Validate();
  return c;
}

inline ExperimentConfig LoadExperimentConfig(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, 0, e.what());
  }
  return ExperimentConfigFromJson(j);
}

inline nlohmann::ordered_json AttackConfigToJson(const AttackConfig& a) {
  nlohmann::ordered_json j;
  j["attack"] = AttackName(a);
  if (const auto* t = std::get_if<ThresholdConfig>(&a)) {
    j["threshold_kind"] = ToString(t->kind);
  } else {
    const auto& dm = std::get<DeltaMarginConfig>(a);
    j["alpha"] = dm.alpha;
    j["beta"] = dm.beta;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Stage seeds.

inline std::uint64_t DataSeed(const ExperimentConfig& c, int trial) {
  return DeriveSeed(c.master_seed, "data", "*", trial);
}
inline std::int64_t CanarySeed(const ExperimentConfig& c, int trial) {
  return static_cast<std::int64_t>(DeriveSeed(c.master_seed, "canary", "*", trial));
}
inline std::uint64_t RrSeed(const ExperimentConfig& c, PrivacyBudget eps, int trial) {
  return DeriveSeed(c.rr_seed.value_or(c.master_seed), "rr", eps.ToString(), trial);
}
inline std::int64_t TrainSeed(const ExperimentConfig& c, PrivacyBudget eps, int trial) {
  return static_cast<std::int64_t>(
      DeriveSeed(c.master_seed, "train", eps.ToString(), trial));
}

// The challenger's raw dataset for a trial: the CSV if configured (same for
// every trial), else a synthetic draw.
inline Dataset PrepareDataset(const ExperimentConfig& c, int trial) {
  if (c.data.path) return LoadDataset(*c.data.path);
  return SynthesizeDataset(c.data.n, c.data.d, c.data.separation,
                           DataSeed(c, trial));
}

// ---------------------------------------------------------------------------
// Auditing.

// Prediction rows of the canaries, in plan order. Throws if any canary id has
// no record.
inline std::vector<PredictionRecord> CanaryRecords(
    const std::vector<PredictionRecord>& records, const CanaryPlan& plan) {
  std::map<ExampleId, const PredictionRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.id, &r);
  std::vector<PredictionRecord> out;
  std::vector<ExampleId> missing;
  out.reserve(plan.size());
  for (const auto& e : plan.entries) {
    auto it = by_id.find(e.id);
    if (it == by_id.end()) {
      missing.push_back(e.id);
    } else {
      out.push_back(*it->second);
    }
  }
  if (!missing.empty()) {
    std::string msg = "predictions lack canary ids:";
    for (ExampleId id : missing) msg += " " + std::to_string(id);
    throw InvalidArgument(msg);
  }
  return out;
}

// Runs every attack on the canary rows only and scores it against the
// canary labels of D2' (pre-RR).
inline std::vector<AuditReport> AuditCanaries(
    const std::vector<PredictionRecord>& records, const CanaryPlan& plan,
    const std::vector<AttackConfig>& attacks, double significance) {
  const std::vector<PredictionRecord> attacked = CanaryRecords(records, plan);
  const auto targets = plan.canary_labels();
  std::vector<AuditReport> reports;
  reports.reserve(attacks.size());
  for (const AttackConfig& a : attacks) {
    reports.push_back(ScoreInference(RunAttack(attacked, a), targets, significance));
  }
  return reports;
}

// Black-box path: a prediction dump produced elsewhere plus the canary plan.
inline std::vector<AuditReport> AuditExternal(
    const std::string& predictions_path, const std::string& plan_path,
    const std::vector<AttackConfig>& attacks, double significance) {
  const auto records = ImportPredictions(predictions_path);
  const auto plan = LoadCanaryPlan(plan_path);
  auto reports = AuditCanaries(records, plan, attacks, significance);
  for (auto& r : reports) {
    r.epsilon = "unknown";
    r.provenance["predictions"] = predictions_path;
    r.provenance["canary_plan"] = plan_path;
    r.provenance["canaries"] = plan.size();
  }
  return reports;
}

using TrainFn = std::function<TrainedModel(const Dataset&, const std::vector<int>&,
                                           const ModelSpec&)>;

// Everything one (epsilon, trial) cell produces besides its reports; the CLI
// `train` command writes these out.
struct CellArtifacts {
  std::vector<int> training_labels;
  TrainedModel model;
  std::vector<PredictionRecord> records;
  double train_accuracy = 0.0;
  double keep_fraction = 1.0;
};

// Challenger side of one cell: D' -> RR -> train -> predict.
inline CellArtifacts RunChallenger(const ExperimentConfig& c, const Dataset& data,
                                   const CanaryPlan& plan, PrivacyBudget eps,
                                   int trial, const TrainFn& train = Train) {
  const Dataset canaried = ApplyCanaries(data, plan);
  const std::vector<int> clean = canaried.labels();
  CellArtifacts out;
  out.training_labels = RandomizedResponse(clean, eps, RrSeed(c, eps, trial));
  std::size_t kept = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    kept += clean[i] == out.training_labels[i];
  }
  out.keep_fraction = clean.empty()
                          ? 1.0
                          : static_cast<double>(kept) / static_cast<double>(clean.size());
  ModelSpec spec = c.model;
  spec.seed = TrainSeed(c, eps, trial);
  out.model = train(canaried, out.training_labels, spec);
  out.records = Predict(out.model, canaried, out.training_labels);
  out.train_accuracy = TrainAccuracy(out.records, out.training_labels);
  return out;
}

inline nlohmann::ordered_json CellProvenance(const ExperimentConfig& c,
                                             const CanaryPlan& plan,
                                             PrivacyBudget eps, int trial) {
  nlohmann::ordered_json p;
  p["master_seed"] = c.master_seed;
  nlohmann::ordered_json seeds;
  if (!c.data.path) seeds["data"] = DataSeed(c, trial);
  seeds["canary"] = plan.seed;
  seeds["rr"] = RrSeed(c, eps, trial);
  seeds["train"] = TrainSeed(c, eps, trial);
  p["seeds"] = seeds;
  if (c.data.path) {
    p["data"] = {{"path", *c.data.path}};
  } else {
    p["data"] = {{"synth", {{"n", c.data.n}, {"d", c.data.d},
                            {"separation", c.data.separation}}}};
  }
  p["flip_rate"] = c.flip_rate;
  p["canaries"] = plan.size();
  ModelSpec spec = c.model;
  spec.seed = TrainSeed(c, eps, trial);
  p["model"] = ModelSpecToJson(spec);
  return p;
}

// One (epsilon, trial) cell. Stage errors become failed rows (one per
// attack) instead of propagating.
inline std::vector<AuditReport> RunCell(const ExperimentConfig& c,
                                        const Dataset& data, const CanaryPlan& plan,
                                        PrivacyBudget eps, int trial,
                                        const TrainFn& train = Train) {
  const auto provenance = CellProvenance(c, plan, eps, trial);
  std::vector<AuditReport> reports;
  try {
    const CellArtifacts cell = RunChallenger(c, data, plan, eps, trial, train);
    const auto attacked = CanaryRecords(cell.records, plan);
    const auto targets = plan.canary_labels();
    std::map<ExampleId, int> post_rr;
    for (const auto& e : plan.entries) {
      post_rr.emplace(e.id, cell.training_labels[data.index_of(e.id)]);
    }
    for (const AttackConfig& a : c.attacks) {
      const InferenceResult inferred = RunAttack(attacked, a);
      AuditReport r = ScoreInference(inferred, targets, c.significance);
      r.sr_post_rr = SuccessRatio(inferred, post_rr).ratio;
      r.train_accuracy = cell.train_accuracy;
      r.keep_fraction = cell.keep_fraction;
      reports.push_back(std::move(r));
    }
  } catch (const std::exception& e) {
    reports.clear();
    for (const AttackConfig& a : c.attacks) {
      AuditReport r;
      SetAttack(r, a);
      r.significance = c.significance;
      r.error = e.what();
      reports.push_back(std::move(r));
    }
  }
  for (auto& r : reports) {
    r.epsilon = eps.ToString();
    r.trial = trial;
    r.provenance = provenance;
  }
  return reports;
}

// All trials of one epsilon.
inline std::vector<AuditReport> RunExperiment(const ExperimentConfig& c,
                                              PrivacyBudget eps,
                                              const TrainFn& train = Train) {
  c.Validate();
  std::vector<AuditReport> out;
  for (int trial = 0; trial < c.trials; ++trial) {
    const Dataset data = PrepareDataset(c, trial);
    const CanaryPlan plan = SelectCanaries(data, c.flip_rate, CanarySeed(c, trial));
    auto cell = RunCell(c, data, plan, eps, trial, train);
    out.insert(out.end(), std::make_move_iterator(cell.begin()),
               std::make_move_iterator(cell.end()));
  }
  return out;
}

struct SweepResult {
  std::vector<AuditReport> rows;  // epsilon descending (inf first), trial, attack

  bool any_failed() const {
    return std::any_of(rows.begin(), rows.end(),
                       [](const AuditReport& r) { return r.failed(); });
  }
};

inline SweepResult SweepEpsilon(const ExperimentConfig& c,
                                const TrainFn& train = Train) {
  c.Validate();
  std::vector<PrivacyBudget> grid = c.epsilons;
  std::stable_sort(grid.begin(), grid.end(),
                   [](PrivacyBudget a, PrivacyBudget b) { return a > b; });
  // Cells are computed trial-major so each trial's data and plan are built
  // once, then emitted epsilon-major.
  std::vector<std::vector<std::vector<AuditReport>>> cells(
      grid.size(), std::vector<std::vector<AuditReport>>(c.trials));
  for (int trial = 0; trial < c.trials; ++trial) {
    const Dataset data = PrepareDataset(c, trial);
    const CanaryPlan plan = SelectCanaries(data, c.flip_rate, CanarySeed(c, trial));
    for (std::size_t e = 0; e < grid.size(); ++e) {
      cells[e][trial] = RunCell(c, data, plan, grid[e], trial, train);
    }
  }
  SweepResult result;
  for (auto& by_trial : cells) {
    for (auto& reports : by_trial) {
      result.rows.insert(result.rows.end(), reports.begin(), reports.end());
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Report emission.

inline std::string ReportsToJson(const std::vector<AuditReport>& reports) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(AuditReportToJson(r));
  nlohmann::ordered_json j;
  j["reports"] = std::move(arr);
  return j.dump(2) + "\n";
}

namespace detail {

inline std::string CsvQuote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

inline std::string OptionalNumber(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : "";
}

}  // namespace detail

inline constexpr const char* kSweepCsvHeader =
    "epsilon,attack,threshold_kind,alpha,beta,train_acc,sr,p_value,verdict,"
    "trial,n,correct,keep_fraction,sr_post_rr,error";

inline std::string ReportsToCsv(const std::vector<AuditReport>& reports) {
  std::string out = std::string(kSweepCsvHeader) + "\n";
  for (const auto& r : reports) {
    std::vector<std::string> f;
    f.push_back(r.epsilon);
    f.push_back(r.attack_name);
    f.push_back(r.threshold_kind ? ToString(*r.threshold_kind) : "");
    f.push_back(r.delta_margin ? FormatDouble(r.delta_margin->alpha) : "");
    f.push_back(r.delta_margin ? FormatDouble(r.delta_margin->beta) : "");
    if (r.failed()) {
      f.insert(f.end(), {"", "", "", "failed", std::to_string(r.trial), "", "",
                         "", "", detail::CsvQuote(*r.error)});
    } else {
      f.push_back(detail::OptionalNumber(r.train_accuracy));
      f.push_back(FormatDouble(r.success_ratio));
      f.push_back(FormatDouble(r.p_value));
      f.push_back(ToString(r.verdict));
      f.push_back(std::to_string(r.trial));
      f.push_back(std::to_string(r.n));
      f.push_back(std::to_string(r.correct));
      f.push_back(detail::OptionalNumber(r.keep_fraction));
      f.push_back(detail::OptionalNumber(r.sr_post_rr));
      f.push_back("");
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) out += ',';
      out += f[i];
    }
    out += '\n';
  }
  return out;
}

}  // namespace labaudit

#endif  // LABAUDIT_HARNESS_HPP_
