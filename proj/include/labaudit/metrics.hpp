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

// Success ratio of an inference against the canary labels, the exact
// one-sided binomial test against chance (p = 1/2), and the audit verdict.

#ifndef LABAUDIT_METRICS_HPP_
#define LABAUDIT_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "labaudit/attacks.hpp"
#include "labaudit/dataset.hpp"
#include "labaudit/error.hpp"

namespace labaudit {

inline constexpr double kDefaultSignificance = 0.01;

struct SuccessCount {
  std::size_t correct = 0;
  std::size_t n = 0;
  double ratio = 0.0;
};

// Fraction of inferred labels equal to their target. The id sets must match
// exactly.
inline SuccessCount SuccessRatio(const InferenceResult& result,
                                 const std::map<ExampleId, int>& targets) {
  std::set<ExampleId> inferred_ids;
  std::size_t correct = 0;
  std::vector<ExampleId> extra;
  for (const LabelGuess& g : result.inferred) {
    if (!inferred_ids.insert(g.id).second) {
      throw InvalidArgument("inference contains duplicate id " +
                            std::to_string(g.id));
    }
    auto it = targets.find(g.id);
    if (it == targets.end()) {
      extra.push_back(g.id);
    } else if (it->second == g.label) {
      ++correct;
    }
  }
  std::vector<ExampleId> missing;
  for (const auto& [id, label] : targets) {
    if (!inferred_ids.count(id)) missing.push_back(id);
  }
  if (!extra.empty() || !missing.empty()) {
    std::string msg = "inferred ids differ from target ids;";
    auto list = [&](const char* what, const std::vector<ExampleId>& ids) {
      if (ids.empty()) return;
      msg += std::string(" ") + what + ":";
      for (ExampleId id : ids) msg += " " + std::to_string(id);
    };
    list("not in targets", extra);
    list("not inferred", missing);
    throw InvalidArgument(msg);
  }
  if (targets.empty()) throw InvalidArgument("success ratio over no labels");
  SuccessCount out;
  out.correct = correct;
  out.n = targets.size();
  out.ratio = static_cast<double>(correct) / static_cast<double>(out.n);
  return out;
}

// P[X >= correct] for X ~ Binomial(n, 1/2), summed in log space. Terms past
// the mode that fall below e^-60 of the running maximum are dropped; the
// remaining tail is geometrically smaller.
inline double BinomialPValue(std::size_t correct, std::size_t n) {
  if (n < 1) throw InvalidArgument("binomial test needs n >= 1");
  if (correct > n) {
    throw InvalidArgument("correct (" + std::to_string(correct) +
                          ") exceeds n (" + std::to_string(n) + ")");
  }
  if (correct == 0) return 1.0;
  const double dn = static_cast<double>(n);
  const double log_half_n = dn * std::log(0.5);
  const double lg_n1 = std::lgamma(dn + 1.0);
  auto log_term = [&](std::size_t k) {
    const double dk = static_cast<double>(k);
    return lg_n1 - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0) +
           log_half_n;
  };
  // The largest term of the tail is at max(correct, mode).
  const std::size_t peak = std::max(correct, n / 2);
  const double anchor = log_term(peak);
  double sum = 0.0;
  for (std::size_t k = correct; k <= n; ++k) {
    const double rel = log_term(k) - anchor;
    if (k > peak && rel < -60.0) break;
    sum += std::exp(rel);
  }
  const double log_p = anchor + std::log(sum);
  return std::clamp(std::exp(log_p), 0.0, 1.0);
}

enum class Verdict { kMemorizing, kInconclusive };

inline std::string ToString(Verdict v) {
  return v == Verdict::kMemorizing ? "memorizing" : "inconclusive";
}

// Attack failure never certifies the absence of memorization, so there is
// no "not memorizing" outcome.
inline Verdict DecideVerdict(double p_value,
                             double significance = kDefaultSignificance) {
  return p_value < significance ? Verdict::kMemorizing : Verdict::kInconclusive;
}

// One row of an audit: one attack configuration on one (epsilon, trial)
// cell. Failed cells carry `error` and leave the statistics unset.
struct AuditReport {
  std::string attack_name;
  std::optional<ThresholdKind> threshold_kind;
  std::optional<DeltaMarginConfig> delta_margin;
  std::string epsilon = "inf";
  int trial = 0;

  std::size_t n = 0;
  std::size_t correct = 0;
  double success_ratio = 0.0;
  double p_value = 1.0;
  Verdict verdict = Verdict::kInconclusive;
  double significance = kDefaultSignificance;

  std::optional<double> train_accuracy;
  std::optional<double> sr_post_rr;     // SR against post-RR canary labels
  std::optional<double> keep_fraction;  // share of labels RR left unchanged

  std::optional<std::string> error;
  nlohmann::ordered_json provenance = nlohmann::ordered_json::object();

  bool failed() const { return error.has_value(); }
};

inline void SetAttack(AuditReport& report, const AttackConfig& config) {
  report.attack_name = AttackName(config);
  if (const auto* t = std::get_if<ThresholdConfig>(&config)) {
    report.threshold_kind = t->kind;
  } else {
    report.delta_margin = std::get<DeltaMarginConfig>(config);
  }
}

// Scores an inference against `targets` and fills the statistical fields.
inline AuditReport ScoreInference(const InferenceResult& inferred,
                                  const std::map<ExampleId, int>& targets,
                                  double significance = kDefaultSignificance) {
  if (!(significance > 0.0 && significance < 1.0)) {
    throw InvalidArgument("significance must be in (0, 1)");
  }
  AuditReport report;
  SetAttack(report, inferred.config);
  const SuccessCount sc = SuccessRatio(inferred, targets);
  report.n = sc.n;
  report.correct = sc.correct;
  report.success_ratio = sc.ratio;
  report.p_value = BinomialPValue(sc.correct, sc.n);
  report.significance = significance;
  report.verdict = DecideVerdict(report.p_value, significance);
  return report;
}

inline AuditReport AuditAttack(const std::vector<PredictionRecord>& records,
                               const std::map<ExampleId, int>& targets,
                               const AttackConfig& config,
                               double significance = kDefaultSignificance) {
  return ScoreInference(RunAttack(records, config), targets, significance);
}

inline nlohmann::ordered_json AuditReportToJson(const AuditReport& r) {
  nlohmann::ordered_json j;
  j["epsilon"] = r.epsilon;
  j["trial"] = r.trial;
  j["attack"] = r.attack_name;
  if (r.threshold_kind) j["threshold_kind"] = ToString(*r.threshold_kind);
  if (r.delta_margin) {
    j["alpha"] = r.delta_margin->alpha;
    j["beta"] = r.delta_margin->beta;
  }
  if (r.failed()) {
    j["status"] = "failed";
    j["error"] = *r.error;
  } else {
    j["status"] = "ok";
    j["n"] = r.n;
    j["correct"] = r.correct;
    j["success_ratio"] = r.success_ratio;
    j["p_value"] = r.p_value;
    j["significance"] = r.significance;
    j["verdict"] = ToString(r.verdict);
    if (r.train_accuracy) j["train_accuracy"] = *r.train_accuracy;
    if (r.sr_post_rr) j["sr_post_rr"] = *r.sr_post_rr;
    if (r.keep_fraction) j["keep_fraction"] = *r.keep_fraction;
  }
  j["provenance"] = r.provenance;
  return j;
}

}  // namespace labaudit

#endif  // LABAUDIT_METRICS_HPP_
