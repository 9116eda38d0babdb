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

// Passive label inference attacks. Both operate only on PredictionRecords of
// the attacked set and emit one inferred label per record, in input order.
//
//   threshold     c_i = prob1; tau = 0.5 | mean(c) | median(c);
//                 y_i = 1 iff c_i >= tau
//   delta-margin  m_i = prob1 - prob0; s_i = alpha * m_i - beta * loss_i;
//                 y_i = 1 iff s_i > 0

#ifndef LABAUDIT_ATTACKS_HPP_
#define LABAUDIT_ATTACKS_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "labaudit/dataset.hpp"
#include "labaudit/error.hpp"
#include "labaudit/io.hpp"
#include "labaudit/model.hpp"

namespace labaudit {

enum class ThresholdKind { kFixed, kMean, kMedian };

inline std::string ToString(ThresholdKind kind) {
  switch (kind) {
    case ThresholdKind::kFixed:
      return "fixed";
    case ThresholdKind::kMean:
      return "mean";
    case ThresholdKind::kMedian:
      return "median";
  }
  return "unknown";
}

inline ThresholdKind ParseThresholdKind(std::string_view text) {
  if (text == "fixed") return ThresholdKind::kFixed;
  if (text == "mean") return ThresholdKind::kMean;
  if (text == "median") return ThresholdKind::kMedian;
  throw InvalidArgument("unknown threshold kind '" + std::string(text) +
                        "' (expected fixed, mean or median)");
}

struct ThresholdConfig {
  ThresholdKind kind = ThresholdKind::kFixed;

  friend bool operator==(const ThresholdConfig&, const ThresholdConfig&) = default;
};

struct DeltaMarginConfig {
  double alpha = 1.0;
  double beta = 1.0;

  void Validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha) || !(beta > 0.0) ||
        !std::isfinite(beta)) {
      throw InvalidArgument("delta-margin requires finite alpha > 0, beta > 0");
    }
  }

  friend bool operator==(const DeltaMarginConfig&,
                         const DeltaMarginConfig&) = default;
};

using AttackConfig = std::variant<ThresholdConfig, DeltaMarginConfig>;

inline std::string AttackName(const AttackConfig& config) {
  return std::holds_alternative<ThresholdConfig>(config) ? "threshold"
                                                         : "delta_margin";
}

struct LabelGuess {
  ExampleId id = 0;
  int label = 0;

  friend bool operator==(const LabelGuess&, const LabelGuess&) = default;
};

struct InferenceResult {
  std::string attack_name;
  AttackConfig config;
  std::vector<LabelGuess> inferred;  // aligned with the input records
};

inline double ComputeThreshold(std::vector<double> scores,
                               const ThresholdConfig& config) {
  if (scores.empty()) throw InvalidArgument("threshold over no scores");
  switch (config.kind) {
    case ThresholdKind::kFixed:
      return 0.5;
    case ThresholdKind::kMean:
      return std::accumulate(scores.begin(), scores.end(), 0.0) /
             static_cast<double>(scores.size());
    case ThresholdKind::kMedian: {
      const std::size_t n = scores.size();
      const std::size_t mid = n / 2;
      std::nth_element(scores.begin(), scores.begin() + mid, scores.end());
      const double upper = scores[mid];
      if (n % 2 == 1) return upper;
      const double lower = *std::max_element(scores.begin(), scores.begin() + mid);
      return (lower + upper) / 2.0;
    }
  }
  throw InvalidArgument("unknown threshold kind");
}

inline InferenceResult ThresholdInfer(
    const std::vector<PredictionRecord>& records, const ThresholdConfig& config) {
  std::vector<double> scores;
  scores.reserve(records.size());
  for (const auto& r : records) scores.push_back(r.prob1);
  const double tau = ComputeThreshold(scores, config);

  InferenceResult result{"threshold", config, {}};
  result.inferred.reserve(records.size());
  for (const auto& r : records) {
    result.inferred.push_back({r.id, r.prob1 >= tau ? 1 : 0});
  }
  return result;
}

// Signed class-1 margin. With two classes this equals prob1 minus the second
// highest probability whenever prob1 is the larger one, and goes negative
// when class 0 wins.
inline double Margin(const PredictionRecord& record) {
  return record.prob1 - record.prob0;
}

inline double DeltaMarginScore(const PredictionRecord& record,
                               const DeltaMarginConfig& config) {
  return config.alpha * Margin(record) - config.beta * record.loss;
}

inline InferenceResult DeltaMarginInfer(
    const std::vector<PredictionRecord>& records,
    const DeltaMarginConfig& config) {
  config.Validate();
  if (records.empty()) throw InvalidArgument("delta-margin over no records");
  InferenceResult result{"delta_margin", config, {}};
  result.inferred.reserve(records.size());
  for (const auto& r : records) {
    if (!std::isfinite(r.loss)) {
      throw InvalidArgument("record " + std::to_string(r.id) +
                            " has a non-finite loss");
    }
    result.inferred.push_back({r.id, DeltaMarginScore(r, config) > 0.0 ? 1 : 0});
  }
  return result;
}

inline InferenceResult RunAttack(const std::vector<PredictionRecord>& records,
                                 const AttackConfig& config) {
  if (const auto* t = std::get_if<ThresholdConfig>(&config)) {
    return ThresholdInfer(records, *t);
  }
  return DeltaMarginInfer(records, std::get<DeltaMarginConfig>(config));
}

}  // namespace labaudit

#endif  // LABAUDIT_ATTACKS_HPP_
