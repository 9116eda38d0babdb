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

// Labeled binary-classification data, the canary plan that re-randomizes a
// subset of its labels, and the CSV / JSON formats for both.

#ifndef LABAUDIT_DATASET_HPP_
#define LABAUDIT_DATASET_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "labaudit/error.hpp"
#include "labaudit/io.hpp"
#include "labaudit/random.hpp"

namespace labaudit {

using ExampleId = std::int64_t;

inline bool IsBinaryLabel(int label) { return label == 0 || label == 1; }

struct Example {
  ExampleId id = 0;
  std::vector<double> features;
  int label = 0;

  friend bool operator==(const Example&, const Example&) = default;
};

// Immutable, validated collection of examples sharing one feature dimension.
class Dataset {
 public:
  Dataset(std::size_t feature_dim, std::vector<Example> examples)
      : feature_dim_(feature_dim), examples_(std::move(examples)) {
    if (feature_dim_ == 0) {
      throw InvalidArgument("dataset feature_dim must be positive");
    }
    index_.reserve(examples_.size());
    for (std::size_t i = 0; i < examples_.size(); ++i) {
      const Example& ex = examples_[i];
      if (ex.id < 0) {
        throw InvalidArgument("example id " + std::to_string(ex.id) +
                              " is negative");
      }
      if (!IsBinaryLabel(ex.label)) {
        throw InvalidArgument("example " + std::to_string(ex.id) +
                              " has non-binary label " +
                              std::to_string(ex.label));
      }
      if (ex.features.size() != feature_dim_) {
        throw InvalidArgument("example " + std::to_string(ex.id) + " has " +
                              std::to_string(ex.features.size()) +
                              " features, expected " +
                              std::to_string(feature_dim_));
      }
      for (double v : ex.features) {
        if (!std::isfinite(v)) {
          throw InvalidArgument("example " + std::to_string(ex.id) +
                                " has a non-finite feature");
        }
      }
      if (!index_.emplace(ex.id, i).second) {
        throw InvalidArgument("duplicate example id " + std::to_string(ex.id));
      }
    }
  }

  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  std::size_t feature_dim() const { return feature_dim_; }
  const std::vector<Example>& examples() const { return examples_; }
  const Example& operator[](std::size_t i) const { return examples_[i]; }

  bool contains(ExampleId id) const { return index_.count(id) != 0; }

  // Position of `id` in row order. Throws InvalidArgument if absent.
  std::size_t index_of(ExampleId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
      throw InvalidArgument("unknown example id " + std::to_string(id));
    }
    return it->second;
  }

  std::vector<int> labels() const {
    std::vector<int> out;
    out.reserve(examples_.size());
    for (const Example& ex : examples_) out.push_back(ex.label);
    return out;
  }

  // Same rows with labels replaced position-wise.
  Dataset WithLabels(const std::vector<int>& labels) const {
    if (labels.size() != examples_.size()) {
      throw InvalidArgument("label vector length " +
                            std::to_string(labels.size()) +
                            " does not match dataset size " +
                            std::to_string(examples_.size()));
    }
    std::vector<Example> copy = examples_;
    for (std::size_t i = 0; i < copy.size(); ++i) copy[i].label = labels[i];
    return Dataset(feature_dim_, std::move(copy));
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.feature_dim_ == b.feature_dim_ && a.examples_ == b.examples_;
  }

 private:
  std::size_t feature_dim_;
  std::vector<Example> examples_;
  std::unordered_map<ExampleId, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// CSV: header `id,label,f0,...,f{d-1}`, one row per example, LF endings.

inline Dataset ParseDatasetCsv(std::string_view text,
                               const std::string& source = "<csv>") {
  const std::vector<std::string_view> lines = SplitLines(text);
  if (lines.empty()) throw ParseError(source, 1, "missing header");

  const auto header = SplitFields(lines[0]);
  if (header.size() < 3 || header[0] != "id" || header[1] != "label") {
    throw ParseError(source, 1, "header must be id,label,f0,...");
  }
  const std::size_t dim = header.size() - 2;
  for (std::size_t j = 0; j < dim; ++j) {
    if (header[j + 2] != "f" + std::to_string(j)) {
      throw ParseError(source, 1,
                       "expected column f" + std::to_string(j) + ", got '" +
                           std::string(header[j + 2]) + "'");
    }
  }

  std::vector<Example> examples;
  std::set<ExampleId> seen;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    if (lines[li].empty() && li + 1 == lines.size()) break;
    const auto fields = SplitFields(lines[li]);
    if (fields.size() != header.size()) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(header.size()) +
                           " columns, got " + std::to_string(fields.size()));
    }
    Example ex;
    if (!ParseInt64(fields[0], ex.id) || ex.id < 0) {
      throw ParseError(source, line_no,
                       "invalid id '" + std::string(fields[0]) + "'");
    }
    if (fields[1] == "0") {
      ex.label = 0;
    } else if (fields[1] == "1") {
      ex.label = 1;
    } else {
      throw ParseError(source, line_no,
                       "label must be 0 or 1, got '" + std::string(fields[1]) +
                           "'");
    }
    ex.features.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      if (!ParseDouble(fields[j + 2], ex.features[j]) ||
          !std::isfinite(ex.features[j])) {
        throw ParseError(source, line_no,
                         "invalid value '" + std::string(fields[j + 2]) +
                             "' in column f" + std::to_string(j));
      }
    }
    if (!seen.insert(ex.id).second) {
      throw ParseError(source, line_no,
                       "duplicate id " + std::to_string(ex.id));
    }
    examples.push_back(std::move(ex));
  }
  return Dataset(dim, std::move(examples));
}

inline Dataset LoadDataset(const std::string& path) {
  return ParseDatasetCsv(ReadFile(path), path);
}

inline std::string DatasetToCsv(const Dataset& data) {
  std::string out = "id,label";
  for (std::size_t j = 0; j < data.feature_dim(); ++j) {
    out += ",f" + std::to_string(j);
  }
  out += '\n';
  for (const Example& ex : data.examples()) {
    out += std::to_string(ex.id);
    out += ex.label ? ",1" : ",0";
    for (double v : ex.features) {
      out += ',';
      out += FormatDouble(v);
    }
    out += '\n';
  }
  return out;
}

inline void SaveDataset(const Dataset& data, const std::string& path) {
  WriteFile(path, DatasetToCsv(data));
}

// Two unit-variance Gaussian clusters with means -s/2 (label 0) and +s/2
// (label 1) on every coordinate; each row's cluster is a fair coin. Ids are
// 0..n-1.
inline Dataset SynthesizeDataset(std::size_t n, std::size_t d,
                                 double separation, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("synthesize: n must be at least 2");
  if (d < 1) throw InvalidArgument("synthesize: d must be at least 1");
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw InvalidArgument("synthesize: separation must be finite and >= 0");
  }
  Rng rng(seed);
  std::vector<Example> examples(n);
  for (std::size_t i = 0; i < n; ++i) {
    Example& ex = examples[i];
    ex.id = static_cast<ExampleId>(i);
    ex.label = rng.FairBit() ? 1 : 0;
    const double mean = (ex.label ? 0.5 : -0.5) * separation;
    ex.features.resize(d);
    for (double& v : ex.features) v = mean + rng.Normal();
  }
  return Dataset(d, std::move(examples));
}

// ---------------------------------------------------------------------------
// Canary plans.

struct CanaryEntry {
  ExampleId id = 0;
  int original = 0;
  int canary = 0;

  friend bool operator==(const CanaryEntry&, const CanaryEntry&) = default;
};

// The subset D2 (entries, ascending id) with its original labels and the
// re-randomized canary labels that replace them in training.
struct CanaryPlan {
  double flip_rate = 0.0;
  std::int64_t seed = 0;
  std::vector<CanaryEntry> entries;

  std::size_t size() const { return entries.size(); }

  std::vector<ExampleId> ids() const {
    std::vector<ExampleId> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.id);
    return out;
  }

  std::map<ExampleId, int> original_labels() const {
    std::map<ExampleId, int> out;
    for (const auto& e : entries) out.emplace(e.id, e.original);
    return out;
  }

  std::map<ExampleId, int> canary_labels() const {
    std::map<ExampleId, int> out;
    for (const auto& e : entries) out.emplace(e.id, e.canary);
    return out;
  }

  // Swaps original and canary labels; applying the inverse after the plan
  // restores the original dataset.
  CanaryPlan Inverse() const {
    CanaryPlan inv = *this;
    for (auto& e : inv.entries) std::swap(e.original, e.canary);
    return inv;
  }

  std::size_t flipped_count() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(),
                      [](const CanaryEntry& e) { return e.original != e.canary; }));
  }

  friend bool operator==(const CanaryPlan&, const CanaryPlan&) = default;
};

// max(1, floor(flip_rate * m)); the 1e-9 slack absorbs representation error
// in products such as 0.29 * 100.
inline std::size_t CanaryCount(std::size_t m, double flip_rate) {
  const double raw = std::floor(flip_rate * static_cast<double>(m) + 1e-9);
  const auto k = static_cast<std::size_t>(std::max(1.0, raw));
  return std::min(k, m);
}

inline CanaryPlan SelectCanaries(const Dataset& data, double flip_rate,
                                 std::int64_t seed) {
  if (!(flip_rate > 0.0 && flip_rate <= 1.0)) {
    throw InvalidArgument("flip_rate must be in (0, 1], got " +
                          FormatDouble(flip_rate));
  }
  if (data.empty()) throw InvalidArgument("cannot select canaries: empty dataset");

  const std::size_t m = data.size();
  const std::size_t k = CanaryCount(m, flip_rate);
  Rng rng(static_cast<std::uint64_t>(seed));

  // Fisher-Yates prefix: positions [0, k) hold a uniform k-subset.
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.Below(m - i));
    std::swap(order[i], order[j]);
  }
  order.resize(k);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data[a].id < data[b].id;
  });

  CanaryPlan plan;
  plan.flip_rate = flip_rate;
  plan.seed = seed;
  plan.entries.reserve(k);
  for (std::size_t pos : order) {
    const Example& ex = data[pos];
    const bool keep = rng.FairBit();
    plan.entries.push_back({ex.id, ex.label, keep ? ex.label : 1 - ex.label});
  }
  return plan;
}

// D' = D1 u D2': labels at the plan's ids replaced by their canary labels.
inline Dataset ApplyCanaries(const Dataset& data, const CanaryPlan& plan) {
  std::vector<int> labels = data.labels();
  for (const CanaryEntry& e : plan.entries) {
    if (!data.contains(e.id)) {
      throw InvalidArgument("canary plan references unknown example id " +
                            std::to_string(e.id));
    }
    if (!IsBinaryLabel(e.canary)) {
      throw InvalidArgument("canary label for id " + std::to_string(e.id) +
                            " is not binary");
    }
    labels[data.index_of(e.id)] = e.canary;
  }
  return data.WithLabels(labels);
}

inline nlohmann::ordered_json CanaryPlanToJson(const CanaryPlan& plan) {
  nlohmann::ordered_json j;
  j["flip_rate"] = plan.flip_rate;
  j["seed"] = plan.seed;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : plan.entries) {
    arr.push_back({{"id", e.id}, {"original", e.original}, {"canary", e.canary}});
  }
  j["canaries"] = std::move(arr);
  return j;
}

inline CanaryPlan CanaryPlanFromJson(const nlohmann::json& j,
                                     const std::string& source = "<plan>") {
  auto fail = [&](const std::string& what) -> void {
    throw ParseError(source, 0, what);
  };
  if (!j.is_object()) fail("canary plan must be a JSON object");
  for (const char* key : {"flip_rate", "seed", "canaries"}) {
    if (!j.contains(key)) fail(std::string("missing key '") + key + "'");
  }
  CanaryPlan plan;
  if (!j["flip_rate"].is_number()) fail("flip_rate must be a number");
  if (!j["seed"].is_number_integer()) fail("seed must be an integer");
  if (!j["canaries"].is_array()) fail("canaries must be an array");
  plan.flip_rate = j["flip_rate"].get<double>();
  plan.seed = j["seed"].get<std::int64_t>();
  if (!(plan.flip_rate > 0.0 && plan.flip_rate <= 1.0)) {
    fail("flip_rate must be in (0, 1]");
  }
  std::set<ExampleId> seen;
  for (const auto& c : j["canaries"]) {
    if (!c.is_object() || !c.contains("id") || !c.contains("original") ||
        !c.contains("canary") || !c["id"].is_number_integer() ||
        !c["original"].is_number_integer() ||
        !c["canary"].is_number_integer()) {
      fail("each canary needs integer id, original and canary");
    }
    CanaryEntry e{c["id"].get<ExampleId>(), c["original"].get<int>(),
                  c["canary"].get<int>()};
    if (e.id < 0) fail("negative canary id " + std::to_string(e.id));
    if (!IsBinaryLabel(e.original) || !IsBinaryLabel(e.canary)) {
      fail("non-binary label for canary id " + std::to_string(e.id));
    }
    if (!seen.insert(e.id).second) {
      fail("duplicate canary id " + std::to_string(e.id));
    }
    plan.entries.push_back(e);
  }
  std::sort(plan.entries.begin(), plan.entries.end(),
            [](const CanaryEntry& a, const CanaryEntry& b) { return a.id < b.id; });
  return plan;
}

inline void SaveCanaryPlan(const CanaryPlan& plan, const std::string& path) {
  WriteFile(path, CanaryPlanToJson(plan).dump(2) + "\n");
}

inline CanaryPlan LoadCanaryPlan(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, 0, e.what());
  }
  return CanaryPlanFromJson(j, path);
}

}  // namespace labaudit

#endif  // LABAUDIT_DATASET_HPP_
