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

// Desk-scale binary classifiers trained by mini-batch SGD, the per-example
// prediction records the attacks consume, and the JSON Lines dump format
// that lets externally trained models be audited.
//
// Both model kinds reduce to a single logit t with prob1 = sigmoid(t):
//   logreg  t = w.x + b                       params [w_0..w_{d-1}, b]
//   mlp     h = tanh(W1 x + b1), z = W2 h + b2, t = z_1 - z_0
//           params [W1 (H x d, row-major), b1 (H), W2 (2 x H), b2 (2)]
// The training objective is mean cross-entropy + l2/2 * |weights|^2, where
// the penalty excludes bias terms.

#ifndef LABAUDIT_MODEL_HPP_
#define LABAUDIT_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "labaudit/dataset.hpp"
#include "labaudit/error.hpp"
#include "labaudit/io.hpp"
#include "labaudit/random.hpp"

namespace labaudit {

enum class ModelKind { kLogReg, kMlp };

inline std::string ToString(ModelKind kind) {
  return kind == ModelKind::kLogReg ? "logreg" : "mlp";
}

inline ModelKind ParseModelKind(std::string_view text) {
  if (text == "logreg") return ModelKind::kLogReg;
  if (text == "mlp") return ModelKind::kMlp;
  throw InvalidArgument("unknown model kind '" + std::string(text) +
                        "' (expected logreg or mlp)");
}

struct ModelSpec {
  ModelKind kind = ModelKind::kLogReg;
  int hidden_units = 64;  // mlp only
  double l2 = 0.0;
  int epochs = 100;
  int batch_size = 32;
  // Zero is allowed: it freezes the initial parameters (a null model).
  double learning_rate = 0.1;
  std::int64_t seed = 0;

  void Validate() const {
    if (kind == ModelKind::kMlp && hidden_units < 1) {
      throw InvalidArgument("hidden_units must be positive");
    }
    if (!(l2 >= 0.0) || !std::isfinite(l2)) {
      throw InvalidArgument("l2 must be finite and non-negative");
    }
    if (epochs < 1) throw InvalidArgument("epochs must be at least 1");
    if (batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
      throw InvalidArgument("learning_rate must be finite and non-negative");
    }
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline nlohmann::ordered_json ModelSpecToJson(const ModelSpec& spec) {
  nlohmann::ordered_json j;
  j["kind"] = ToString(spec.kind);
  if (spec.kind == ModelKind::kMlp) j["hidden_units"] = spec.hidden_units;
  j["l2"] = spec.l2;
  j["epochs"] = spec.epochs;
  j["batch_size"] = spec.batch_size;
  j["learning_rate"] = spec.learning_rate;
  j["seed"] = spec.seed;
  return j;
}

inline std::size_t ParameterCount(const ModelSpec& spec,
                                  std::size_t feature_dim) {
  if (spec.kind == ModelKind::kLogReg) return feature_dim + 1;
  const auto h = static_cast<std::size_t>(spec.hidden_units);
  return h * feature_dim + h + 2 * h + 2;
}

struct TrainedModel {
  ModelSpec spec;
  std::vector<double> parameters;
  std::size_t feature_dim = 0;
};

inline nlohmann::ordered_json TrainedModelToJson(const TrainedModel& model) {
  nlohmann::ordered_json j;
  j["spec"] = ModelSpecToJson(model.spec);
  j["feature_dim"] = model.feature_dim;
  j["parameters"] = model.parameters;
  return j;
}

namespace detail {

inline double Sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + e^t) without overflow.
inline double Softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

// Forward/backward over a flat parameter vector. `hidden` is scratch space.
class Network {
 public:
  Network(const ModelSpec& spec, std::size_t dim)
      : kind_(spec.kind),
        dim_(dim),
        hidden_(spec.kind == ModelKind::kMlp
                    ? static_cast<std::size_t>(spec.hidden_units)
                    : 0),
        activations_(hidden_) {}

  // Logit t for one example; caches hidden activations for Backward.
  double Forward(std::span<const double> params, std::span<const double> x) {
    if (kind_ == ModelKind::kLogReg) {
      double t = params[dim_];
      for (std::size_t k = 0; k < dim_; ++k) t += params[k] * x[k];
      return t;
    }
    const double* w1 = params.data();
    const double* b1 = w1 + hidden_ * dim_;
    const double* w2 = b1 + hidden_;
    const double* b2 = w2 + 2 * hidden_;
    double z0 = b2[0];
    double z1 = b2[1];
    for (std::size_t j = 0; j < hidden_; ++j) {
      const double* row = w1 + j * dim_;
      double a = b1[j];
      for (std::size_t k = 0; k < dim_; ++k) a += row[k] * x[k];
      const double h = std::tanh(a);
      activations_[j] = h;
      z0 += w2[j] * h;
      z1 += w2[hidden_ + j] * h;
    }
    return z1 - z0;
  }

  // Adds dloss_dt * dt/dparams to `grad` for the example most recently passed
  // to Forward.
  void Backward(std::span<const double> params, std::span<const double> x,
                double dloss_dt, std::span<double> grad) const {
    if (kind_ == ModelKind::kLogReg) {
      for (std::size_t k = 0; k < dim_; ++k) grad[k] += dloss_dt * x[k];
      grad[dim_] += dloss_dt;
      return;
    }
    const double* w2 = params.data() + hidden_ * dim_ + hidden_;
    double* gw1 = grad.data();
    double* gb1 = gw1 + hidden_ * dim_;
    double* gw2 = gb1 + hidden_;
    double* gb2 = gw2 + 2 * hidden_;
    gb2[0] -= dloss_dt;
    gb2[1] += dloss_dt;
    for (std::size_t j = 0; j < hidden_; ++j) {
      const double h = activations_[j];
      gw2[j] -= dloss_dt * h;
      gw2[hidden_ + j] += dloss_dt * h;
      const double da = dloss_dt * (w2[hidden_ + j] - w2[j]) * (1.0 - h * h);
      double* row = gw1 + j * dim_;
      for (std::size_t k = 0; k < dim_; ++k) row[k] += da * x[k];
      gb1[j] += da;
    }
  }

  // Calls fn(index) for every weight (non-bias) parameter.
  template <typename Fn>
  void ForEachWeight(Fn&& fn) const {
    if (kind_ == ModelKind::kLogReg) {
      for (std::size_t k = 0; k < dim_; ++k) fn(k);
      return;
    }
    for (std::size_t i = 0; i < hidden_ * dim_; ++i) fn(i);
    const std::size_t w2 = hidden_ * dim_ + hidden_;
    for (std::size_t i = 0; i < 2 * hidden_; ++i) fn(w2 + i);
  }

 private:
  ModelKind kind_;
  std::size_t dim_;
  std::size_t hidden_;
  std::vector<double> activations_;
};

inline void CheckAligned(const Dataset& data, const std::vector<int>& labels) {
  if (labels.size() != data.size()) {
    throw InvalidArgument("training labels (" + std::to_string(labels.size()) +
                          ") not aligned with dataset (" +
                          std::to_string(data.size()) + ")");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!IsBinaryLabel(labels[i])) {
      throw InvalidArgument("training label at position " + std::to_string(i) +
                            " is not binary");
    }
  }
}

}  // namespace detail

inline std::vector<double> InitialParameters(const ModelSpec& spec,
                                             std::size_t feature_dim,
                                             Rng& rng) {
  std::vector<double> params(ParameterCount(spec, feature_dim), 0.0);
  if (spec.kind == ModelKind::kLogReg) return params;
  const auto h = static_cast<std::size_t>(spec.hidden_units);
  const double r1 = 1.0 / std::sqrt(static_cast<double>(feature_dim));
  const double r2 = 1.0 / std::sqrt(static_cast<double>(h));
  const std::size_t layer1 = h * feature_dim + h;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double r = i < layer1 ? r1 : r2;
    params[i] = rng.UniformIn(-r, r);
  }
  return params;
}

// Regularized mean cross-entropy over the whole dataset.
inline double Objective(const ModelSpec& spec, std::span<const double> params,
                        const Dataset& data, const std::vector<int>& labels) {
  detail::CheckAligned(data, labels);
  detail::Network net(spec, data.feature_dim());
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double t = net.Forward(params, data[i].features);
    total += detail::Softplus(t) - labels[i] * t;
  }
  double penalty = 0.0;
  net.ForEachWeight([&](std::size_t k) { penalty += params[k] * params[k]; });
  return total / static_cast<double>(data.size()) + 0.5 * spec.l2 * penalty;
}

inline std::vector<double> ObjectiveGradient(const ModelSpec& spec,
                                             std::span<const double> params,
                                             const Dataset& data,
                                             const std::vector<int>& labels) {
  detail::CheckAligned(data, labels);
  detail::Network net(spec, data.feature_dim());
  std::vector<double> grad(params.size(), 0.0);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double t = net.Forward(params, data[i].features);
    net.Backward(params, data[i].features,
                 scale * (detail::Sigmoid(t) - labels[i]), grad);
  }
  net.ForEachWeight([&](std::size_t k) { grad[k] += spec.l2 * params[k]; });
  return grad;
}

// Mini-batch SGD. Deterministic in (data, labels, spec): spec.seed drives
// initialization and the per-epoch shuffles. Throws TrainingDiverged with the
// 1-based epoch when the epoch loss or any parameter becomes non-finite.
inline TrainedModel Train(const Dataset& data,
                          const std::vector<int>& training_labels,
                          const ModelSpec& spec) {
  spec.Validate();
  if (data.empty()) throw InvalidArgument("cannot train on an empty dataset");
  detail::CheckAligned(data, training_labels);

  const std::size_t m = data.size();
  Rng rng(static_cast<std::uint64_t>(spec.seed));
  TrainedModel model{spec, InitialParameters(spec, data.feature_dim(), rng),
                     data.feature_dim()};
  std::vector<double>& params = model.parameters;
  std::vector<double> grad(params.size());
  detail::Network net(spec, data.feature_dim());

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(spec.batch_size);

  for (int epoch = 1; epoch <= spec.epochs; ++epoch) {
    for (std::size_t i = m; i > 1; --i) {
      std::swap(order[i - 1], order[rng.Below(i)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < m; start += batch) {
      const std::size_t stop = std::min(m, start + batch);
      const double scale = 1.0 / static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        const Example& ex = data[order[b]];
        const int y = training_labels[order[b]];
        const double t = net.Forward(params, ex.features);
        epoch_loss += detail::Softplus(t) - y * t;
        net.Backward(params, ex.features, scale * (detail::Sigmoid(t) - y),
                     grad);
      }
      net.ForEachWeight([&](std::size_t k) { grad[k] += spec.l2 * params[k]; });
      for (std::size_t k = 0; k < params.size(); ++k) {
        params[k] -= spec.learning_rate * grad[k];
      }
    }
    if (!std::isfinite(epoch_loss) ||
        !std::all_of(params.begin(), params.end(),
                     [](double v) { return std::isfinite(v); })) {
      throw TrainingDiverged(epoch);
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Predictions.

struct PredictionRecord {
  ExampleId id = 0;
  double prob0 = 0.5;
  double prob1 = 0.5;
  double loss = 0.0;  // cross-entropy against the training-time label

  friend bool operator==(const PredictionRecord&,
                         const PredictionRecord&) = default;
};

inline constexpr double kProbabilityClamp = 1e-12;

// -ln p for the probability p assigned to the training label, after clamping
// p to [1e-12, 1 - 1e-12].
inline double CrossEntropy(double prob_of_label) {
  return -std::log(
      std::clamp(prob_of_label, kProbabilityClamp, 1.0 - kProbabilityClamp));
}

inline std::vector<PredictionRecord> Predict(
    const TrainedModel& model, const Dataset& data,
    const std::vector<int>& training_labels) {
  if (data.feature_dim() != model.feature_dim) {
    throw InvalidArgument("model expects " + std::to_string(model.feature_dim) +
                          " features, dataset has " +
                          std::to_string(data.feature_dim()));
  }
  if (model.parameters.size() != ParameterCount(model.spec, model.feature_dim)) {
    throw InvalidArgument("model parameter count does not match its spec");
  }
  detail::CheckAligned(data, training_labels);
  detail::Network net(model.spec, model.feature_dim);
  std::vector<PredictionRecord> records;
  records.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double t = net.Forward(model.parameters, data[i].features);
    PredictionRecord r;
    r.id = data[i].id;
    r.prob1 = detail::Sigmoid(t);
    r.prob0 = detail::Sigmoid(-t);
    r.loss = CrossEntropy(training_labels[i] == 1 ? r.prob1 : r.prob0);
    records.push_back(r);
  }
  return records;
}

// Fraction of records whose argmax class equals the training label; a tie
// predicts class 1.
inline double TrainAccuracy(const std::vector<PredictionRecord>& records,
                            const std::vector<int>& training_labels) {
  if (records.empty()) throw InvalidArgument("train accuracy of no records");
  if (records.size() != training_labels.size()) {
    throw InvalidArgument("records and training labels differ in length");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const int predicted = records[i].prob1 >= records[i].prob0 ? 1 : 0;
    hits += predicted == training_labels[i];
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

// ---------------------------------------------------------------------------
// Prediction dump: JSON Lines, {"id": int, "p0": float, "p1": float,
// "loss": float} per line. Doubles are written in shortest round-trip form.

inline std::string PredictionsToJsonl(
    const std::vector<PredictionRecord>& records) {
  std::string out;
  for (const PredictionRecord& r : records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["p0"] = r.prob0;
    j["p1"] = r.prob1;
    j["loss"] = r.loss;
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline std::vector<PredictionRecord> ParsePredictionsJsonl(
    std::string_view text, const std::string& source = "<predictions>") {
  std::vector<PredictionRecord> records;
  std::set<ExampleId> seen;
  const auto lines = SplitLines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    if (lines[li].find_first_not_of(" \t\r") == std::string_view::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[li]);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(source, line_no, "expected an object");
    for (const char* key : {"id", "p0", "p1", "loss"}) {
      if (!j.contains(key)) {
        throw ParseError(source, line_no, std::string("missing key '") + key + "'");
      }
    }
    if (!j["id"].is_number_integer()) {
      throw ParseError(source, line_no, "id must be an integer");
    }
    for (const char* key : {"p0", "p1", "loss"}) {
      if (!j[key].is_number()) {
        throw ParseError(source, line_no, std::string(key) + " must be a number");
      }
    }
    PredictionRecord r{j["id"].get<ExampleId>(), j["p0"].get<double>(),
                       j["p1"].get<double>(), j["loss"].get<double>()};
    if (r.id < 0) throw ParseError(source, line_no, "negative id");
    if (!(r.prob0 >= 0.0 && r.prob0 <= 1.0 && r.prob1 >= 0.0 && r.prob1 <= 1.0)) {
      throw ParseError(source, line_no, "probabilities must lie in [0, 1]");
    }
    if (std::abs(r.prob0 + r.prob1 - 1.0) > 1e-9) {
      throw ParseError(source, line_no, "p0 + p1 must equal 1 (within 1e-9)");
    }
    if (!(r.loss >= 0.0) || !std::isfinite(r.loss)) {
      throw ParseError(source, line_no, "loss must be finite and non-negative");
    }
    if (!seen.insert(r.id).second) {
      throw ParseError(source, line_no, "duplicate id " + std::to_string(r.id));
    }
    records.push_back(r);
  }
  return records;
}

inline void ExportPredictions(const std::vector<PredictionRecord>& records,
                              const std::string& path) {
  WriteFile(path, PredictionsToJsonl(records));
}

inline std::vector<PredictionRecord> ImportPredictions(const std::string& path) {
  return ParsePredictionsJsonl(ReadFile(path), path);
}

}  // namespace labaudit

#endif  // LABAUDIT_MODEL_HPP_
