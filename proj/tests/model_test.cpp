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

#include "labaudit/model.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace {
// Regression oracle: exact train accuracy of the overfit run below, recorded
// from the first passing build.
constexpr double kMemorizationOracleAccuracy = 1.0;
}  // namespace

namespace labaudit {
namespace {

ModelSpec Mlp(int hidden, int epochs, double lr, int batch, std::int64_t seed) {
  ModelSpec s;
  s.kind = ModelKind::kMlp;
  s.hidden_units = hidden;
  s.epochs = epochs;
  s.learning_rate = lr;
  s.batch_size = batch;
  s.seed = seed;
  return s;
}

double RelativeError(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nb), 1e-12);
}

void CheckGradients(const ModelSpec& spec) {
  const Dataset data = SynthesizeDataset(10, 3, 1.0, 21);
  const std::vector<int> labels = data.labels();
  Rng rng(99);
  for (int point = 0; point < 20; ++point) {
    std::vector<double> params(ParameterCount(spec, data.feature_dim()));
    for (double& p : params) p = rng.UniformIn(-1.5, 1.5);
    const auto analytic = ObjectiveGradient(spec, params, data, labels);
    const auto numeric = oracle::NumericGradient(
        [&](const std::vector<double>& x) { return Objective(spec, x, data, labels); },
        params, 1e-5);
    EXPECT_LT(RelativeError(analytic, numeric), 1e-4) << "point " << point;
  }
}

TEST(GradientTest, LogRegMatchesFiniteDifferences) {
  ModelSpec spec;
  spec.l2 = 0.3;
  CheckGradients(spec);
}

TEST(GradientTest, MlpMatchesFiniteDifferences) {
  ModelSpec spec = Mlp(5, 1, 0.1, 4, 0);
  spec.l2 = 0.05;
  CheckGradients(spec);
}

TEST(GradientTest, PenaltyExcludesBiases) {
  ModelSpec spec;
  spec.l2 = 1.0;
  const Dataset data = SynthesizeDataset(4, 2, 1.0, 1);
  std::vector<double> params = {0.0, 0.0, 5.0};  // only the bias is non-zero
  const auto g = ObjectiveGradient(spec, params, data, data.labels());
  ModelSpec plain = spec;
  plain.l2 = 0.0;
  EXPECT_EQ(g, ObjectiveGradient(plain, params, data, data.labels()));
}

TEST(TrainTest, LogRegSeparatesWideClusters) {
  // Reference: an unregularized scikit-learn LogisticRegression fit on this
  // exact file (SynthesizeDataset(100, 2, 6, 7)) reaches train accuracy 1.0.
  const Dataset data = SynthesizeDataset(100, 2, 6.0, 7);
  ModelSpec spec;
  spec.epochs = 200;
  const TrainedModel model = Train(data, data.labels(), spec);
  const auto records = Predict(model, data, data.labels());
  EXPECT_GT(TrainAccuracy(records, data.labels()), 0.95);
}

TEST(TrainTest, MlpMemorizesCoinFlipLabels) {
  const Dataset data = SynthesizeDataset(500, 10, 0.0, 13);
  Rng coin(4);
  std::vector<int> labels(data.size());
  for (int& y : labels) y = coin.FairBit() ? 1 : 0;
  const TrainedModel model = Train(data, labels, Mlp(64, 300, 0.2, 16, 5));
  const double acc = TrainAccuracy(Predict(model, data, labels), labels);
  EXPECT_GT(acc, 0.9);
  EXPECT_DOUBLE_EQ(acc, kMemorizationOracleAccuracy);
}

TEST(TrainTest, SingleEpochSmoke) {
  const Dataset data = SynthesizeDataset(30, 2, 1.0, 7);
  ModelSpec spec = Mlp(4, 1, 0.1, 8, 1);
  const TrainedModel model = Train(data, data.labels(), spec);
  EXPECT_EQ(model.parameters.size(), ParameterCount(spec, 2));
  for (double p : model.parameters) EXPECT_TRUE(std::isfinite(p));
}

TEST(TrainTest, RejectsInvalidSpecsAndInputs) {
  const Dataset data = SynthesizeDataset(30, 2, 1.0, 7);
  ModelSpec spec;
  spec.epochs = 0;
  EXPECT_THROW(Train(data, data.labels(), spec), InvalidArgument);
  spec = ModelSpec{};
  spec.batch_size = 0;
  EXPECT_THROW(Train(data, data.labels(), spec), InvalidArgument);
  spec = Mlp(0, 1, 0.1, 1, 0);
  EXPECT_THROW(Train(data, data.labels(), spec), InvalidArgument);
  EXPECT_THROW(Train(data, {0, 1}, ModelSpec{}), InvalidArgument);
  EXPECT_THROW(Train(Dataset(2, {}), {}, ModelSpec{}), InvalidArgument);
}

TEST(TrainTest, BitIdenticalForSameInputs) {
  const Dataset data = SynthesizeDataset(200, 4, 1.0, 7);
  const ModelSpec spec = Mlp(8, 5, 0.1, 16, 42);
  EXPECT_EQ(Train(data, data.labels(), spec).parameters,
            Train(data, data.labels(), spec).parameters);
  ModelSpec other = spec;
  other.seed = 43;
  EXPECT_NE(Train(data, data.labels(), spec).parameters,
            Train(data, data.labels(), other).parameters);
}

TEST(TrainTest, DivergenceReportsEpoch) {
  const Dataset data = SynthesizeDataset(50, 2, 4.0, 7);
  ModelSpec spec;
  spec.epochs = 3;
  spec.batch_size = 50;
  spec.learning_rate = 1e308;
  try {
    Train(data, data.labels(), spec);
    FAIL() << "expected divergence";
  } catch (const TrainingDiverged& e) {
    EXPECT_GE(e.epoch(), 1);
    EXPECT_LE(e.epoch(), 3);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(TrainTest, ZeroLearningRateKeepsInitialParameters) {
  const Dataset data = SynthesizeDataset(50, 2, 4.0, 7);
  ModelSpec spec;
  spec.learning_rate = 0.0;
  const auto model = Train(data, data.labels(), spec);
  for (double p : model.parameters) EXPECT_EQ(p, 0.0);
  for (const auto& r : Predict(model, data, data.labels())) {
    EXPECT_EQ(r.prob1, 0.5);
  }
}

TEST(PredictTest, CrossEntropyHandValues) {
  EXPECT_NEAR(CrossEntropy(0.8), 0.2231435513142097, 1e-15);
  EXPECT_NEAR(CrossEntropy(0.5), std::log(2.0), 1e-15);
  EXPECT_EQ(CrossEntropy(0.0), -std::log(1e-12));
  EXPECT_NEAR(CrossEntropy(1.0), 1e-12, 1e-16);
}

TEST(PredictTest, RecordsAreNormalizedAndLossConsistent) {
  const Dataset data = SynthesizeDataset(300, 3, 3.0, 7);
  Rng coin(1);
  std::vector<int> labels(data.size());
  for (int& y : labels) y = coin.FairBit() ? 1 : 0;
  for (const ModelSpec& spec : {ModelSpec{}, Mlp(16, 40, 0.3, 8, 2)}) {
    const auto model = Train(data, labels, spec);
    const auto records = Predict(model, data, labels);
    ASSERT_EQ(records.size(), data.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      EXPECT_EQ(r.id, data[i].id);
      EXPECT_LE(std::abs(r.prob0 + r.prob1 - 1.0), 1e-9);
      EXPECT_GE(r.prob1, 0.0);
      EXPECT_LE(r.prob1, 1.0);
      const double p = std::clamp(labels[i] ? r.prob1 : r.prob0, 1e-12, 1 - 1e-12);
      EXPECT_NEAR(r.loss, -std::log(p), 1e-9);
    }
  }
}

TEST(PredictTest, DimensionMismatchRejected) {
  const Dataset data = SynthesizeDataset(20, 3, 1.0, 7);
  const auto model = Train(data, data.labels(), ModelSpec{});
  const Dataset other = SynthesizeDataset(20, 2, 1.0, 7);
  EXPECT_THROW(Predict(model, other, other.labels()), InvalidArgument);
}

TEST(TrainAccuracyTest, HandCases) {
  std::vector<PredictionRecord> all_confident(4, PredictionRecord{0, 0.1, 0.9, 0.1});
  EXPECT_EQ(TrainAccuracy(all_confident, {1, 1, 1, 1}), 1.0);
  std::vector<PredictionRecord> two = {{0, 0.4, 0.6, 0}, {1, 0.4, 0.6, 0}};
  EXPECT_EQ(TrainAccuracy(two, {1, 0}), 0.5);
  std::vector<PredictionRecord> tie = {{0, 0.5, 0.5, 0}};
  EXPECT_EQ(TrainAccuracy(tie, {1}), 1.0);
  EXPECT_EQ(TrainAccuracy(tie, {0}), 0.0);
  EXPECT_THROW(TrainAccuracy({}, {}), InvalidArgument);
}

TEST(PredictionDumpTest, ExportImportRoundTripPreservesOrder) {
  std::vector<PredictionRecord> records;
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const double p1 = rng.Uniform();
    records.push_back({static_cast<ExampleId>(999 - i), 1.0 - p1, p1,
                       CrossEntropy(i % 2 ? p1 : 1.0 - p1)});
  }
  EXPECT_EQ(ParsePredictionsJsonl(PredictionsToJsonl(records)), records);
}

TEST(PredictionDumpTest, SchemaViolationsCiteLine) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      ParsePredictionsJsonl(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  const std::string ok = "{\"id\":1,\"p0\":0.25,\"p1\":0.75,\"loss\":0.3}\n";
  EXPECT_EQ(line_of(ok + "{\"id\":2,\"p0\":0.4,\"p1\":0.5,\"loss\":0.3}\n"), 2u);
  EXPECT_EQ(line_of(ok + "{\"id\":2,\"p0\":0.5,\"p1\":0.5}\n"), 2u);
  EXPECT_EQ(line_of(ok + "{\"id\":2,\"p0\":0.5,\"p1\":0.5,\"loss\":-1}\n"), 2u);
  EXPECT_EQ(line_of(ok + "{\"id\":2,\"p0\":1.5,\"p1\":-0.5,\"loss\":1}\n"), 2u);
  EXPECT_EQ(line_of(ok + "not json\n"), 2u);
  EXPECT_EQ(line_of(ok + ok), 2u);  // duplicate id
  EXPECT_EQ(line_of(ok), 0u);
}

TEST(PredictionDumpTest, ExtraKeysTolerated) {
  const auto records = ParsePredictionsJsonl(
      "{\"id\":4,\"p0\":0.5,\"p1\":0.5,\"loss\":0.6931,\"note\":\"x\"}\n");
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].id, 4);
}

}  // namespace
}  // namespace labaudit
