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

#include "labaudit/dataset.hpp"

#include <cmath>
#include <map>
#include <string>

#include <gtest/gtest.h>

namespace labaudit {
namespace {

Dataset Tiny(std::vector<int> labels) {
  std::vector<Example> ex;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ex.push_back({static_cast<ExampleId>(i), {static_cast<double>(i), -1.5},
                  labels[i]});
  }
  return Dataset(2, std::move(ex));
}

TEST(DatasetTest, ConstructorRejectsInvalidRows) {
  EXPECT_THROW(Dataset(2, {{0, {1.0, 2.0}, 2}}), InvalidArgument);
  EXPECT_THROW(Dataset(2, {{0, {1.0}, 0}}), InvalidArgument);
  EXPECT_THROW(Dataset(2, {{0, {1.0, NAN}, 0}}), InvalidArgument);
  EXPECT_THROW(Dataset(2, {{0, {1.0, 2.0}, 0}, {0, {1.0, 2.0}, 1}}),
               InvalidArgument);
  EXPECT_THROW(Dataset(2, {{-3, {1.0, 2.0}, 0}}), InvalidArgument);
}

TEST(DatasetCsvTest, ParsesThreeRows) {
  const Dataset d = ParseDatasetCsv(
      "id,label,f0,f1\n10,0,0.5,1\n11,1,-2,3e-2\n12,1,0,0\n");
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.feature_dim(), 2u);
  EXPECT_EQ(d.labels(), (std::vector<int>{0, 1, 1}));
  EXPECT_EQ(d[1].id, 11);
  EXPECT_DOUBLE_EQ(d[1].features[1], 0.03);
}

TEST(DatasetCsvTest, NonBinaryLabelCitesLine) {
  try {
    ParseDatasetCsv("id,label,f0\n1,0,1\n2,1,1\n3,2,1\n", "data.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("data.csv:4"), std::string::npos);
  }
}

TEST(DatasetCsvTest, HeaderOnlyGivesEmptyDataset) {
  const Dataset d = ParseDatasetCsv("id,label,f0,f1,f2\n");
  EXPECT_TRUE(d.empty());
  EXPECT_EQ(d.feature_dim(), 3u);
}

TEST(DatasetCsvTest, RejectsMalformedInput) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      ParseDatasetCsv(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("id,label,f0\n1,0,1\n2,1\n"), 3u);         // column count
  EXPECT_EQ(line_of("id,label,f0\n1,0,1\n1,1,2\n"), 3u);       // duplicate id
  EXPECT_EQ(line_of("id,label,f0\n1,0,abc\n"), 2u);            // bad number
  EXPECT_EQ(line_of("id,label,f0\n1,0,inf\n"), 2u);            // non-finite
  EXPECT_EQ(line_of("id,label,f0\nx,0,1\n"), 2u);              // bad id
  EXPECT_EQ(line_of("label,id,f0\n"), 1u);                     // header
  EXPECT_EQ(line_of("id,label,f1\n"), 1u);                     // feature name
}

TEST(DatasetCsvTest, WriteThenParseIsLossless) {
  const Dataset d = SynthesizeDataset(50, 3, 1.7, 99);
  EXPECT_EQ(ParseDatasetCsv(DatasetToCsv(d)), d);
}

TEST(SynthesizeTest, DeterministicAndByteIdentical) {
  const Dataset a = SynthesizeDataset(100, 2, 6.0, 7);
  const Dataset b = SynthesizeDataset(100, 2, 6.0, 7);
  EXPECT_EQ(DatasetToCsv(a), DatasetToCsv(b));
  EXPECT_NE(DatasetToCsv(a), DatasetToCsv(SynthesizeDataset(100, 2, 6.0, 8)));
}

TEST(SynthesizeTest, ClusterMeansFollowSeparation) {
  const Dataset d = SynthesizeDataset(20000, 2, 4.0, 1);
  double sum[2] = {0, 0};
  double count[2] = {0, 0};
  for (const Example& ex : d.examples()) {
    sum[ex.label] += ex.features[0];
    count[ex.label] += 1;
  }
  // Mean error sd is 1/sqrt(10000) = 0.01.
  EXPECT_NEAR(sum[0] / count[0], -2.0, 0.05);
  EXPECT_NEAR(sum[1] / count[1], 2.0, 0.05);
  EXPECT_NEAR(count[1] / d.size(), 0.5, 0.015);
}

TEST(SynthesizeTest, ZeroSeparationGivesIdenticalClusters) {
  const Dataset d = SynthesizeDataset(20000, 1, 0.0, 2);
  double sum[2] = {0, 0};
  double count[2] = {0, 0};
  for (const Example& ex : d.examples()) {
    sum[ex.label] += ex.features[0];
    count[ex.label] += 1;
  }
  EXPECT_NEAR(sum[0] / count[0], sum[1] / count[1], 0.07);
}

TEST(SynthesizeTest, RejectsDegenerateShapes) {
  EXPECT_THROW(SynthesizeDataset(1, 2, 1.0, 0), InvalidArgument);
  EXPECT_THROW(SynthesizeDataset(10, 0, 1.0, 0), InvalidArgument);
  EXPECT_THROW(SynthesizeDataset(10, 2, -1.0, 0), InvalidArgument);
}

TEST(CanaryTest, CountsMatchBenchmarkTable) {
  EXPECT_EQ(CanaryCount(26048, 0.02), 520u);
  EXPECT_EQ(CanaryCount(25000, 0.02), 500u);
  EXPECT_EQ(CanaryCount(60000, 0.02), 1200u);
  EXPECT_EQ(CanaryCount(50000, 0.02), 1000u);
  EXPECT_EQ(CanaryCount(150908, 0.02), 3018u);
  EXPECT_EQ(CanaryCount(10, 0.02), 1u);
  EXPECT_EQ(CanaryCount(100, 0.29), 29u);
  EXPECT_EQ(CanaryCount(7, 1.0), 7u);
}

TEST(CanaryTest, SelectsRequestedCountOfDistinctKnownIds) {
  const Dataset d = SynthesizeDataset(26048, 1, 1.0, 3);
  const CanaryPlan plan = SelectCanaries(d, 0.02, 11);
  ASSERT_EQ(plan.size(), 520u);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    EXPECT_TRUE(d.contains(plan.entries[i].id));
    EXPECT_EQ(plan.entries[i].original, d[d.index_of(plan.entries[i].id)].label);
    if (i > 0) {
      EXPECT_LT(plan.entries[i - 1].id, plan.entries[i].id);
    }
  }
  EXPECT_EQ(plan.original_labels().size(), 520u);
  EXPECT_EQ(plan.canary_labels().size(), 520u);
}

TEST(CanaryTest, RoughlyHalfOfCanariesAreFlipped) {
  const Dataset d = SynthesizeDataset(10000, 1, 1.0, 5);
  const CanaryPlan plan = SelectCanaries(d, 1.0, 17);
  ASSERT_EQ(plan.size(), 10000u);
  const double frac = static_cast<double>(plan.flipped_count()) / plan.size();
  EXPECT_GE(frac, 0.47);
  EXPECT_LE(frac, 0.53);
}

TEST(CanaryTest, DeterministicInSeed) {
  const Dataset d = SynthesizeDataset(1000, 2, 1.0, 5);
  EXPECT_EQ(SelectCanaries(d, 0.05, 1), SelectCanaries(d, 0.05, 1));
  EXPECT_NE(SelectCanaries(d, 0.05, 1).ids(), SelectCanaries(d, 0.05, 2).ids());
}

TEST(CanaryTest, InclusionFrequencyIsUniform) {
  // 10,000 plans over 50 ids at rate 0.1 (5 canaries each). Per-id inclusion
  // count ~ Binomial(10000, 0.1): mean 1000, sd 30; 3 sigma band = +-90.
  const Dataset d = SynthesizeDataset(50, 1, 1.0, 5);
  std::map<ExampleId, int> hits;
  for (int s = 0; s < 10000; ++s) {
    for (ExampleId id : SelectCanaries(d, 0.1, s).ids()) ++hits[id];
  }
  for (ExampleId id = 0; id < 50; ++id) {
    EXPECT_NEAR(hits[id], 1000, 90) << "id " << id;
  }
}

TEST(CanaryTest, RejectsBadArguments) {
  const Dataset d = Tiny({0, 1});
  EXPECT_THROW(SelectCanaries(d, 0.0, 1), InvalidArgument);
  EXPECT_THROW(SelectCanaries(d, 1.5, 1), InvalidArgument);
  EXPECT_THROW(SelectCanaries(Dataset(1, {}), 0.5, 1), InvalidArgument);
}

TEST(ApplyCanariesTest, IdentityPlanLeavesDataUnchanged) {
  const Dataset d = Tiny({0, 1, 1, 0});
  CanaryPlan plan{0.5, 0, {{1, 1, 1}, {3, 0, 0}}};
  EXPECT_EQ(ApplyCanaries(d, plan), d);
}

TEST(ApplyCanariesTest, ChangesOnlyThePlannedLabel) {
  const Dataset d = Tiny({0, 1, 1, 0, 1, 1, 0});
  CanaryPlan plan{0.1, 0, {{5, 1, 0}}};
  const Dataset out = ApplyCanaries(d, plan);
  std::vector<int> expected = d.labels();
  expected[5] = 0;
  EXPECT_EQ(out.labels(), expected);
  EXPECT_EQ(d[5].label, 1);  // input untouched
}

TEST(ApplyCanariesTest, DiffersOnAtMostPlanSizeAndInverseRestores) {
  const Dataset d = SynthesizeDataset(500, 2, 1.0, 9);
  for (int seed = 0; seed < 20; ++seed) {
    const CanaryPlan plan = SelectCanaries(d, 0.1, seed);
    const Dataset out = ApplyCanaries(d, plan);
    std::size_t diff = 0;
    for (std::size_t i = 0; i < d.size(); ++i) diff += d[i].label != out[i].label;
    EXPECT_LE(diff, plan.size());
    EXPECT_EQ(diff, plan.flipped_count());
    EXPECT_EQ(ApplyCanaries(out, plan.Inverse()), d);
  }
}

TEST(ApplyCanariesTest, UnknownIdIsNamed) {
  const Dataset d = Tiny({0, 1});
  CanaryPlan plan{0.5, 0, {{42, 0, 1}}};
  try {
    ApplyCanaries(d, plan);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("42"), std::string::npos);
  }
}

TEST(CanaryPlanJsonTest, RoundTripsAndValidates) {
  const Dataset d = SynthesizeDataset(300, 2, 1.0, 9);
  const CanaryPlan plan = SelectCanaries(d, 0.1, -5);
  const auto j = CanaryPlanToJson(plan);
  EXPECT_EQ(CanaryPlanFromJson(nlohmann::json::parse(j.dump())), plan);
  EXPECT_TRUE(j.contains("flip_rate"));
  EXPECT_TRUE(j["canaries"][0].contains("original"));

  auto bad = nlohmann::json::parse(j.dump());
  bad["canaries"][0]["canary"] = 3;
  EXPECT_THROW(CanaryPlanFromJson(bad), ParseError);
  bad = nlohmann::json::parse(j.dump());
  bad.erase("seed");
  EXPECT_THROW(CanaryPlanFromJson(bad), ParseError);
  bad = nlohmann::json::parse(j.dump());
  bad["canaries"].push_back(bad["canaries"][0]);
  EXPECT_THROW(CanaryPlanFromJson(bad), ParseError);
}

}  // namespace
}  // namespace labaudit
