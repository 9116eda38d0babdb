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

// Randomized response over binary labels: each label is kept with
// probability p = e^eps / (1 + e^eps) and flipped otherwise.

#ifndef LABAUDIT_PRIVACY_HPP_
#define LABAUDIT_PRIVACY_HPP_

#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "labaudit/error.hpp"
#include "labaudit/io.hpp"
#include "labaudit/random.hpp"

namespace labaudit {

// A non-negative epsilon, or infinity (no randomization).
class PrivacyBudget {
 public:
  static PrivacyBudget Infinite() {
    return PrivacyBudget(std::numeric_limits<double>::infinity());
  }

  static PrivacyBudget Of(double epsilon) {
    if (std::isnan(epsilon) || epsilon < 0.0) {
      throw InvalidArgument("epsilon must be >= 0 or inf, got " +
                            FormatDouble(epsilon));
    }
    return PrivacyBudget(epsilon);
  }

  // Accepts "inf", "Infinity" (any case) or a decimal number.
  static PrivacyBudget Parse(std::string_view text) {
    std::string lower(text);
    for (char& c : lower) c = static_cast<char>(std::tolower(c));
    if (lower == "inf" || lower == "infinity") return Infinite();
    double value = 0.0;
    if (!ParseDouble(text, value)) {
      throw InvalidArgument("cannot parse epsilon '" + std::string(text) + "'");
    }
    return Of(value);
  }

  double epsilon() const { return epsilon_; }
  bool is_infinite() const { return std::isinf(epsilon_); }

  // Canonical form used in reports, CSV and seed derivation.
  std::string ToString() const {
    return is_infinite() ? "inf" : FormatDouble(epsilon_);
  }

  friend bool operator==(PrivacyBudget, PrivacyBudget) = default;
  friend auto operator<=>(PrivacyBudget a, PrivacyBudget b) {
    return a.epsilon_ <=> b.epsilon_;
  }

 private:
  explicit PrivacyBudget(double epsilon) : epsilon_(epsilon) {}
  double epsilon_;
};

// e^eps / (1 + e^eps), evaluated as 1 / (1 + e^-eps); exactly 1 for inf.
inline double KeepProbability(PrivacyBudget budget) {
  if (budget.is_infinite()) return 1.0;
  return 1.0 / (1.0 + std::exp(-budget.epsilon()));
}

// Position i is flipped iff the i-th uniform draw u_i satisfies u_i >= p.
// The draw sequence does not depend on the label values.
inline std::vector<int> RandomizedResponse(const std::vector<int>& labels,
                                           PrivacyBudget budget,
                                           std::uint64_t seed) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw InvalidArgument("randomized response: label at position " +
                            std::to_string(i) + " is not binary");
    }
  }
  if (budget.is_infinite()) return labels;
  const double keep = KeepProbability(budget);
  Rng rng(seed);
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double u = rng.Uniform();
    out[i] = u >= keep ? 1 - labels[i] : labels[i];
  }
  return out;
}

}  // namespace labaudit

#endif  // LABAUDIT_PRIVACY_HPP_
