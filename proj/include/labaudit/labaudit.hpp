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

#ifndef LABAUDIT_LABAUDIT_HPP_
#define LABAUDIT_LABAUDIT_HPP_

#include "labaudit/attacks.hpp"
#include "labaudit/dataset.hpp"
#include "labaudit/error.hpp"
#include "labaudit/harness.hpp"
#include "labaudit/metrics.hpp"
#include "labaudit/model.hpp"
#include "labaudit/privacy.hpp"
#include "labaudit/random.hpp"

#endif  // LABAUDIT_LABAUDIT_HPP_
