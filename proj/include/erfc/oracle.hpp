// Copyright (c) 2026 The ERFC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

#include "erfc/synth.hpp"

namespace emo {

// What the predictor is allowed to see at turn t.
enum class Conditioning {
  // True labels of turn t (the h = 0 accuracy is 1 by definition).
  kCurrentLabelsOnly,
  // True labels of turn t-1, features of turn t and the attributes of turn t-1.
  kFullHistory,
  // Features of turn t only; the prior is the stationary distribution.
  kCurrentFeaturesOnly,
};

struct OracleResult {
  double accuracy = 0.0;  // fraction in [0, 1], averaged over both speakers
  double std_error = 0.0;
  bool exact = false;
};

// Highest expected accuracy for the labels at turn t+h. Label-only
// conditioning is computed exactly from powers of the joint chain; the others
// are Monte Carlo estimates over `trials` draws with their standard error.
OracleResult bayes_oracle(const SynthConfig &cfg, int h, Conditioning conditioning,
                          std::uint64_t trials = 100000, std::uint64_t seed = 0);

// Horizons 0..k from one shared set of draws.
std::vector<OracleResult> oracle_by_horizon(const SynthConfig &cfg, int k,
                                            Conditioning conditioning,
                                            std::uint64_t trials = 100000,
                                            std::uint64_t seed = 0);

}  // namespace emo
