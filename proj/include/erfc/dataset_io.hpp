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

#include <filesystem>
#include <vector>

#include "erfc/features.hpp"

namespace emo {

struct Dataset {
  WindowConfig cfg;
  FeatureDims dims;
  std::vector<Example> examples;
};

// Directory layout:
//   examples.csv  conv_id,t,x0,...,x{n-1}
//   targets.csv   conv_id,t,slot,horizon,label   (label is a class name or MASK)
//   meta.json     window config, modality dims, scheme and class order
void write_dataset(const std::filesystem::path &dir, const Dataset &ds);
Dataset read_dataset(const std::filesystem::path &dir);

}  // namespace emo
