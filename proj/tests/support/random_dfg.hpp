// Copyright 2026 The DFE Offload Authors. All Rights Reserved.
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

// Random data flow graphs for property tests.

#pragma once

#include "dfe/dfg.hpp"
#include "dfe/rng.hpp"

#include <cstddef>

namespace dfe::testing {

struct RandomDfgOptions {
  int min_ops = 1;
  int max_ops = 4;
  int max_inputs = 3;
  /// Cap on Input + Output nodes.
  int max_streams = 4;
  double const_probability = 0.2;
};

/// A valid graph: every Input is consumed, every Op is used, every sink
/// Op feeds an Output. Inputs and Outputs bind scalars named in<k>/out<k>.
DataFlowGraph random_dfg(Rng &rng, const RandomDfgOptions &opts);

} // namespace dfe::testing
