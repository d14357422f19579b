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

// Simulation-versus-interpreter check for placed graphs.

#pragma once

#include "dfe/dfg.hpp"
#include "dfe/placer.hpp"
#include "dfe/rng.hpp"
#include "dfe/simulator.hpp"

#include <string>
#include <vector>

namespace dfe::testing {

/// Runs `length` random positions (values in [lo, hi]) through the placed
/// configuration and through interpret_dfg on the original graph. Returns
/// an empty string on agreement, else a description of the first mismatch.
inline std::string check_placement_oracle(const DataFlowGraph &g, const Placement &p, Rng &rng,
                                          std::size_t length, std::int64_t lo = -1000,
                                          std::int64_t hi = 1000) {
  if (auto v = validate_config(p.config); !v.empty())
    return "invalid config: " + v.front().message;
  ValueStreams in;
  std::vector<TaggedStream> streams;
  for (NodeId id : g.nodes_of(NodeKind::Input)) {
    std::vector<std::int32_t> values(length);
    for (auto &x : values)
      x = static_cast<std::int32_t>(rng.between(lo, hi));
    in[id] = values;
    streams.push_back(TaggedStream{static_cast<std::uint32_t>(id), values});
  }
  const ValueStreams ref = interpret_dfg(g, in, length);
  const RunReport rep = run(p.config, streams, length);
  for (const auto &[out, values] : ref) {
    const auto it = rep.outputs.find(static_cast<std::uint32_t>(out));
    if (it == rep.outputs.end())
      return "output " + std::to_string(idx(out)) + " missing from the run";
    if (it->second != values)
      return "output " + std::to_string(idx(out)) + " differs";
  }
  if (rep.outputs.size() != ref.size())
    return "run produced extra outputs";
  if (rep.bytes_on_wire != 16 * (rep.frames_in + rep.frames_out))
    return "frame accounting broken";
  return {};
}

} // namespace dfe::testing
