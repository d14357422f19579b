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

#include "random_dfg.hpp"

#include <string>
#include <vector>

namespace dfe::testing {

namespace {

std::int64_t pick(Rng &rng, std::int64_t lo, std::int64_t hi) { return rng.between(lo, hi); }

} // namespace

DataFlowGraph random_dfg(Rng &rng, const RandomDfgOptions &opts) {
  for (;;) {
    DataFlowGraph g;
    const int n_in = static_cast<int>(pick(rng, 1, opts.max_inputs));
    const int n_ops = static_cast<int>(pick(rng, opts.min_ops, opts.max_ops));
    std::vector<NodeId> values;
    for (int k = 0; k < n_in; ++k)
      values.push_back(g.add_input("in" + std::to_string(k), {}));
    std::vector<NodeId> ops;
    for (int k = 0; k < n_ops; ++k) {
      const OpCode code = kAllOpCodes[rng.below(std::size(kAllOpCodes))];
      std::vector<NodeId> operands;
      bool has_const = false;
      for (int p = 0; p < opcode_arity(code); ++p) {
        // At most one constant per op keeps the graph close to what the
        // frontend produces; legalization covers the rest.
        if (!has_const && rng.uniform01() < opts.const_probability) {
          operands.push_back(g.add_const(static_cast<std::int32_t>(pick(rng, -9, 9))));
          has_const = true;
        } else {
          // Favour recent values so chains, not only wide fans, appear.
          const std::size_t n = values.size();
          const std::size_t i = rng.uniform01() < 0.5 ? n - 1 - rng.below(std::min<std::size_t>(n, 2))
                                                     : rng.below(n);
          operands.push_back(values[i]);
        }
      }
      const NodeId op = g.add_op(code);
      for (std::size_t p = 0; p < operands.size(); ++p)
        g.connect(operands[p], op, static_cast<std::uint8_t>(p));
      ops.push_back(op);
      values.push_back(op);
    }
    bool inputs_used = true;
    for (NodeId in : g.nodes_of(NodeKind::Input))
      inputs_used = inputs_used && !g.out_edges(in).empty();
    if (!inputs_used)
      continue;
    std::vector<NodeId> sinks;
    for (NodeId op : ops)
      if (g.out_edges(op).empty())
        sinks.push_back(op);
    if (n_in + static_cast<int>(sinks.size()) > opts.max_streams)
      continue;
    int k = 0;
    for (NodeId s : sinks) {
      const NodeId out = g.add_output("out" + std::to_string(k++), {});
      g.connect(s, out, 0);
    }
    return g;
  }
}

} // namespace dfe::testing
