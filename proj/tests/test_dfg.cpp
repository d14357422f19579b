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

#include "dfe/dfg.hpp"
#include "dfe/error.hpp"
#include "dfe/frontend.hpp"
#include "random_dfg.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <set>

using namespace dfe;

namespace {

DataFlowGraph fig2_graph() { return extract_dfg(dfe::testing::load_corpus_kernel("fig2.k")); }

NodeId io_node(const DataFlowGraph &g, const std::string &array) {
  for (const IoBinding &b : g.bindings())
    if (b.array == array)
      return b.node;
  throw std::runtime_error("no binding for " + array);
}

std::int32_t eval1(const DataFlowGraph &g, const std::map<std::string, std::int32_t> &in,
                   const std::string &out) {
  ValueStreams s;
  for (const auto &[name, v] : in)
    s[io_node(g, name)] = {v};
  return interpret_dfg(g, s).at(io_node(g, out)).at(0);
}

} // namespace

TEST_CASE("validate_dfg") {
  SUBCASE("the extracted C = A + 3B + 1 graph is valid") { CHECK(validate_dfg(fig2_graph()).empty()); }
  SUBCASE("two-node cycle") {
    DataFlowGraph g;
    const NodeId a = g.add_op(OpCode::Pass);
    const NodeId b = g.add_op(OpCode::Pass);
    g.connect(a, b, 0);
    g.connect(b, a, 0);
    const auto v = validate_dfg(g);
    CHECK(std::any_of(v.begin(), v.end(),
                      [](const DfgViolation &x) { return x.kind == DfgViolation::Kind::Cycle; }));
  }
  SUBCASE("MUX with two inputs") {
    DataFlowGraph g;
    const NodeId x = g.add_input("x", {});
    const NodeId m = g.add_op(OpCode::Mux);
    g.connect(x, m, 0);
    g.connect(x, m, 1);
    const NodeId o = g.add_output("y", {});
    g.connect(m, o, 0);
    const auto v = validate_dfg(g);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == DfgViolation::Kind::Arity);
    CHECK(v[0].node == m);
  }
  SUBCASE("two drivers on one port") {
    DataFlowGraph g;
    const NodeId x = g.add_input("x", {});
    const NodeId y = g.add_input("y", {});
    const NodeId p = g.add_op(OpCode::Pass);
    g.connect(x, p, 0);
    g.connect(y, p, 0);
    const auto v = validate_dfg(g);
    CHECK(std::any_of(v.begin(), v.end(), [](const DfgViolation &d) {
      return d.kind == DfgViolation::Kind::DuplicateEdge;
    }));
  }
  SUBCASE("unsupported code") {
    DataFlowGraph g = fig2_graph();
    for (Node &n : g.mutable_nodes())
      if (n.kind == NodeKind::Op) {
        n.code = static_cast<OpCode>(42);
        break;
      }
    const auto v = validate_dfg(g);
    CHECK(std::any_of(v.begin(), v.end(), [](const DfgViolation &d) {
      return d.kind == DfgViolation::Kind::UnsupportedCode;
    }));
  }
  SUBCASE("every violation is reported") {
    DataFlowGraph g;
    const NodeId m = g.add_op(OpCode::Mux);
    const NodeId add = g.add_op(OpCode::Add);
    g.connect(m, add, 0);
    CHECK(validate_dfg(g).size() >= 2);
  }
}

TEST_CASE("interpret_dfg") {
  SUBCASE("C = A + 3B + 1 at A=1, B=2") {
    CHECK(eval1(fig2_graph(), {{"A", 1}, {"B", 2}}, "C") == 8);
  }
  SUBCASE("both arms of the branch kernel") {
    const DataFlowGraph g = extract_dfg(dfe::testing::load_corpus_kernel("listing1.k"));
    CHECK(eval1(g, {{"A", 5}, {"B", 1}}, "C") == 9);
    CHECK(eval1(g, {{"A", 1}, {"B", 5}}, "C") == -26);
  }
  SUBCASE("two's complement wrap") {
    DataFlowGraph g;
    const NodeId a = g.add_input("a", {});
    const NodeId b = g.add_input("b", {});
    const NodeId s = g.add_op(OpCode::Add);
    g.connect(a, s, 0);
    g.connect(b, s, 1);
    const NodeId o = g.add_output("c", {});
    g.connect(s, o, 0);
    CHECK(eval1(g, {{"a", 2147483647}, {"b", 1}}, "c") == -2147483647 - 1);
  }
  SUBCASE("length mismatch") {
    const DataFlowGraph g = fig2_graph();
    ValueStreams s{{io_node(g, "A"), {1, 2}}, {io_node(g, "B"), {1}}};
    try {
      interpret_dfg(g, s);
      FAIL("expected LengthMismatch");
    } catch (const Error &e) {
      CHECK(e.code() == ErrorCode::LengthMismatch);
    }
  }
  SUBCASE("missing input stream") {
    const DataFlowGraph g = fig2_graph();
    CHECK_THROWS_AS(interpret_dfg(g, ValueStreams{{io_node(g, "A"), {1}}}), Error);
  }
  SUBCASE("streams are evaluated position by position") {
    const DataFlowGraph g = fig2_graph();
    const ValueStreams s{{io_node(g, "A"), {1, 0, -4}}, {io_node(g, "B"), {2, 7, 1}}};
    CHECK(interpret_dfg(g, s).at(io_node(g, "C")) == std::vector<std::int32_t>{8, 22, 0});
  }
}

TEST_CASE("apply_op semantics") {
  CHECK(apply_op(OpCode::Sub, -2147483647 - 1, 1, 0) == 2147483647);
  CHECK(apply_op(OpCode::Mul, 65536, 65536, 0) == 0);
  CHECK(apply_op(OpCode::Lt, -1, 0, 0) == 1);
  CHECK(apply_op(OpCode::Ge, -1, 0, 0) == 0);
  CHECK(apply_op(OpCode::Eq, 3, 3, 0) == 1);
  CHECK(apply_op(OpCode::Ne, 3, 3, 0) == 0);
  CHECK(apply_op(OpCode::Le, 3, 3, 0) == 1);
  CHECK(apply_op(OpCode::Mux, 10, 20, 7) == 10);
  CHECK(apply_op(OpCode::Mux, 10, 20, 0) == 20);
  CHECK(apply_op(OpCode::Pass, 5, 0, 0) == 5);
}

TEST_CASE("fold_inputs_to_constants") {
  const DataFlowGraph g = fig2_graph();
  SUBCASE("empty map is the identity") { CHECK(fold_inputs_to_constants(g, {}) == g); }
  SUBCASE("fold A = 0, then evaluate with B = 7") {
    const DataFlowGraph f = fold_inputs_to_constants(g, {{io_node(g, "A"), 0}});
    CHECK(dfg_stats(f).inputs == 1);
    CHECK(f.bindings().size() == g.bindings().size() - 1);
    const ValueStreams in{{io_node(g, "B"), {7}}};
    const auto out = interpret_dfg(f, in);
    CHECK(out.at(io_node(g, "C")).at(0) == 22);
    CHECK(eval1(g, {{"A", 0}, {"B", 7}}, "C") == 22);
  }
  SUBCASE("unknown key") {
    try {
      fold_inputs_to_constants(g, {{io_node(g, "C"), 1}});
      FAIL("expected UnknownInput");
    } catch (const Error &e) {
      CHECK(e.code() == ErrorCode::UnknownInput);
    }
  }
}

TEST_CASE("fold equivalence over random graphs") {
  Rng rng(2024);
  dfe::testing::RandomDfgOptions opts;
  opts.max_ops = 14;
  opts.max_inputs = 5;
  opts.max_streams = 30;
  opts.const_probability = 0.3;
  for (int t = 0; t < 1000; ++t) {
    const DataFlowGraph g = dfe::testing::random_dfg(rng, opts);
    REQUIRE(validate_dfg(g).empty());
    const auto inputs = g.nodes_of(NodeKind::Input);
    std::map<NodeId, std::int32_t> known;
    ValueStreams rest, all;
    for (NodeId in : inputs) {
      const auto v = static_cast<std::int32_t>(rng.between(-1000, 1000));
      if (rng.below(2) == 0) {
        known[in] = v;
        all[in] = {v};
      } else {
        const auto w = static_cast<std::int32_t>(rng.between(-1000, 1000));
        rest[in] = {v, w};
        all[in] = {v};
      }
    }
    // Folded values are constant over the stream; compare position 0 and
    // the second position of the remaining inputs separately.
    const DataFlowGraph f = fold_inputs_to_constants(g, known);
    const auto folded = interpret_dfg(f, rest, 2);
    for (std::size_t pos = 0; pos < 2; ++pos) {
      ValueStreams point;
      for (NodeId in : inputs)
        point[in] = {known.count(in) ? known.at(in) : rest.at(in).at(pos)};
      const auto ref = interpret_dfg(g, point);
      for (const auto &[out, values] : ref)
        REQUIRE(folded.at(out).at(pos) == values.at(0));
    }
  }
}

TEST_CASE("dfg_stats") {
  CHECK(dfg_stats(fig2_graph()) == DfgStats{2, 1, 3, 2});
  CHECK(dfg_stats(DataFlowGraph{}) == DfgStats{});
  const DataFlowGraph g = fig2_graph();
  const DfgStats s = dfg_stats(g);
  CHECK(s.inputs + s.outputs + s.calc_nodes + s.consts == g.size());
}

TEST_CASE("dfg_hash") {
  const DataFlowGraph g = fig2_graph();
  SUBCASE("relabel invariance") {
    std::vector<std::size_t> perm(g.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    const DataFlowGraph r = relabel(g, perm);
    CHECK(r != g);
    CHECK(validate_dfg(r).empty());
    CHECK(dfg_hash(r) == dfg_hash(g));
  }
  SUBCASE("random relabelings") {
    Rng rng(5);
    dfe::testing::RandomDfgOptions opts;
    opts.max_ops = 10;
    opts.max_streams = 20;
    for (int t = 0; t < 100; ++t) {
      const DataFlowGraph h = dfe::testing::random_dfg(rng, opts);
      std::vector<std::size_t> perm(h.size());
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[rng.below(i)]);
      CHECK(dfg_hash(relabel(h, perm)) == dfg_hash(h));
    }
  }
  SUBCASE("sensitive to codes, constants, edges and bindings") {
    const std::uint64_t base = dfg_hash(g);
    DataFlowGraph a = g;
    for (Node &n : a.mutable_nodes())
      if (n.kind == NodeKind::Op && n.code == OpCode::Mul)
        n.code = OpCode::Sub;
    CHECK(dfg_hash(a) != base);
    DataFlowGraph b = g;
    for (Node &n : b.mutable_nodes())
      if (n.kind == NodeKind::Const && n.value == 3)
        n.value = 4;
    CHECK(dfg_hash(b) != base);
    DataFlowGraph c = g;
    for (IoBinding &bd : c.mutable_bindings())
      if (bd.array == "B")
        bd.array = "D";
    CHECK(dfg_hash(c) != base);
    DataFlowGraph d = g;
    // Swap the operands of the multiplication (3*B becomes B*3 at the port
    // level): a different edge set.
    for (Edge &e : d.mutable_edges())
      if (d.node(e.dst).kind == NodeKind::Op && d.node(e.dst).code == OpCode::Mul)
        e.dst_port = static_cast<std::uint8_t>(1 - e.dst_port);
    CHECK(dfg_hash(d) != base);
  }
  SUBCASE("no collisions across the corpus") {
    std::set<std::uint64_t> seen;
    std::size_t graphs = 0;
    for (const auto &entry : std::filesystem::recursive_directory_iterator(DFE_CORPUS_DIR)) {
      if (entry.path().extension() != ".k")
        continue;
      const Kernel k = parse_kernel(dfe::testing::read_file(entry.path().string()));
      if (structural_rejection(k) != RejectReason::None)
        continue;
      for (std::int64_t u : {1, 2}) {
        seen.insert(dfg_hash(extract_dfg(k, ExtractOptions{u})));
        ++graphs;
      }
    }
    CHECK(graphs >= 30);
    CHECK(seen.size() == graphs);
  }
}

TEST_CASE("text format round trip") {
  const DataFlowGraph g = extract_dfg(dfe::testing::load_corpus_kernel("fig2.k"), ExtractOptions{4});
  const std::string text = dfg_to_text(g);
  CHECK(dfg_from_text(text) == g);
  CHECK(dfg_to_text(dfg_from_text(text)) == text);
  SUBCASE("malformed") {
    try {
      dfg_from_text("dfg 1\nnode 0 frobnicate\n");
      FAIL("expected Format");
    } catch (const Error &e) {
      CHECK(e.code() == ErrorCode::Format);
    }
  }
}

TEST_CASE("legalize_for_overlay") {
  DataFlowGraph g;
  const NodeId c1 = g.add_const(3);
  const NodeId c2 = g.add_const(4);
  const NodeId add = g.add_op(OpCode::Add);
  g.connect(c1, add, 0);
  g.connect(c2, add, 1);
  const NodeId o = g.add_output("y", {});
  g.connect(add, o, 0);
  const NodeId o2 = g.add_output("z", {});
  g.connect(c1, o2, 0);
  const DataFlowGraph l = legalize_for_overlay(g);
  CHECK(validate_dfg(l).empty());
  for (const Node &n : l.nodes()) {
    if (n.kind == NodeKind::Op) {
      int consts = 0;
      for (const Edge &e : l.in_edges(n.id))
        consts += l.node(e.src).kind == NodeKind::Const;
      CHECK(consts <= 1);
    }
    if (n.kind == NodeKind::Output)
      CHECK(l.node(*l.producer(n.id, 0)).kind != NodeKind::Const);
  }
  const auto a = interpret_dfg(g, {});
  const auto b = interpret_dfg(l, {});
  CHECK(a == b);
  CHECK(a.at(o).at(0) == 7);
}

TEST_CASE("DOT output is a digraph") {
  const std::string dot = dfg_to_dot(fig2_graph());
  CHECK(dot.rfind("digraph", 0) == 0);
  CHECK(std::count(dot.begin(), dot.end(), '{') == std::count(dot.begin(), dot.end(), '}'));
  CHECK(dot.find("->") != std::string::npos);
}
