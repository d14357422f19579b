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

#include "dfe/error.hpp"
#include "dfe/frontend.hpp"
#include "dfe/kernel.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>
#include <set>

using namespace dfe;
using dfe::testing::load_corpus_kernel;

namespace {

const char *kFig2 = R"(kernel fig2(M, N)
arrays: A[MxN]:int32, B[MxN]:int32, C[MxN]:int32
for i in 0..M {
  for j in 0..N {
    C[i][j] = A[i][j] + 3*B[i][j] + 1;
  }
}
)";

Kernel one_liner(const std::string &stmt, const std::string &arrays = "A[N]:int32, C[N]:int32") {
  return parse_kernel("kernel t(N, k)\narrays: " + arrays + "\nfor i in 0..N {\n  " + stmt +
                      "\n}\n");
}

std::size_t count_code(const DataFlowGraph &g, OpCode code) {
  std::size_t n = 0;
  for (const Node &node : g.nodes())
    n += node.kind == NodeKind::Op && node.code == code;
  return n;
}

} // namespace

TEST_CASE("parse: the C = A + 3B + 1 program") {
  const Kernel k = parse_kernel(kFig2);
  CHECK(k.name == "fig2");
  CHECK(k.params == std::vector<std::string>{"M", "N"});
  CHECK(k.arrays.size() == 3);
  CHECK(k.loop_nest().size() == 2);
  CHECK(k.is_perfect_nest());
  REQUIRE(k.innermost_body().size() == 1);
  CHECK(k.innermost_body()[0]->kind == Stmt::Kind::Assign);
}

TEST_CASE("parse: empty loop body") {
  const Kernel k = parse_kernel("kernel e(N)\narrays: A[N]:int32\nfor i in 0..N { }\n");
  CHECK(k.innermost_body().empty());
}

TEST_CASE("parse: the branch kernel has one if/else") {
  const Kernel k = load_corpus_kernel("listing1.k");
  REQUIRE(k.innermost_body().size() == 1);
  const Stmt &s = *k.innermost_body()[0];
  CHECK(s.kind == Stmt::Kind::If);
  CHECK(s.then_body.size() == 1);
  CHECK(s.else_body.size() == 1);
}

TEST_CASE("parse: errors carry line and column") {
  SUBCASE("syntax") {
    try {
      parse_kernel("kernel t(N)\narrays: A[N]:int32\nfor i in 0..N {\n  A[i] = ;\n}\n");
      FAIL("expected a syntax error");
    } catch (const SourceError &e) {
      CHECK(e.code() == ErrorCode::Syntax);
      CHECK(e.line() == 4);
      CHECK(e.column() == 10);
    }
  }
  SUBCASE("use before declaration") {
    try {
      parse_kernel("kernel t(N)\narrays: A[N]:int32\nfor i in 0..N {\n  A[i] = Q[i];\n}\n");
      FAIL("expected an unknown identifier");
    } catch (const SourceError &e) {
      CHECK(e.code() == ErrorCode::UnknownIdentifier);
      CHECK(e.line() == 4);
    }
  }
  SUBCASE("unterminated block") {
    CHECK_THROWS_AS(parse_kernel("kernel t(N)\narrays: A[N]:int32\nfor i in 0..N {\n"),
                    SourceError);
  }
}

TEST_CASE("print/parse round trip over the corpus") {
  std::size_t seen = 0;
  for (const auto &entry : std::filesystem::recursive_directory_iterator(DFE_CORPUS_DIR)) {
    if (entry.path().extension() != ".k")
      continue;
    CAPTURE(entry.path().string());
    const Kernel k = parse_kernel(dfe::testing::read_file(entry.path().string()));
    const std::string text = print_kernel(k);
    const Kernel again = parse_kernel(text);
    CHECK(again == k);
    CHECK(print_kernel(again) == text);
    ++seen;
  }
  CHECK(seen >= 24);
}

TEST_CASE("eligibility verdicts") {
  const Thresholds loose{2, 1000};
  SUBCASE("division") {
    const auto r = check_eligibility(one_liner("C[i] = A[i] / k;"), loose);
    CHECK(r.verdict == Verdict::Rejected);
    CHECK(r.reason == RejectReason::Division);
    CHECK(!r.dfg_stats);
  }
  SUBCASE("remainder") {
    CHECK(check_eligibility(one_liner("C[i] = A[i] % 3;"), loose).reason ==
          RejectReason::Division);
  }
  SUBCASE("float literal") {
    CHECK(check_eligibility(one_liner("C[i] = A[i] * 0.5;"), loose).reason ==
          RejectReason::FloatingPoint);
  }
  SUBCASE("float array") {
    CHECK(check_eligibility(one_liner("C[i] = A[i] + 1;", "A[N]:float32, C[N]:int32"), loose)
              .reason == RejectReason::FloatingPoint);
  }
  SUBCASE("floating point wins over division") {
    CHECK(check_eligibility(one_liner("C[i] = A[i] / 0.5;"), loose).reason ==
          RejectReason::FloatingPoint);
  }
  SUBCASE("too small") {
    const auto r = check_eligibility(one_liner("C[i] = A[i] + 1;"), Thresholds{10, 1000});
    CHECK(r.verdict == Verdict::Rejected);
    CHECK(r.reason == RejectReason::TooSmall);
    REQUIRE(r.dfg_stats);
    CHECK(r.dfg_stats->calc_nodes == 1);
  }
  SUBCASE("too large") {
    const auto r = check_eligibility(parse_kernel(kFig2), Thresholds{1, 2});
    CHECK(r.reason == RejectReason::TooLarge);
  }
  SUBCASE("accepted") {
    const auto r = check_eligibility(parse_kernel(kFig2), loose);
    CHECK(r.verdict == Verdict::Accepted);
    CHECK(r.reason == RejectReason::None);
    REQUIRE(r.dfg_stats);
    CHECK(r.dfg_stats->calc_nodes == 3);
  }
  SUBCASE("non-affine index") {
    CHECK(check_eligibility(one_liner("C[i] = A[i * i];"), loose).reason ==
          RejectReason::NonAffine);
  }
  SUBCASE("data-dependent index") {
    CHECK(check_eligibility(one_liner("C[i] = A[A[i]];"), loose).reason ==
          RejectReason::NonAffine);
  }
  SUBCASE("loop-carried dependence") {
    CHECK(check_eligibility(one_liner("C[i] = C[i - 1] + A[i];"), loose).reason ==
          RejectReason::NonAffine);
  }
  SUBCASE("division is reported before dependence") {
    CHECK(check_eligibility(one_liner("C[i] = C[i - 1] / A[i];"), loose).reason ==
          RejectReason::Division);
  }
  SUBCASE("bitwise operator") {
    CHECK(check_eligibility(one_liner("C[i] = A[i] & 3;"), loose).reason ==
          RejectReason::UnsupportedOp);
  }
}

TEST_CASE("eligibility is deterministic and consistent") {
  const Kernel k = load_corpus_kernel("polybench/gemm.k");
  const Thresholds t = Thresholds::for_overlay(9, 9);
  const auto a = check_eligibility(k, t);
  const auto b = check_eligibility(k, t);
  CHECK(a.verdict == b.verdict);
  CHECK(a.reason == b.reason);
  CHECK(a.dfg_stats == b.dfg_stats);
  CHECK((a.verdict == Verdict::Accepted) == (a.reason == RejectReason::None));
}

TEST_CASE("extract: C = A + 3B + 1") {
  const DataFlowGraph g = extract_dfg(parse_kernel(kFig2));
  const DfgStats s = dfg_stats(g);
  CHECK(s.inputs == 2);
  CHECK(s.outputs == 1);
  CHECK(s.calc_nodes == 3);
  CHECK(s.consts == 2);
  CHECK(count_code(g, OpCode::Mul) == 1);
  CHECK(count_code(g, OpCode::Add) == 2);
  std::multiset<std::int32_t> consts;
  for (const Node &n : g.nodes())
    if (n.kind == NodeKind::Const)
      consts.insert(n.value);
  CHECK(consts == std::multiset<std::int32_t>{1, 3});
  CHECK(validate_dfg(g).empty());
}

TEST_CASE("extract: unroll by four replicates lanes") {
  const DataFlowGraph g = extract_dfg(parse_kernel(kFig2), ExtractOptions{4});
  const DfgStats s = dfg_stats(g);
  CHECK(s.inputs == 8);
  CHECK(s.outputs == 4);
  CHECK(s.calc_nodes == 12);
  CHECK(g.unroll == 4);
  std::set<std::int64_t> offsets;
  for (const IoBinding &b : g.bindings()) {
    CHECK(b.lane.stride == 4);
    offsets.insert(b.lane.offset);
  }
  CHECK(offsets == std::set<std::int64_t>{0, 1, 2, 3});
  CHECK(g.topological_order().has_value());
}

TEST_CASE("extract: unroll above the node cap") {
  try {
    extract_dfg(parse_kernel(kFig2), ExtractOptions{4, 10});
    FAIL("expected UnrollTooLarge");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::UnrollTooLarge);
  }
  CHECK_NOTHROW(extract_dfg(parse_kernel(kFig2), ExtractOptions{4, 12}));
}

TEST_CASE("extract: the branch becomes a comparison-driven MUX") {
  const DataFlowGraph g = extract_dfg(load_corpus_kernel("listing1.k"));
  CHECK(count_code(g, OpCode::Gt) == 1);
  CHECK(count_code(g, OpCode::Mux) == 1);
  const auto muxes = [&] {
    std::vector<NodeId> out;
    for (const Node &n : g.nodes())
      if (n.kind == NodeKind::Op && n.code == OpCode::Mux)
        out.push_back(n.id);
    return out;
  }();
  const NodeId mux = muxes.at(0);
  const auto sel = g.producer(mux, 0);
  REQUIRE(sel);
  CHECK(g.node(*sel).code == OpCode::Gt);
  for (std::uint8_t port : {1, 2}) {
    const auto arm = g.producer(mux, port);
    REQUIRE(arm);
    CHECK(g.node(*arm).kind == NodeKind::Op);
    CHECK(g.node(*arm).code != OpCode::Gt);
  }
  for (const Node &n : g.nodes())
    if (n.kind == NodeKind::Output)
      CHECK(g.producer(n.id, 0) == mux);
}

TEST_CASE("extract: rejected kernels throw NotEligible") {
  try {
    extract_dfg(one_liner("C[i] = A[i] / 2;"));
    FAIL("expected NotEligible");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::NotEligible);
  }
}

TEST_CASE("extract: every eligible corpus kernel yields an acyclic valid graph") {
  for (const auto &entry : std::filesystem::recursive_directory_iterator(DFE_CORPUS_DIR)) {
    if (entry.path().extension() != ".k")
      continue;
    const Kernel k = parse_kernel(dfe::testing::read_file(entry.path().string()));
    if (structural_rejection(k) != RejectReason::None)
      continue;
    CAPTURE(entry.path().string());
    for (std::int64_t u : {1, 2}) {
      const DataFlowGraph g = extract_dfg(k, ExtractOptions{u});
      CHECK(g.topological_order().has_value());
      CHECK(validate_dfg(g).empty());
    }
  }
}
