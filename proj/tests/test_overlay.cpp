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
#include "dfe/overlay.hpp"
#include "dfe/placer.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <variant>

using namespace dfe;

namespace {

bool has_violation(const std::vector<ConfigViolation> &v, Cell c, const std::string &port,
                   const std::string &needle) {
  return std::any_of(v.begin(), v.end(), [&](const ConfigViolation &x) {
    return x.cell == c && x.port == port && x.message.find(needle) != std::string::npos;
  });
}

/// (0,0) FU -> (0,1) pass-through -> (0,2) FU in1, on a 1x3 overlay.
OverlayConfig chain_1x3() {
  OverlayConfig cfg = new_overlay(1, 3);
  cfg.set_io(IoDir::In, BorderPort{{0, 0}, Dir::W}, 1);
  cfg.set_io(IoDir::In, BorderPort{{0, 0}, Dir::N}, 2);
  CellConfig &a = cfg.cell({0, 0});
  a.fu_op = OpCode::Add;
  a.sel(Pin::In1) = InSel::W;
  a.sel(Pin::In2) = InSel::N;
  a.out(Dir::E) = OutSel::Fu;
  cfg.cell({0, 1}).out(Dir::E) = OutSel::InW;
  CellConfig &c = cfg.cell({0, 2});
  c.fu_op = OpCode::Mul;
  c.sel(Pin::In1) = InSel::W;
  c.mask = ConstMask{Pin::In2, 5};
  c.out(Dir::E) = OutSel::Fu;
  cfg.set_io(IoDir::Out, BorderPort{{0, 2}, Dir::E}, 9);
  return cfg;
}

} // namespace

TEST_CASE("new_overlay shapes") {
  const OverlayConfig a = new_overlay(2, 2);
  CHECK(a.cells().size() == 4);
  CHECK(a.shape().io_capacity() == 8);
  CHECK(validate_config(a).empty());
  const OverlayConfig b = new_overlay(1, 1);
  CHECK(b.cells().size() == 1);
  CHECK(b.shape().io_capacity() == 4);
  CHECK(border_ports(b.shape()).size() == 4);
  CHECK(new_overlay(24, 18).cells().size() == 432);
  CHECK(std::all_of(a.cells().begin(), a.cells().end(),
                    [](const CellConfig &c) { return c.is_unused(); }));
  try {
    new_overlay(0, 3);
    FAIL("expected InvalidArgument");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("io capacity is the perimeter") {
  for (int r = 1; r <= 32; ++r)
    for (int c = 1; c <= 32; ++c) {
      const OverlayShape s{r, c};
      REQUIRE(s.io_capacity() == 2 * (r + c));
      REQUIRE(border_ports(s).size() == static_cast<std::size_t>(2 * (r + c)));
    }
}

TEST_CASE("neighbour topology") {
  const OverlayShape s{3, 4};
  CHECK(s.neighbor({1, 1}, Dir::N) == Cell{0, 1});
  CHECK(s.neighbor({1, 1}, Dir::E) == Cell{1, 2});
  CHECK(s.neighbor({1, 1}, Dir::S) == Cell{2, 1});
  CHECK(s.neighbor({1, 1}, Dir::W) == Cell{1, 0});
  CHECK(!s.neighbor({0, 0}, Dir::N));
  CHECK(!s.neighbor({2, 3}, Dir::E));
  for (const BorderPort &p : border_ports(s)) {
    CHECK(s.on_border(p.cell, p.side));
    CHECK(border_port(s, p.side, border_index(p)) == p);
  }
}

TEST_CASE("validate_config") {
  SUBCASE("hand-built chain is valid") { CHECK(validate_config(chain_1x3()).empty()); }
  SUBCASE("placer output for C = A + 3B + 1 is valid") {
    const DataFlowGraph g = extract_dfg(dfe::testing::load_corpus_kernel("fig2.k"));
    const PlaceResult r = place_and_route(g, {2, 2}, PlacerParams{}, 42);
    REQUIRE(r.ok());
    CHECK(validate_config(r.placement->config).empty());
  }
  SUBCASE("dangling FU") {
    OverlayConfig cfg = new_overlay(1, 2);
    cfg.cell({0, 0}).out(Dir::E) = OutSel::Fu;
    CHECK(has_violation(validate_config(cfg), {0, 0}, "out.E", "dangling FU"));
  }
  SUBCASE("routing loop") {
    OverlayConfig cfg = new_overlay(1, 2);
    cfg.cell({0, 0}).out(Dir::E) = OutSel::InE;
    cfg.cell({0, 1}).out(Dir::W) = OutSel::InW;
    const auto v = validate_config(cfg);
    CHECK(std::any_of(v.begin(), v.end(), [](const ConfigViolation &x) {
      return x.message.find("cycle") != std::string::npos;
    }));
  }
  SUBCASE("pass-through loop around four cells") {
    OverlayConfig cfg = new_overlay(2, 2);
    cfg.cell({0, 0}).out(Dir::E) = OutSel::InS;
    cfg.cell({0, 1}).out(Dir::S) = OutSel::InW;
    cfg.cell({1, 1}).out(Dir::W) = OutSel::InN;
    cfg.cell({1, 0}).out(Dir::N) = OutSel::InE;
    const auto v = validate_config(cfg);
    CHECK(std::any_of(v.begin(), v.end(), [](const ConfigViolation &x) {
      return x.message.find("cycle") != std::string::npos;
    }));
  }
  SUBCASE("reflection") {
    OverlayConfig cfg = chain_1x3();
    cfg.cell({0, 1}).out(Dir::W) = OutSel::InW;
    CHECK(has_violation(validate_config(cfg), {0, 1}, "out.W", "reflects"));
  }
  SUBCASE("required pin left open") {
    OverlayConfig cfg = chain_1x3();
    cfg.cell({0, 0}).sel(Pin::In2) = InSel::Unconnected;
    CHECK(has_violation(validate_config(cfg), {0, 0}, "in2", "neither connected nor masked"));
  }
  SUBCASE("select pin on a binary op") {
    OverlayConfig cfg = chain_1x3();
    cfg.cell({0, 0}).sel(Pin::Sel) = InSel::N;
    CHECK(has_violation(validate_config(cfg), {0, 0}, "sel", "not used"));
  }
  SUBCASE("pin both connected and masked") {
    OverlayConfig cfg = chain_1x3();
    cfg.cell({0, 2}).sel(Pin::In2) = InSel::W;
    CHECK(has_violation(validate_config(cfg), {0, 2}, "in2", "both connected"));
  }
  SUBCASE("selected input not driven") {
    OverlayConfig cfg = chain_1x3();
    cfg.cell({0, 0}).sel(Pin::In1) = InSel::S;
    CHECK(has_violation(validate_config(cfg), {0, 0}, "in1", "not driven"));
  }
  SUBCASE("border output without a tag") {
    OverlayConfig cfg = chain_1x3();
    cfg.clear_io(IoDir::Out, BorderPort{{0, 2}, Dir::E});
    CHECK(has_violation(validate_config(cfg), {0, 2}, "out.E", "no stream tag"));
  }
  SUBCASE("duplicate tag") {
    OverlayConfig cfg = chain_1x3();
    cfg.set_io(IoDir::In, BorderPort{{0, 1}, Dir::N}, 1);
    const auto v = validate_config(cfg);
    CHECK(std::any_of(v.begin(), v.end(), [](const ConfigViolation &x) {
      return x.message.find("mapped twice") != std::string::npos;
    }));
  }
  SUBCASE("all violations are reported") {
    OverlayConfig cfg = chain_1x3();
    cfg.cell({0, 0}).sel(Pin::In2) = InSel::Unconnected;
    cfg.cell({0, 1}).out(Dir::W) = OutSel::InW;
    cfg.cell({0, 1}).out(Dir::N) = OutSel::Fu;
    CHECK(validate_config(cfg).size() >= 3);
  }
}

TEST_CASE("trace_port") {
  const OverlayConfig cfg = chain_1x3();
  SUBCASE("border input") {
    const Origin o = trace_port(cfg, {0, 0}, Dir::W);
    REQUIRE(std::holds_alternative<BorderOrigin>(o));
    CHECK(std::get<BorderOrigin>(o).port == BorderPort{{0, 0}, Dir::W});
  }
  SUBCASE("through a pass-through") {
    const Origin o = trace_port(cfg, {0, 2}, Dir::W);
    REQUIRE(std::holds_alternative<FuOrigin>(o));
    CHECK(std::get<FuOrigin>(o).cell == Cell{0, 0});
  }
  SUBCASE("output") {
    const Origin o = trace_output(cfg, {0, 1}, Dir::E);
    REQUIRE(std::holds_alternative<FuOrigin>(o));
    CHECK(std::get<FuOrigin>(o).cell == Cell{0, 0});
  }
  SUBCASE("undriven port") {
    try {
      trace_port(cfg, {0, 1}, Dir::E);
      FAIL("expected UnroutedPort");
    } catch (const Error &e) {
      CHECK(e.code() == ErrorCode::UnroutedPort);
    }
  }
}

TEST_CASE("binary format") {
  SUBCASE("round trip") {
    const OverlayConfig cfg = chain_1x3();
    const auto bytes = serialize_config(cfg);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "DFE1");
    CHECK(bytes.size() == 4 + 8 + 3 * 13 + 4 + 3 * 8);
    CHECK(deserialize_config(bytes) == cfg);
    CHECK(serialize_config(deserialize_config(bytes)) == bytes);
  }
  SUBCASE("negative constant survives") {
    OverlayConfig cfg = chain_1x3();
    cfg.cell({0, 2}).mask = ConstMask{Pin::In2, -2147483647 - 1};
    CHECK(deserialize_config(serialize_config(cfg)) == cfg);
  }
  SUBCASE("placed corpus configurations") {
    for (const char *k : {"fig2.k", "listing1.k", "polybench/gemm.k"}) {
      const DataFlowGraph g = extract_dfg(dfe::testing::load_corpus_kernel(k));
      const PlaceResult r = place_and_route(g, {6, 6}, PlacerParams{}, 3);
      REQUIRE(r.ok());
      const auto bytes = serialize_config(r.placement->config);
      CHECK(deserialize_config(bytes) == r.placement->config);
    }
  }
  SUBCASE("corrupt input") {
    auto bytes = serialize_config(chain_1x3());
    auto format_error = [](std::vector<std::uint8_t> b) {
      try {
        deserialize_config(b);
      } catch (const Error &e) {
        return e.code() == ErrorCode::Format;
      }
      return false;
    };
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK(format_error(bad_magic));
    CHECK(format_error(std::vector<std::uint8_t>(bytes.begin(), bytes.end() - 1)));
    auto trailing = bytes;
    trailing.push_back(0);
    CHECK(format_error(trailing));
    auto bad_op = bytes;
    bad_op[12] = 99;
    CHECK(format_error(bad_op));
  }
}

TEST_CASE("text and DOT renderings") {
  const OverlayConfig cfg = chain_1x3();
  const std::string text = config_to_text(cfg);
  CHECK(text.find("overlay 1x3") != std::string::npos);
  CHECK(text.find("mask=in2:5") != std::string::npos);
  const std::string dot = config_to_dot(cfg);
  CHECK(dot.rfind("digraph", 0) == 0);
  CHECK(dot.find("fillcolor=green") != std::string::npos);
  CHECK(std::count(dot.begin(), dot.end(), '{') == std::count(dot.begin(), dot.end(), '}'));
}
