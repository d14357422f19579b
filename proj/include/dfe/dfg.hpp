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

// Data flow graph: the unit that gets mapped onto the overlay.

#pragma once

#include "dfe/affine.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dfe {

enum class NodeId : std::uint32_t {};

constexpr std::size_t idx(NodeId id) { return static_cast<std::size_t>(id); }
constexpr NodeId node_id(std::size_t i) { return static_cast<NodeId>(i); }

/// Operation codes the overlay functional unit implements. There is no
/// division or remainder.
enum class OpCode : std::uint8_t {
  Add = 1, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge, Mux, Pass,
};

inline constexpr OpCode kAllOpCodes[] = {
    OpCode::Add, OpCode::Sub, OpCode::Mul, OpCode::Eq, OpCode::Ne, OpCode::Lt,
    OpCode::Le,  OpCode::Gt,  OpCode::Ge,  OpCode::Mux, OpCode::Pass};

const char *opcode_name(OpCode code);
std::optional<OpCode> parse_opcode(std::string_view name);
bool is_valid_opcode(OpCode code);
/// 2 for binary codes, 3 for MUX, 1 for PASS.
int opcode_arity(OpCode code);

/// Wrapping 32-bit semantics shared by the DFG interpreter and the overlay
/// simulator. MUX returns `a` when `sel != 0`; comparisons yield 1/0.
std::int32_t apply_op(OpCode code, std::int32_t a, std::int32_t b,
                      std::int32_t sel);

enum class NodeKind : std::uint8_t { Input, Output, Const, Op };

struct Node {
  NodeId id{};
  NodeKind kind = NodeKind::Op;
  OpCode code = OpCode::Add; // Op only
  std::int32_t value = 0;    // Const only

  friend bool operator==(const Node &, const Node &) = default;
};

struct Edge {
  NodeId src{};
  std::uint8_t src_port = 0;
  NodeId dst{};
  std::uint8_t dst_port = 0;

  friend bool operator==(const Edge &, const Edge &) = default;
  friend auto operator<=>(const Edge &, const Edge &) = default;
};

/// Lane ℓ of a u-way unrolled datapath handles innermost iterations
/// {offset, offset + stride, offset + 2*stride, ...}.
struct Lane {
  std::int64_t offset = 0;
  std::int64_t stride = 1;

  friend bool operator==(const Lane &, const Lane &) = default;
  friend auto operator<=>(const Lane &, const Lane &) = default;
};

/// Ties an Input/Output node to memory. `access` is written in terms of the
/// original loop variables; an empty access binds a scalar parameter.
struct IoBinding {
  NodeId node{};
  std::string array;
  AccessFunction access;
  Lane lane;

  friend bool operator==(const IoBinding &, const IoBinding &) = default;
};

struct LoopDim {
  std::string var;
  AffineExpr bound; // iterations are 0 .. bound-1

  friend bool operator==(const LoopDim &, const LoopDim &) = default;
};

struct DfgStats {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::size_t calc_nodes = 0;
  std::size_t consts = 0;

  friend bool operator==(const DfgStats &, const DfgStats &) = default;
};

/// Acyclic graph of Input/Output/Const/Op nodes. Node ids are dense: node i
/// has id i.
class DataFlowGraph {
public:
  NodeId add_input(std::string array, AccessFunction access, Lane lane = {});
  NodeId add_output(std::string array, AccessFunction access, Lane lane = {});
  NodeId add_const(std::int32_t value);
  NodeId add_op(OpCode code);
  void connect(NodeId src, NodeId dst, std::uint8_t dst_port);

  const std::vector<Node> &nodes() const { return nodes_; }
  const std::vector<Edge> &edges() const { return edges_; }
  const std::vector<IoBinding> &bindings() const { return bindings_; }
  const Node &node(NodeId id) const { return nodes_.at(idx(id)); }
  std::size_t size() const { return nodes_.size(); }

  const IoBinding *binding(NodeId id) const;
  /// Producer wired to `port` of `node`, if any.
  std::optional<NodeId> producer(NodeId node, std::uint8_t port) const;
  std::vector<Edge> in_edges(NodeId node) const;
  std::vector<Edge> out_edges(NodeId node) const;
  std::vector<NodeId> nodes_of(NodeKind kind) const;

  /// Topological order; nullopt when a cycle exists.
  std::optional<std::vector<NodeId>> topological_order() const;

  // Iteration domain the graph streams over. With unroll u > 1 the
  // innermost dimension advances by u per stream position.
  std::vector<LoopDim> domain;
  std::int64_t unroll = 1;
  /// Innermost trip count mod unroll, when the bound is a literal.
  std::optional<std::int64_t> remainder;

  // Raw mutation used by the text reader, folding and relabeling.
  std::vector<Node> &mutable_nodes() { return nodes_; }
  std::vector<Edge> &mutable_edges() { return edges_; }
  std::vector<IoBinding> &mutable_bindings() { return bindings_; }

  friend bool operator==(const DataFlowGraph &, const DataFlowGraph &) = default;

private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<IoBinding> bindings_;
};

struct DfgViolation {
  enum class Kind { Cycle, Arity, DanglingPort, DuplicateEdge, UnsupportedCode, Binding };
  Kind kind;
  std::optional<NodeId> node;
  std::string message;
};

const char *violation_kind_name(DfgViolation::Kind kind);

/// Every violated structural invariant; empty means valid.
std::vector<DfgViolation> validate_dfg(const DataFlowGraph &g);

using ValueStreams = std::map<NodeId, std::vector<std::int32_t>>;

/// Reference evaluation: `inputs` holds one stream per Input node, all of the
/// same length. Throws Error(LengthMismatch / UnknownInput / InvalidArgument).
/// A graph without Input nodes is evaluated once.
ValueStreams interpret_dfg(const DataFlowGraph &g, const ValueStreams &inputs);
/// Same, with the stream length given explicitly (required to be the
/// length of every supplied stream).
ValueStreams interpret_dfg(const DataFlowGraph &g, const ValueStreams &inputs,
                           std::size_t length);

/// Turns the named Input nodes into Const nodes and drops their bindings.
/// Throws Error(UnknownInput) if a key is not an Input node.
DataFlowGraph fold_inputs_to_constants(const DataFlowGraph &g,
                                       const std::map<NodeId, std::int32_t> &known);

DfgStats dfg_stats(const DataFlowGraph &g);

/// Digest over a canonical, id-independent serialization: a bottom-up
/// structural hash per node (kind, code, constant, binding, operands by
/// port), combined as a sorted multiset together with the domain, unroll
/// and remainder.
std::uint64_t dfg_hash(const DataFlowGraph &g);

/// `perm[old] = new`. Result has the same structure under new ids.
DataFlowGraph relabel(const DataFlowGraph &g, std::span<const std::size_t> perm);

/// Rewrites the graph so every Op consumes at most one Const (the overlay
/// masks a single pin per cell) and no Output is fed by a Const. Excess
/// constants are materialized by PASS nodes appended after existing ids.
DataFlowGraph legalize_for_overlay(const DataFlowGraph &g);

// Line-oriented text format:
//   dfg 1
//   loop <var> <bound>
//   unroll <u>
//   remainder <r>
//   node <id> input | output | const <v> | <OPCODE>
//   edge <src>:<port> -> <dst>:<port>
//   bind <id> <array> <access> <offset>/<stride>
std::string dfg_to_text(const DataFlowGraph &g);
/// Throws Error(Format).
DataFlowGraph dfg_from_text(std::string_view text);
std::string dfg_to_dot(const DataFlowGraph &g, std::string_view title = "dfg");

} // namespace dfe
