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

#include <algorithm>
#include <array>
#include <charconv>
#include <queue>
#include <set>
#include <sstream>

namespace dfe {

namespace {

struct OpInfo {
  OpCode code;
  const char *name;
  int arity;
};

constexpr OpInfo kOps[] = {
    {OpCode::Add, "ADD", 2}, {OpCode::Sub, "SUB", 2}, {OpCode::Mul, "MUL", 2},
    {OpCode::Eq, "EQ", 2},   {OpCode::Ne, "NE", 2},   {OpCode::Lt, "LT", 2},
    {OpCode::Le, "LE", 2},   {OpCode::Gt, "GT", 2},   {OpCode::Ge, "GE", 2},
    {OpCode::Mux, "MUX", 3}, {OpCode::Pass, "PASS", 1},
};

const OpInfo *info(OpCode code) {
  for (const auto &i : kOps)
    if (i.code == code)
      return &i;
  return nullptr;
}

std::int32_t wrap(std::int64_t v) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(static_cast<std::uint64_t>(v)));
}

} // namespace

const char *opcode_name(OpCode code) {
  const OpInfo *i = info(code);
  return i ? i->name : "INVALID";
}

std::optional<OpCode> parse_opcode(std::string_view name) {
  for (const auto &i : kOps)
    if (name == i.name)
      return i.code;
  return std::nullopt;
}

bool is_valid_opcode(OpCode code) { return info(code) != nullptr; }

int opcode_arity(OpCode code) {
  const OpInfo *i = info(code);
  return i ? i->arity : 0;
}

std::int32_t apply_op(OpCode code, std::int32_t a, std::int32_t b, std::int32_t sel) {
  const std::int64_t x = a, y = b;
  switch (code) {
  case OpCode::Add: return wrap(x + y);
  case OpCode::Sub: return wrap(x - y);
  case OpCode::Mul: return wrap(x * y);
  case OpCode::Eq: return a == b;
  case OpCode::Ne: return a != b;
  case OpCode::Lt: return a < b;
  case OpCode::Le: return a <= b;
  case OpCode::Gt: return a > b;
  case OpCode::Ge: return a >= b;
  case OpCode::Mux: return sel != 0 ? a : b;
  case OpCode::Pass: return a;
  }
  throw Error(ErrorCode::InvalidArgument, "invalid op code");
}

// ---------------------------------------------------------------------------
// DataFlowGraph

NodeId DataFlowGraph::add_input(std::string array, AccessFunction access, Lane lane) {
  const NodeId id = node_id(nodes_.size());
  nodes_.push_back(Node{id, NodeKind::Input, OpCode::Add, 0});
  bindings_.push_back(IoBinding{id, std::move(array), std::move(access), lane});
  return id;
}

NodeId DataFlowGraph::add_output(std::string array, AccessFunction access, Lane lane) {
  const NodeId id = node_id(nodes_.size());
  nodes_.push_back(Node{id, NodeKind::Output, OpCode::Add, 0});
  bindings_.push_back(IoBinding{id, std::move(array), std::move(access), lane});
  return id;
}

NodeId DataFlowGraph::add_const(std::int32_t value) {
  const NodeId id = node_id(nodes_.size());
  nodes_.push_back(Node{id, NodeKind::Const, OpCode::Add, value});
  return id;
}

NodeId DataFlowGraph::add_op(OpCode code) {
  const NodeId id = node_id(nodes_.size());
  nodes_.push_back(Node{id, NodeKind::Op, code, 0});
  return id;
}

void DataFlowGraph::connect(NodeId src, NodeId dst, std::uint8_t dst_port) {
  edges_.push_back(Edge{src, 0, dst, dst_port});
}

const IoBinding *DataFlowGraph::binding(NodeId id) const {
  for (const auto &b : bindings_)
    if (b.node == id)
      return &b;
  return nullptr;
}

std::optional<NodeId> DataFlowGraph::producer(NodeId node, std::uint8_t port) const {
  for (const auto &e : edges_)
    if (e.dst == node && e.dst_port == port)
      return e.src;
  return std::nullopt;
}

std::vector<Edge> DataFlowGraph::in_edges(NodeId node) const {
  std::vector<Edge> out;
  for (const auto &e : edges_)
    if (e.dst == node)
      out.push_back(e);
  std::sort(out.begin(), out.end(), [](const Edge &a, const Edge &b) {
    return a.dst_port < b.dst_port;
  });
  return out;
}

std::vector<Edge> DataFlowGraph::out_edges(NodeId node) const {
  std::vector<Edge> out;
  for (const auto &e : edges_)
    if (e.src == node)
      out.push_back(e);
  return out;
}

std::vector<NodeId> DataFlowGraph::nodes_of(NodeKind kind) const {
  std::vector<NodeId> out;
  for (const auto &n : nodes_)
    if (n.kind == kind)
      out.push_back(n.id);
  return out;
}

std::optional<std::vector<NodeId>> DataFlowGraph::topological_order() const {
  const std::size_t n = nodes_.size();
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto &e : edges_) {
    if (idx(e.src) >= n || idx(e.dst) >= n)
      continue;
    succ[idx(e.src)].push_back(idx(e.dst));
    ++indeg[idx(e.dst)];
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0)
      ready.push(i);
  std::vector<NodeId> order;
  order.reserve(n);
  while (!ready.empty()) {
    const std::size_t i = ready.top();
    ready.pop();
    order.push_back(node_id(i));
    for (std::size_t s : succ[i])
      if (--indeg[s] == 0)
        ready.push(s);
  }
  if (order.size() != n)
    return std::nullopt;
  return order;
}

// ---------------------------------------------------------------------------
// Validation

const char *violation_kind_name(DfgViolation::Kind kind) {
  switch (kind) {
  case DfgViolation::Kind::Cycle: return "cycle";
  case DfgViolation::Kind::Arity: return "arity";
  case DfgViolation::Kind::DanglingPort: return "dangling-port";
  case DfgViolation::Kind::DuplicateEdge: return "duplicate-edge";
  case DfgViolation::Kind::UnsupportedCode: return "unsupported-code";
  case DfgViolation::Kind::Binding: return "binding";
  }
  return "unknown";
}

std::vector<DfgViolation> validate_dfg(const DataFlowGraph &g) {
  using K = DfgViolation::Kind;
  std::vector<DfgViolation> out;
  auto add = [&](K kind, std::optional<NodeId> node, std::string msg) {
    out.push_back(DfgViolation{kind, node, std::move(msg)});
  };
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i)
    if (idx(g.nodes()[i].id) != i)
      add(K::Binding, node_id(i), "node at position " + std::to_string(i) +
                                      " has id " + std::to_string(idx(g.nodes()[i].id)));

  std::vector<std::map<std::uint8_t, int>> ports(n);
  for (const auto &e : g.edges()) {
    if (idx(e.src) >= n || idx(e.dst) >= n) {
      add(K::DanglingPort, std::nullopt,
          "edge " + std::to_string(idx(e.src)) + " -> " + std::to_string(idx(e.dst)) +
              " references a missing node");
      continue;
    }
    if (e.src_port != 0)
      add(K::DanglingPort, e.src, "producer port " + std::to_string(e.src_port) +
                                      " does not exist");
    if (g.node(e.src).kind == NodeKind::Output)
      add(K::Arity, e.src, "output node " + std::to_string(idx(e.src)) + " has consumers");
    ++ports[idx(e.dst)][e.dst_port];
  }

  for (const auto &node : g.nodes()) {
    const std::size_t i = idx(node.id);
    if (i >= n)
      continue;
    int arity = 0;
    switch (node.kind) {
    case NodeKind::Input:
    case NodeKind::Const:
      arity = 0;
      break;
    case NodeKind::Output:
      arity = 1;
      break;
    case NodeKind::Op:
      if (!is_valid_opcode(node.code)) {
        add(K::UnsupportedCode, node.id,
            "node " + std::to_string(i) + " has unsupported op code " +
                std::to_string(static_cast<int>(node.code)));
        continue;
      }
      arity = opcode_arity(node.code);
      break;
    }
    const std::string name = "node " + std::to_string(i);
    for (const auto &[port, count] : ports[i]) {
      if (port >= arity)
        add(K::Arity, node.id, name + " takes " + std::to_string(arity) +
                                   " inputs but port " + std::to_string(port) + " is driven");
      else if (count > 1)
        add(K::DuplicateEdge, node.id, name + " port " + std::to_string(port) +
                                           " has " + std::to_string(count) + " drivers");
    }
    int missing = 0;
    for (int p = 0; p < arity; ++p)
      if (!ports[i].count(static_cast<std::uint8_t>(p)))
        ++missing;
    if (missing > 0) {
      add(K::Arity, node.id, name + " has " + std::to_string(arity - missing) + " of " +
                             std::to_string(arity) + " inputs connected");
    }

    const bool io = node.kind == NodeKind::Input || node.kind == NodeKind::Output;
    std::size_t bound = 0;
    for (const auto &b : g.bindings())
      if (b.node == node.id)
        ++bound;
    if (io && bound != 1)
      add(K::Binding, node.id, name + " needs exactly one memory binding, has " +
                                   std::to_string(bound));
    if (!io && bound != 0)
      add(K::Binding, node.id, name + " is not an I/O node but has a binding");
  }
  for (const auto &b : g.bindings()) {
    if (idx(b.node) >= n)
      add(K::Binding, std::nullopt,
          "binding for missing node " + std::to_string(idx(b.node)));
    if (b.lane.stride < 1 || b.lane.offset < 0 || b.lane.offset >= b.lane.stride)
      add(K::Binding, b.node, "lane " + std::to_string(b.lane.offset) + "/" +
                                  std::to_string(b.lane.stride) + " is malformed");
  }

  if (!g.topological_order()) {
    // Report one node that sits on a cycle: it survives repeated removal of
    // sources and sinks.
    std::vector<int> indeg(n, 0), outdeg(n, 0);
    std::vector<bool> alive(n, true);
    for (const auto &e : g.edges())
      if (idx(e.src) < n && idx(e.dst) < n) {
        ++indeg[idx(e.dst)];
        ++outdeg[idx(e.src)];
      }
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (!alive[i] || (indeg[i] > 0 && outdeg[i] > 0))
          continue;
        alive[i] = false;
        changed = true;
        for (const auto &e : g.edges()) {
          if (idx(e.src) >= n || idx(e.dst) >= n)
            continue;
          if (idx(e.src) == i && alive[idx(e.dst)])
            --indeg[idx(e.dst)];
          if (idx(e.dst) == i && alive[idx(e.src)])
            --outdeg[idx(e.src)];
        }
      }
    }
    std::optional<NodeId> on_cycle;
    for (std::size_t i = 0; i < n && !on_cycle; ++i)
      if (alive[i])
        on_cycle = node_id(i);
    add(K::Cycle, on_cycle,
        "graph has a cycle" +
            (on_cycle ? " through node " + std::to_string(idx(*on_cycle)) : std::string()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Interpretation and folding

ValueStreams interpret_dfg(const DataFlowGraph &g, const ValueStreams &inputs) {
  if (g.nodes_of(NodeKind::Input).empty())
    return interpret_dfg(g, inputs, 1);
  if (inputs.empty())
    throw Error(ErrorCode::InvalidArgument, "no input streams supplied");
  return interpret_dfg(g, inputs, inputs.begin()->second.size());
}

ValueStreams interpret_dfg(const DataFlowGraph &g, const ValueStreams &inputs,
                           std::size_t length) {
  if (auto v = validate_dfg(g); !v.empty())
    throw Error(ErrorCode::InvalidArgument, "invalid graph: " + v.front().message);
  for (const auto &[id, stream] : inputs) {
    if (idx(id) >= g.size() || g.node(id).kind != NodeKind::Input)
      throw Error(ErrorCode::UnknownInput,
                  "node " + std::to_string(idx(id)) + " is not an input");
    if (stream.size() != length)
      throw Error(ErrorCode::LengthMismatch,
                  "stream for input " + std::to_string(idx(id)) + " has " +
                      std::to_string(stream.size()) + " values, expected " +
                      std::to_string(length));
  }
  for (NodeId in : g.nodes_of(NodeKind::Input))
    if (!inputs.count(in))
      throw Error(ErrorCode::InvalidArgument,
                  "no stream for input " + std::to_string(idx(in)));

  const auto order = *g.topological_order();
  // Operands by port, resolved once.
  std::vector<std::array<std::size_t, 3>> operand(g.size(), {0, 0, 0});
  for (const auto &e : g.edges())
    operand[idx(e.dst)][e.dst_port] = idx(e.src);

  ValueStreams out;
  for (NodeId o : g.nodes_of(NodeKind::Output))
    out[o].resize(length);
  std::vector<std::int32_t> value(g.size(), 0);
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (NodeId id : order) {
      const Node &node = g.node(id);
      const auto &ops = operand[idx(id)];
      std::int32_t &v = value[idx(id)];
      switch (node.kind) {
      case NodeKind::Input:
        v = inputs.at(id)[pos];
        break;
      case NodeKind::Const:
        v = node.value;
        break;
      case NodeKind::Output:
        v = value[ops[0]];
        out[id][pos] = v;
        break;
      case NodeKind::Op:
        if (node.code == OpCode::Mux)
          v = apply_op(node.code, value[ops[1]], value[ops[2]], value[ops[0]]);
        else if (node.code == OpCode::Pass)
          v = value[ops[0]];
        else
          v = apply_op(node.code, value[ops[0]], value[ops[1]], 0);
        break;
      }
    }
  }
  return out;
}

DataFlowGraph fold_inputs_to_constants(const DataFlowGraph &g,
                                       const std::map<NodeId, std::int32_t> &known) {
  DataFlowGraph r = g;
  for (const auto &[id, value] : known) {
    if (idx(id) >= r.size() || r.node(id).kind != NodeKind::Input)
      throw Error(ErrorCode::UnknownInput,
                  "node " + std::to_string(idx(id)) + " is not an input");
    Node &n = r.mutable_nodes()[idx(id)];
    n.kind = NodeKind::Const;
    n.value = value;
    auto &b = r.mutable_bindings();
    b.erase(std::remove_if(b.begin(), b.end(),
                           [id](const IoBinding &x) { return x.node == id; }),
            b.end());
  }
  return r;
}

DfgStats dfg_stats(const DataFlowGraph &g) {
  DfgStats s;
  for (const auto &n : g.nodes()) {
    switch (n.kind) {
    case NodeKind::Input: ++s.inputs; break;
    case NodeKind::Output: ++s.outputs; break;
    case NodeKind::Const: ++s.consts; break;
    case NodeKind::Op: ++s.calc_nodes; break;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Hashing and relabeling

namespace {

class Fnv {
public:
  void bytes(const void *data, std::size_t n) {
    const auto *p = static_cast<const unsigned char *>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ull;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void str(std::string_view s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  std::uint64_t value() const { return h_; }

private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

} // namespace

std::uint64_t dfg_hash(const DataFlowGraph &g) {
  const auto order = g.topological_order();
  if (!order)
    throw Error(ErrorCode::InvalidArgument, "cannot hash a cyclic graph");
  std::vector<std::uint64_t> h(g.size(), 0);
  std::vector<std::vector<std::pair<std::uint8_t, std::size_t>>> operands(g.size());
  for (const auto &e : g.edges())
    operands[idx(e.dst)].emplace_back(e.dst_port, idx(e.src));
  for (NodeId id : *order) {
    const Node &n = g.node(id);
    Fnv f;
    f.u64(static_cast<std::uint64_t>(n.kind));
    if (n.kind == NodeKind::Op)
      f.u64(static_cast<std::uint64_t>(n.code));
    if (n.kind == NodeKind::Const)
      f.u64(static_cast<std::uint32_t>(n.value));
    if (const IoBinding *b = g.binding(id)) {
      f.str(b->array);
      f.str(access_to_string(b->access));
      f.u64(static_cast<std::uint64_t>(b->lane.offset));
      f.u64(static_cast<std::uint64_t>(b->lane.stride));
    }
    auto ops = operands[idx(id)];
    std::sort(ops.begin(), ops.end());
    for (const auto &[port, src] : ops) {
      f.u64(port);
      f.u64(h[src]);
    }
    h[idx(id)] = f.value();
  }
  std::vector<std::uint64_t> sorted = h;
  std::sort(sorted.begin(), sorted.end());
  Fnv f;
  f.u64(sorted.size());
  for (auto v : sorted)
    f.u64(v);
  f.u64(g.edges().size());
  for (const auto &d : g.domain) {
    f.str(d.var);
    f.str(d.bound.to_string());
  }
  f.u64(static_cast<std::uint64_t>(g.unroll));
  f.u64(g.remainder ? static_cast<std::uint64_t>(*g.remainder) + 1 : 0);
  return f.value();
}

DataFlowGraph relabel(const DataFlowGraph &g, std::span<const std::size_t> perm) {
  const std::size_t n = g.size();
  if (perm.size() != n)
    throw Error(ErrorCode::InvalidArgument, "permutation size mismatch");
  std::vector<bool> seen(n, false);
  for (std::size_t p : perm) {
    if (p >= n || seen[p])
      throw Error(ErrorCode::InvalidArgument, "not a permutation");
    seen[p] = true;
  }
  DataFlowGraph r;
  r.domain = g.domain;
  r.unroll = g.unroll;
  r.remainder = g.remainder;
  auto &nodes = r.mutable_nodes();
  nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Node node = g.nodes()[i];
    node.id = node_id(perm[i]);
    nodes[perm[i]] = node;
  }
  for (Edge e : g.edges()) {
    e.src = node_id(perm[idx(e.src)]);
    e.dst = node_id(perm[idx(e.dst)]);
    r.mutable_edges().push_back(e);
  }
  std::sort(r.mutable_edges().begin(), r.mutable_edges().end());
  for (IoBinding b : g.bindings()) {
    b.node = node_id(perm[idx(b.node)]);
    r.mutable_bindings().push_back(std::move(b));
  }
  std::sort(r.mutable_bindings().begin(), r.mutable_bindings().end(),
            [](const IoBinding &a, const IoBinding &b) { return a.node < b.node; });
  return r;
}

DataFlowGraph legalize_for_overlay(const DataFlowGraph &g) {
  DataFlowGraph r = g;
  std::map<NodeId, NodeId> materialized; // const -> PASS carrying it
  auto pass_for = [&](NodeId c) {
    auto it = materialized.find(c);
    if (it != materialized.end())
      return it->second;
    const NodeId p = r.add_op(OpCode::Pass);
    r.connect(c, p, 0);
    materialized.emplace(c, p);
    return p;
  };
  const std::size_t original = g.size();
  for (std::size_t i = 0; i < original; ++i) {
    const Node &n = g.nodes()[i];
    if (n.kind != NodeKind::Op && n.kind != NodeKind::Output)
      continue;
    const bool may_mask = n.kind == NodeKind::Op;
    bool masked = false;
    // Ports in ascending order: the lowest const port keeps the mask.
    std::vector<std::size_t> edge_idx;
    for (std::size_t e = 0; e < g.edges().size(); ++e)
      if (idx(g.edges()[e].dst) == i)
        edge_idx.push_back(e);
    std::sort(edge_idx.begin(), edge_idx.end(), [&](std::size_t a, std::size_t b) {
      return g.edges()[a].dst_port < g.edges()[b].dst_port;
    });
    for (std::size_t e : edge_idx) {
      const NodeId src = g.edges()[e].src;
      if (g.node(src).kind != NodeKind::Const)
        continue;
      if (may_mask && !masked) {
        masked = true;
        continue;
      }
      r.mutable_edges()[e].src = pass_for(src);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Text and DOT

std::string dfg_to_text(const DataFlowGraph &g) {
  std::ostringstream os;
  os << "dfg 1\n";
  for (const auto &d : g.domain)
    os << "loop " << d.var << ' ' << d.bound.to_string() << '\n';
  if (g.unroll != 1)
    os << "unroll " << g.unroll << '\n';
  if (g.remainder)
    os << "remainder " << *g.remainder << '\n';
  for (const auto &n : g.nodes()) {
    os << "node " << idx(n.id) << ' ';
    switch (n.kind) {
    case NodeKind::Input: os << "input"; break;
    case NodeKind::Output: os << "output"; break;
    case NodeKind::Const: os << "const " << n.value; break;
    case NodeKind::Op: os << opcode_name(n.code); break;
    }
    os << '\n';
  }
  for (const auto &e : g.edges())
    os << "edge " << idx(e.src) << ':' << int(e.src_port) << " -> " << idx(e.dst) << ':'
       << int(e.dst_port) << '\n';
  for (const auto &b : g.bindings())
    os << "bind " << idx(b.node) << ' ' << b.array << ' ' << access_to_string(b.access)
       << ' ' << b.lane.offset << '/' << b.lane.stride << '\n';
  return os.str();
}

namespace {

template <typename T> T parse_number(std::string_view s, int line) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error(ErrorCode::Format,
                "line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  return v;
}

std::pair<std::size_t, std::uint8_t> parse_endpoint(std::string_view s, int line) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorCode::Format, "line " + std::to_string(line) + ": expected id:port");
  return {parse_number<std::size_t>(s.substr(0, colon), line),
          parse_number<std::uint8_t>(s.substr(colon + 1), line)};
}

} // namespace

DataFlowGraph dfg_from_text(std::string_view text) {
  DataFlowGraph g;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  bool header = false;
  auto fail = [&](const std::string &msg) -> void {
    throw Error(ErrorCode::Format, "line " + std::to_string(line) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos)
      raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> w;
    for (std::string t; ls >> t;)
      w.push_back(t);
    if (w.empty())
      continue;
    if (!header) {
      if (w.size() != 2 || w[0] != "dfg" || w[1] != "1")
        fail("expected 'dfg 1' header");
      header = true;
      continue;
    }
    const std::string &kw = w[0];
    if (kw == "loop") {
      if (w.size() != 3)
        fail("expected 'loop <var> <bound>'");
      g.domain.push_back(LoopDim{w[1], AffineExpr::parse(w[2])});
    } else if (kw == "unroll") {
      if (w.size() != 2)
        fail("expected 'unroll <u>'");
      g.unroll = parse_number<std::int64_t>(w[1], line);
      if (g.unroll < 1)
        fail("unroll must be at least 1");
    } else if (kw == "remainder") {
      if (w.size() != 2)
        fail("expected 'remainder <r>'");
      g.remainder = parse_number<std::int64_t>(w[1], line);
    } else if (kw == "node") {
      if (w.size() < 3)
        fail("expected 'node <id> <kind>'");
      const auto id = parse_number<std::size_t>(w[1], line);
      if (id != g.size())
        fail("node ids must be dense and ascending");
      Node n{node_id(id), NodeKind::Op, OpCode::Add, 0};
      if (w[2] == "input" && w.size() == 3)
        n.kind = NodeKind::Input;
      else if (w[2] == "output" && w.size() == 3)
        n.kind = NodeKind::Output;
      else if (w[2] == "const" && w.size() == 4) {
        n.kind = NodeKind::Const;
        n.value = parse_number<std::int32_t>(w[3], line);
      } else if (auto code = parse_opcode(w[2]); code && w.size() == 3)
        n.code = *code;
      else
        fail("unknown node kind '" + w[2] + "'");
      g.mutable_nodes().push_back(n);
    } else if (kw == "edge") {
      if (w.size() != 4 || w[2] != "->")
        fail("expected 'edge <src>:<port> -> <dst>:<port>'");
      const auto [s, sp] = parse_endpoint(w[1], line);
      const auto [d, dp] = parse_endpoint(w[3], line);
      g.mutable_edges().push_back(Edge{node_id(s), sp, node_id(d), dp});
    } else if (kw == "bind") {
      if (w.size() != 5)
        fail("expected 'bind <id> <array> <access> <offset>/<stride>'");
      const auto slash = w[4].find('/');
      if (slash == std::string::npos)
        fail("expected <offset>/<stride>");
      IoBinding b;
      b.node = node_id(parse_number<std::size_t>(w[1], line));
      b.array = w[2];
      b.access = parse_access(w[3]);
      b.lane.offset = parse_number<std::int64_t>(std::string_view(w[4]).substr(0, slash), line);
      b.lane.stride = parse_number<std::int64_t>(std::string_view(w[4]).substr(slash + 1), line);
      g.mutable_bindings().push_back(std::move(b));
    } else {
      fail("unknown directive '" + kw + "'");
    }
  }
  if (!header)
    throw Error(ErrorCode::Format, "missing 'dfg 1' header");
  for (const auto &e : g.edges())
    if (idx(e.src) >= g.size() || idx(e.dst) >= g.size())
      throw Error(ErrorCode::Format, "edge references an undefined node");
  for (const auto &b : g.bindings())
    if (idx(b.node) >= g.size())
      throw Error(ErrorCode::Format, "binding references an undefined node");
  return g;
}

namespace {

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\')
      out += '\\';
    out += c;
  }
  return out;
}

} // namespace

std::string dfg_to_dot(const DataFlowGraph &g, std::string_view title) {
  std::ostringstream os;
  os << "digraph \"" << dot_escape(title) << "\" {\n  rankdir=TB;\n";
  for (const auto &n : g.nodes()) {
    os << "  n" << idx(n.id) << " [";
    const IoBinding *b = g.binding(n.id);
    const std::string where =
        b ? b->array + access_to_string(b->access) +
                (b->lane.stride > 1 ? " {" + std::to_string(b->lane.offset) + "+" +
                                          std::to_string(b->lane.stride) + "k}"
                                    : "")
          : "";
    switch (n.kind) {
    case NodeKind::Input:
      os << "shape=invhouse, label=\"" << dot_escape(where) << "\"";
      break;
    case NodeKind::Output:
      os << "shape=house, label=\"" << dot_escape(where) << "\"";
      break;
    case NodeKind::Const:
      os << "shape=box, style=filled, fillcolor=green, label=\"" << n.value << "\"";
      break;
    case NodeKind::Op:
      os << "shape=circle, label=\"" << opcode_name(n.code) << "\"";
      break;
    }
    os << "];\n";
  }
  for (const auto &e : g.edges())
    os << "  n" << idx(e.src) << " -> n" << idx(e.dst) << " [label=\"" << int(e.dst_port)
       << "\"];\n";
  os << "}\n";
  return os.str();
}

} // namespace dfe
