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

#include "dfe/frontend.hpp"

#include "dfe/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace dfe {

const char *reason_name(RejectReason reason) {
  switch (reason) {
  case RejectReason::None: return "None";
  case RejectReason::Division: return "Division";
  case RejectReason::FloatingPoint: return "FloatingPoint";
  case RejectReason::TooSmall: return "TooSmall";
  case RejectReason::TooLarge: return "TooLarge";
  case RejectReason::NonAffine: return "NonAffine";
  case RejectReason::UnsupportedOp: return "UnsupportedOp";
  }
  return "Unknown";
}

const char *reason_label(RejectReason reason) {
  switch (reason) {
  case RejectReason::None: return "Yes";
  case RejectReason::Division: return "No, divisions";
  case RejectReason::FloatingPoint: return "No, fp data";
  case RejectReason::TooSmall: return "No, too small";
  case RejectReason::TooLarge: return "No, too large";
  case RejectReason::NonAffine: return "No, non-affine";
  case RejectReason::UnsupportedOp: return "No, unsupported op";
  }
  return "No";
}

namespace {

// --- structural checks -----------------------------------------------------

template <typename F> void visit_exprs(const Stmt &s, F &&f) {
  auto e = [&](const ExprPtr &x) {
    if (x)
      f(*x);
  };
  e(s.target);
  e(s.value);
  e(s.cond);
  e(s.lower);
  e(s.upper);
  for (const auto &c : s.then_body)
    visit_exprs(*c, f);
  for (const auto &c : s.else_body)
    visit_exprs(*c, f);
  for (const auto &c : s.body)
    visit_exprs(*c, f);
}

template <typename F> bool any_subexpr(const Expr &e, F &&pred) {
  if (pred(e))
    return true;
  for (const auto &o : e.operands)
    if (any_subexpr(*o, pred))
      return true;
  return false;
}

bool is_unsupported_binary(BinaryOp op) {
  switch (op) {
  case BinaryOp::BitAnd:
  case BinaryOp::BitOr:
  case BinaryOp::BitXor:
  case BinaryOp::Shl:
  case BinaryOp::Shr:
  case BinaryOp::LogicalAnd:
  case BinaryOp::LogicalOr:
    return true;
  default:
    return false;
  }
}

/// Loop variables appearing outside array subscripts.
bool uses_loop_var_as_value(const Expr &e, const std::set<std::string> &loop_vars) {
  if (e.kind == Expr::Kind::Var)
    return loop_vars.count(e.name) > 0;
  if (e.kind == Expr::Kind::ArrayRef)
    return false; // subscripts are checked for affinity separately
  for (const auto &o : e.operands)
    if (uses_loop_var_as_value(*o, loop_vars))
      return true;
  return false;
}

void collect_refs(const Expr &e, std::vector<const Expr *> &out) {
  if (e.kind == Expr::Kind::ArrayRef)
    out.push_back(&e);
  for (const auto &o : e.operands)
    collect_refs(*o, out);
}

void collect_body_refs(const std::vector<StmtPtr> &body, std::vector<const Expr *> &reads,
                       std::vector<const Expr *> &writes) {
  for (const auto &s : body) {
    switch (s->kind) {
    case Stmt::Kind::Assign:
      writes.push_back(s->target.get());
      for (const auto &i : s->target->operands)
        collect_refs(*i, reads);
      collect_refs(*s->value, reads);
      break;
    case Stmt::Kind::If:
      collect_refs(*s->cond, reads);
      collect_body_refs(s->then_body, reads, writes);
      collect_body_refs(s->else_body, reads, writes);
      break;
    case Stmt::Kind::For:
      break;
    }
  }
}

/// Rank of the integer matrix (rows x cols), by fraction-free elimination.
std::size_t matrix_rank(std::vector<std::vector<std::int64_t>> m) {
  std::size_t rank = 0;
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && m[pivot][c] == 0)
      ++pivot;
    if (pivot == rows)
      continue;
    std::swap(m[pivot], m[rank]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      if (m[r][c] == 0)
        continue;
      const std::int64_t a = m[rank][c], b = m[r][c];
      const std::int64_t g = std::gcd(a, b);
      for (std::size_t k = 0; k < cols; ++k)
        m[r][k] = m[r][k] * (a / g) - m[rank][k] * (b / g);
    }
    ++rank;
  }
  return rank;
}

RejectReason non_affine_reason(const Kernel &k, std::string &why) {
  const auto nest = k.loop_nest();
  if (nest.empty()) {
    why = "no loop nest";
    return RejectReason::NonAffine;
  }
  if (!k.is_perfect_nest()) {
    why = "imperfect loop nest";
    return RejectReason::NonAffine;
  }
  std::set<std::string> loop_vars;
  for (const Stmt *loop : nest) {
    const auto lo = to_affine(*loop->lower);
    if (!lo || !lo->is_constant() || lo->constant() != 0) {
      why = "loop '" + loop->var + "' does not start at 0";
      return RejectReason::NonAffine;
    }
    if (loop->step != 1) {
      why = "loop '" + loop->var + "' has step " + std::to_string(loop->step);
      return RejectReason::NonAffine;
    }
    const auto hi = to_affine(*loop->upper);
    if (!hi) {
      why = "bound of loop '" + loop->var + "' is not affine";
      return RejectReason::NonAffine;
    }
    for (const auto &[name, c] : hi->terms())
      if (!k.is_param(name)) {
        why = "bound of loop '" + loop->var + "' depends on '" + name + "'";
        return RejectReason::NonAffine;
      }
    loop_vars.insert(loop->var);
  }

  std::vector<const Expr *> reads, writes;
  collect_body_refs(k.innermost_body(), reads, writes);
  auto access_of = [&](const Expr &ref) -> std::optional<AccessFunction> {
    AccessFunction a;
    for (const auto &i : ref.operands) {
      auto e = to_affine(*i);
      if (!e)
        return std::nullopt;
      a.push_back(*e);
    }
    return a;
  };
  std::map<std::string, AccessFunction> written;
  for (const Expr *w : writes) {
    auto a = access_of(*w);
    if (!a) {
      why = "subscript of '" + w->name + "' is not affine";
      return RejectReason::NonAffine;
    }
    auto [it, fresh] = written.emplace(w->name, *a);
    if (!fresh && it->second != *a) {
      why = "'" + w->name + "' is written through two different subscripts";
      return RejectReason::NonAffine;
    }
  }
  for (const Expr *r : reads) {
    auto a = access_of(*r);
    if (!a) {
      why = "subscript of '" + r->name + "' is not affine";
      return RejectReason::NonAffine;
    }
    auto it = written.find(r->name);
    if (it != written.end() && it->second != *a) {
      why = "'" + r->name + "' is read through " + access_to_string(*a) +
            " but written through " + access_to_string(it->second);
      return RejectReason::NonAffine;
    }
  }
  // Written elements must be distinct across iterations.
  for (const auto &[name, access] : written) {
    std::vector<std::vector<std::int64_t>> m;
    for (const auto &e : access) {
      std::vector<std::int64_t> row;
      for (const Stmt *loop : nest)
        row.push_back(e.coeff(loop->var));
      m.push_back(std::move(row));
    }
    if (matrix_rank(m) < nest.size()) {
      why = "'" + name + access_to_string(access) +
            "' is written by more than one iteration";
      return RejectReason::NonAffine;
    }
  }
  return RejectReason::None;
}

} // namespace

RejectReason structural_rejection(const Kernel &k, std::string *detail) {
  std::string why;
  auto verdict = [&](RejectReason r) {
    if (detail)
      *detail = why;
    return r;
  };
  if (!k.root)
    return why = "empty kernel", verdict(RejectReason::NonAffine);

  for (const auto &a : k.arrays)
    if (a.type != ElementType::Int32)
      return why = "array '" + a.name + "' has a floating-point element type",
             verdict(RejectReason::FloatingPoint);
  bool fp = false, div = false, unsupported = false;
  visit_exprs(*k.root, [&](const Expr &e) {
    fp = fp || any_subexpr(e, [](const Expr &x) { return x.kind == Expr::Kind::FloatLit; });
    div = div || any_subexpr(e, [](const Expr &x) {
            return x.kind == Expr::Kind::Binary &&
                   (x.op == BinaryOp::Div || x.op == BinaryOp::Rem);
          });
    unsupported = unsupported || any_subexpr(e, [](const Expr &x) {
                    return x.kind == Expr::Kind::Binary && is_unsupported_binary(x.op);
                  });
  });
  if (fp)
    return why = "floating-point literal", verdict(RejectReason::FloatingPoint);
  if (div)
    return why = "division or remainder", verdict(RejectReason::Division);
  if (unsupported)
    return why = "bitwise or logical operator", verdict(RejectReason::UnsupportedOp);

  std::set<std::string> loop_vars;
  std::vector<const Stmt *> stack{k.root.get()};
  while (!stack.empty()) {
    const Stmt *s = stack.back();
    stack.pop_back();
    if (s->kind == Stmt::Kind::For)
      loop_vars.insert(s->var);
    for (const auto *v : {&s->then_body, &s->else_body, &s->body})
      for (const auto &c : *v)
        stack.push_back(c.get());
  }
  bool counter = false;
  std::vector<const Stmt *> all{k.root.get()};
  while (!all.empty()) {
    const Stmt *s = all.back();
    all.pop_back();
    if (s->value && uses_loop_var_as_value(*s->value, loop_vars))
      counter = true;
    if (s->cond && uses_loop_var_as_value(*s->cond, loop_vars))
      counter = true;
    for (const auto *v : {&s->then_body, &s->else_body, &s->body})
      for (const auto &c : *v)
        all.push_back(c.get());
  }
  if (counter)
    return why = "loop variable used as a data value", verdict(RejectReason::UnsupportedOp);

  const RejectReason r = non_affine_reason(k, why);
  return verdict(r);
}

// --- extraction ------------------------------------------------------------

namespace {

struct Value {
  bool is_const = false;
  std::int32_t c = 0;
  NodeId node{};

  static Value constant(std::int32_t v) { return Value{true, v, {}}; }
  static Value of(NodeId n) { return Value{false, 0, n}; }
  bool operator==(const Value &o) const {
    return is_const == o.is_const && (is_const ? c == o.c : node == o.node);
  }
};

using ElementKey = std::pair<std::string, AccessFunction>;

struct InputKey {
  std::string array;
  AccessFunction access;
  Lane lane;
  auto operator<=>(const InputKey &) const = default;
};

std::optional<OpCode> opcode_for(BinaryOp op) {
  switch (op) {
  case BinaryOp::Add: return OpCode::Add;
  case BinaryOp::Sub: return OpCode::Sub;
  case BinaryOp::Mul: return OpCode::Mul;
  case BinaryOp::Eq: return OpCode::Eq;
  case BinaryOp::Ne: return OpCode::Ne;
  case BinaryOp::Lt: return OpCode::Lt;
  case BinaryOp::Le: return OpCode::Le;
  case BinaryOp::Gt: return OpCode::Gt;
  case BinaryOp::Ge: return OpCode::Ge;
  default: return std::nullopt;
  }
}

class Extractor {
public:
  Extractor(const Kernel &k, std::int64_t unroll) : k_(k), unroll_(unroll) {
    for (const Stmt *loop : k.loop_nest())
      g_.domain.push_back(LoopDim{loop->var, *to_affine(*loop->upper)});
    inner_ = g_.domain.back().var;
  }

  DataFlowGraph run() {
    for (std::int64_t lane = 0; lane < unroll_; ++lane) {
      lane_ = lane;
      State state;
      exec_body(k_.innermost_body(), state);
      for (const ElementKey &key : order_)
        if (auto it = state.values.find(key); it != state.values.end()) {
          const NodeId out = g_.add_output(key.first, key.second, lane_for(key.second));
          g_.connect(materialize(it->second), out, 0);
        }
      order_.clear();
    }
    g_.unroll = unroll_;
    const AffineExpr &bound = g_.domain.back().bound;
    if (unroll_ > 1 && bound.is_constant())
      g_.remainder = bound.constant() % unroll_;
    return eliminate_dead(g_);
  }

private:
  struct State {
    std::map<ElementKey, Value> values;
  };

  Lane lane_for(const AccessFunction &access) const {
    bool uses_inner = false;
    for (const auto &e : access)
      uses_inner = uses_inner || e.uses(inner_);
    return uses_inner ? Lane{lane_, unroll_} : Lane{0, 1};
  }

  void exec_body(const std::vector<StmtPtr> &body, State &state) {
    for (const auto &s : body)
      exec(*s, state);
  }

  void exec(const Stmt &s, State &state) {
    if (s.kind == Stmt::Kind::Assign) {
      const Value v = eval(*s.value, state);
      write(state, key_of(*s.target), v);
      return;
    }
    // If: evaluate both arms on copies and merge with a MUX per element.
    const Value cond = eval(*s.cond, state);
    if (cond.is_const) {
      exec_body(cond.c != 0 ? s.then_body : s.else_body, state);
      return;
    }
    State then_state = state, else_state = state;
    exec_body(s.then_body, then_state);
    exec_body(s.else_body, else_state);
    std::set<ElementKey> touched;
    for (const auto *st : {&then_state, &else_state})
      for (const auto &[key, v] : st->values) {
        auto prior = state.values.find(key);
        if (prior == state.values.end() || !(prior->second == v))
          touched.insert(key);
      }
    for (const ElementKey &key : order_) {
      if (!touched.count(key))
        continue;
      const Value a = lookup(then_state, key);
      const Value b = lookup(else_state, key);
      write(state, key, a == b ? a : mux(cond, a, b));
    }
  }

  /// Current value of an element: written earlier in this lane or memory.
  Value lookup(const State &state, const ElementKey &key) {
    auto it = state.values.find(key);
    if (it != state.values.end())
      return it->second;
    return Value::of(input(key.first, key.second));
  }

  void write(State &state, const ElementKey &key, Value v) {
    if (std::find(order_.begin(), order_.end(), key) == order_.end())
      order_.push_back(key);
    state.values.insert_or_assign(key, v);
  }

  ElementKey key_of(const Expr &ref) const {
    AccessFunction access;
    for (const auto &i : ref.operands)
      access.push_back(*to_affine(*i));
    return {ref.name, access};
  }

  NodeId input(const std::string &array, const AccessFunction &access) {
    InputKey key{array, access, lane_for(access)};
    auto it = inputs_.find(key);
    if (it != inputs_.end())
      return it->second;
    const NodeId id = g_.add_input(array, access, key.lane);
    inputs_.emplace(std::move(key), id);
    return id;
  }

  NodeId materialize(const Value &v) {
    if (!v.is_const)
      return v.node;
    auto it = consts_.find(v.c);
    if (it != consts_.end())
      return it->second;
    const NodeId id = g_.add_const(v.c);
    consts_.emplace(v.c, id);
    return id;
  }

  Value op(OpCode code, const Value &a, const Value &b) {
    if (a.is_const && b.is_const)
      return Value::constant(apply_op(code, a.c, b.c, 0));
    const NodeId n = g_.add_op(code);
    g_.connect(materialize(a), n, 0);
    g_.connect(materialize(b), n, 1);
    return Value::of(n);
  }

  Value mux(const Value &sel, const Value &a, const Value &b) {
    if (sel.is_const)
      return sel.c != 0 ? a : b;
    if (a == b)
      return a;
    const NodeId n = g_.add_op(OpCode::Mux);
    g_.connect(materialize(sel), n, 0);
    g_.connect(materialize(a), n, 1);
    g_.connect(materialize(b), n, 2);
    return Value::of(n);
  }

  Value eval(const Expr &e, State &state) {
    switch (e.kind) {
    case Expr::Kind::IntLit:
      return Value::constant(static_cast<std::int32_t>(static_cast<std::uint32_t>(e.int_value)));
    case Expr::Kind::Var:
      // Parameters are scalar inputs; loop counters are rejected upstream.
      return Value::of(input(e.name, {}));
    case Expr::Kind::ArrayRef: {
      return lookup(state, key_of(e));
    }
    case Expr::Kind::Neg:
      return op(OpCode::Sub, Value::constant(0), eval(*e.operands[0], state));
    case Expr::Kind::Select: {
      const Value c = eval(*e.operands[0], state);
      const Value a = eval(*e.operands[1], state);
      const Value b = eval(*e.operands[2], state);
      return mux(c, a, b);
    }
    case Expr::Kind::Binary: {
      const auto code = opcode_for(e.op);
      if (!code)
        throw Error(ErrorCode::NotEligible, "operator has no overlay equivalent");
      const Value a = eval(*e.operands[0], state);
      const Value b = eval(*e.operands[1], state);
      return op(*code, a, b);
    }
    case Expr::Kind::FloatLit:
      break;
    }
    throw Error(ErrorCode::NotEligible, "floating-point value");
  }

  static DataFlowGraph eliminate_dead(const DataFlowGraph &g) {
    std::vector<bool> live(g.size(), false);
    std::vector<std::size_t> work;
    for (NodeId o : g.nodes_of(NodeKind::Output)) {
      live[idx(o)] = true;
      work.push_back(idx(o));
    }
    while (!work.empty()) {
      const std::size_t n = work.back();
      work.pop_back();
      for (const auto &e : g.edges())
        if (idx(e.dst) == n && !live[idx(e.src)]) {
          live[idx(e.src)] = true;
          work.push_back(idx(e.src));
        }
    }
    std::vector<std::size_t> remap(g.size(), 0);
    DataFlowGraph r;
    r.domain = g.domain;
    r.unroll = g.unroll;
    r.remainder = g.remainder;
    for (const auto &n : g.nodes()) {
      if (!live[idx(n.id)])
        continue;
      remap[idx(n.id)] = r.size();
      Node copy = n;
      copy.id = node_id(r.size());
      r.mutable_nodes().push_back(copy);
      if (const IoBinding *b = g.binding(n.id)) {
        IoBinding nb = *b;
        nb.node = copy.id;
        r.mutable_bindings().push_back(std::move(nb));
      }
    }
    for (const auto &e : g.edges())
      if (live[idx(e.dst)])
        r.mutable_edges().push_back(
            Edge{node_id(remap[idx(e.src)]), e.src_port, node_id(remap[idx(e.dst)]), e.dst_port});
    return r;
  }

  const Kernel &k_;
  std::int64_t unroll_;
  std::int64_t lane_ = 0;
  std::string inner_;
  DataFlowGraph g_;
  std::map<InputKey, NodeId> inputs_;
  std::map<std::int32_t, NodeId> consts_;
  std::vector<ElementKey> order_;
};

} // namespace

DataFlowGraph extract_dfg(const Kernel &k, const ExtractOptions &opts) {
  if (opts.unroll < 1)
    throw Error(ErrorCode::InvalidArgument, "unroll factor must be at least 1");
  std::string why;
  if (const RejectReason r = structural_rejection(k, &why); r != RejectReason::None)
    throw Error(ErrorCode::NotEligible,
                std::string("kernel is not eligible (") + reason_name(r) + "): " + why);
  DataFlowGraph g = Extractor(k, opts.unroll).run();
  const std::size_t calc = dfg_stats(g).calc_nodes;
  if (calc > opts.max_calc_nodes)
    throw Error(ErrorCode::UnrollTooLarge,
                "unrolled datapath has " + std::to_string(calc) +
                    " calc nodes, limit is " + std::to_string(opts.max_calc_nodes));
  return g;
}

EligibilityReport check_eligibility(const Kernel &k, const Thresholds &cfg) {
  EligibilityReport rep;
  const RejectReason structural = structural_rejection(k, &rep.detail);
  if (structural != RejectReason::None) {
    rep.verdict = Verdict::Rejected;
    rep.reason = structural;
    return rep;
  }
  const DataFlowGraph g = extract_dfg(k, {});
  rep.dfg_stats = dfg_stats(g);
  const std::size_t calc = rep.dfg_stats->calc_nodes;
  if (calc < cfg.min_calc_nodes) {
    rep.verdict = Verdict::Rejected;
    rep.reason = RejectReason::TooSmall;
    rep.detail = std::to_string(calc) + " calc nodes, minimum is " +
                 std::to_string(cfg.min_calc_nodes);
  } else if (calc > cfg.max_calc_nodes) {
    rep.verdict = Verdict::Rejected;
    rep.reason = RejectReason::TooLarge;
    rep.detail = std::to_string(calc) + " calc nodes, maximum is " +
                 std::to_string(cfg.max_calc_nodes);
  } else {
    rep.detail.clear();
  }
  return rep;
}

} // namespace dfe
