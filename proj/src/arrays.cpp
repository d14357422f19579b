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

#include "dfe/arrays.hpp"

#include "dfe/error.hpp"
#include "dfe/kernel.hpp"

#include <cmath>
#include <limits>

namespace dfe {

ArrayData::ArrayData(std::vector<std::int64_t> d) : dims(std::move(d)) {
  std::size_t n = 1;
  for (auto e : dims) {
    if (e < 0)
      throw Error(ErrorCode::InvalidArgument, "negative array extent");
    n *= static_cast<std::size_t>(e);
  }
  values.assign(n, 0);
}

std::size_t ArrayData::offset(std::span<const std::int64_t> index) const {
  if (index.size() != dims.size())
    throw Error(ErrorCode::OutOfBounds, "index rank does not match the array");
  std::size_t off = 0;
  for (std::size_t d = 0; d < dims.size(); ++d) {
    if (index[d] < 0 || index[d] >= dims[d])
      throw Error(ErrorCode::OutOfBounds, "index " + std::to_string(index[d]) +
                                              " outside extent " +
                                              std::to_string(dims[d]));
    off = off * static_cast<std::size_t>(dims[d]) + static_cast<std::size_t>(index[d]);
  }
  return off;
}

ArrayStore allocate_arrays(const Kernel &k, const Env &params) {
  ArrayStore store;
  for (const auto &decl : k.arrays)
    store.emplace(decl.name, ArrayData(k.array_extents(decl, params)));
  return store;
}

namespace {

std::int32_t wrap(std::int64_t v) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(static_cast<std::uint64_t>(v)));
}

bool has_float(const Expr &e) {
  if (e.kind == Expr::Kind::FloatLit)
    return true;
  for (const auto &o : e.operands)
    if (has_float(*o))
      return true;
  return false;
}

std::int32_t truncate_to_int32(double v) {
  if (std::isnan(v))
    return 0;
  if (v >= 2147483647.0)
    return std::numeric_limits<std::int32_t>::max();
  if (v <= -2147483648.0)
    return std::numeric_limits<std::int32_t>::min();
  return static_cast<std::int32_t>(v);
}

class Interpreter {
public:
  Interpreter(const Kernel &k, ArrayStore &arrays, const Env &params,
              std::optional<InnermostRange> range)
      : k_(k), arrays_(arrays), env_(params), range_(range) {
    const auto nest = k.loop_nest();
    innermost_ = nest.empty() ? nullptr : nest.back();
  }

  void run() {
    if (k_.root)
      exec(*k_.root);
  }

private:
  void exec(const Stmt &s) {
    switch (s.kind) {
    case Stmt::Kind::Assign: {
      ArrayData &a = array(s.target->name);
      const std::size_t off = a.offset(indices(*s.target));
      a.values[off] = has_float(*s.value) ? truncate_to_int32(eval_fp(*s.value))
                                          : eval_int(*s.value);
      break;
    }
    case Stmt::Kind::If:
      for (const auto &c : eval_int(*s.cond) != 0 ? s.then_body : s.else_body)
        exec(*c);
      break;
    case Stmt::Kind::For: {
      std::int64_t lo = eval_int(*s.lower);
      std::int64_t hi = eval_int(*s.upper);
      if (&s == innermost_ && range_) {
        lo = std::max(lo, range_->begin);
        hi = std::min(hi, range_->end);
      }
      for (std::int64_t v = lo; v < hi; v += s.step) {
        env_.insert_or_assign(s.var, v);
        for (const auto &c : s.body)
          exec(*c);
      }
      env_.erase(s.var);
      break;
    }
    }
  }

  ArrayData &array(const std::string &name) {
    auto it = arrays_.find(name);
    if (it == arrays_.end())
      throw Error(ErrorCode::InvalidArgument, "array '" + name + "' is not allocated");
    return it->second;
  }

  std::vector<std::int64_t> indices(const Expr &ref) {
    std::vector<std::int64_t> idx;
    idx.reserve(ref.operands.size());
    for (const auto &i : ref.operands)
      idx.push_back(eval_int(*i));
    return idx;
  }

  std::int64_t var(const std::string &name) const {
    auto it = env_.find(name);
    if (it == env_.end())
      throw Error(ErrorCode::UnknownIdentifier, "unbound symbol '" + name + "'");
    return it->second;
  }

  std::int32_t eval_int(const Expr &e) {
    switch (e.kind) {
    case Expr::Kind::IntLit:
      return wrap(e.int_value);
    case Expr::Kind::FloatLit:
      return truncate_to_int32(std::stod(e.float_text));
    case Expr::Kind::Var:
      return wrap(var(e.name));
    case Expr::Kind::ArrayRef: {
      const ArrayData &a = array(e.name);
      return a.values[a.offset(indices(e))];
    }
    case Expr::Kind::Neg:
      return wrap(-static_cast<std::int64_t>(eval_int(*e.operands[0])));
    case Expr::Kind::Select:
      return eval_int(*e.operands[0]) != 0 ? eval_int(*e.operands[1])
                                           : eval_int(*e.operands[2]);
    case Expr::Kind::Binary:
      break;
    }
    const std::int64_t a = eval_int(*e.operands[0]);
    const std::int64_t b = eval_int(*e.operands[1]);
    switch (e.op) {
    case BinaryOp::Add: return wrap(a + b);
    case BinaryOp::Sub: return wrap(a - b);
    case BinaryOp::Mul: return wrap(a * b);
    case BinaryOp::Div: return b == 0 ? 0 : wrap(a / b);
    case BinaryOp::Rem: return b == 0 ? 0 : wrap(a % b);
    case BinaryOp::Eq: return a == b;
    case BinaryOp::Ne: return a != b;
    case BinaryOp::Lt: return a < b;
    case BinaryOp::Le: return a <= b;
    case BinaryOp::Gt: return a > b;
    case BinaryOp::Ge: return a >= b;
    case BinaryOp::BitAnd: return wrap(a & b);
    case BinaryOp::BitOr: return wrap(a | b);
    case BinaryOp::BitXor: return wrap(a ^ b);
    case BinaryOp::Shl:
      return wrap(static_cast<std::int64_t>(static_cast<std::uint32_t>(a) << (b & 31)));
    case BinaryOp::Shr: return wrap(static_cast<std::int32_t>(a) >> (b & 31));
    case BinaryOp::LogicalAnd: return a != 0 && b != 0;
    case BinaryOp::LogicalOr: return a != 0 || b != 0;
    }
    return 0;
  }

  double eval_fp(const Expr &e) {
    switch (e.kind) {
    case Expr::Kind::FloatLit:
      return std::stod(e.float_text);
    case Expr::Kind::Neg:
      return -eval_fp(*e.operands[0]);
    case Expr::Kind::Select:
      return eval_fp(*e.operands[0]) != 0 ? eval_fp(*e.operands[1])
                                          : eval_fp(*e.operands[2]);
    case Expr::Kind::Binary:
      break;
    default:
      return eval_int(e);
    }
    const double a = eval_fp(*e.operands[0]);
    const double b = eval_fp(*e.operands[1]);
    switch (e.op) {
    case BinaryOp::Add: return a + b;
    case BinaryOp::Sub: return a - b;
    case BinaryOp::Mul: return a * b;
    case BinaryOp::Div: return b == 0 ? 0 : a / b;
    case BinaryOp::Rem: return b == 0 ? 0 : std::fmod(a, b);
    case BinaryOp::Eq: return a == b;
    case BinaryOp::Ne: return a != b;
    case BinaryOp::Lt: return a < b;
    case BinaryOp::Le: return a <= b;
    case BinaryOp::Gt: return a > b;
    case BinaryOp::Ge: return a >= b;
    case BinaryOp::LogicalAnd: return a != 0 && b != 0;
    case BinaryOp::LogicalOr: return a != 0 || b != 0;
    default:
      // Bitwise operators act on the truncated integer operands.
      return eval_int(e);
    }
  }

  const Kernel &k_;
  ArrayStore &arrays_;
  Env env_;
  std::optional<InnermostRange> range_;
  const Stmt *innermost_ = nullptr;
};

} // namespace

void run_software(const Kernel &k, ArrayStore &arrays, const Env &params,
                  std::optional<InnermostRange> innermost) {
  Interpreter(k, arrays, params, innermost).run();
}

} // namespace dfe
