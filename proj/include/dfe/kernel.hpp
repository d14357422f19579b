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

// Kernel language AST, parser and pretty-printer. The grammar is documented
// in docs/kernel_grammar.ebnf.

#pragma once

#include "dfe/affine.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dfe {

enum class BinaryOp {
  Add, Sub, Mul, Div, Rem,
  Eq, Ne, Lt, Le, Gt, Ge,
  BitAnd, BitOr, BitXor, Shl, Shr,
  LogicalAnd, LogicalOr,
};

const char *binary_op_spelling(BinaryOp op);

struct SourcePos {
  int line = 0;
  int column = 0;
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum class Kind { IntLit, FloatLit, Var, ArrayRef, Neg, Binary, Select };

  Kind kind = Kind::IntLit;
  SourcePos pos;
  std::int64_t int_value = 0;
  std::string float_text;          // FloatLit, as written
  std::string name;                // Var, ArrayRef
  std::vector<ExprPtr> operands;   // ArrayRef indices, Neg(1), Binary(2), Select(3)
  BinaryOp op = BinaryOp::Add;

  ExprPtr clone() const;
};

bool operator==(const Expr &a, const Expr &b);

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
  enum class Kind { Assign, If, For };

  Kind kind = Kind::Assign;
  SourcePos pos;
  // Assign
  ExprPtr target; // ArrayRef
  ExprPtr value;
  // If
  ExprPtr cond;
  std::vector<StmtPtr> then_body;
  std::vector<StmtPtr> else_body;
  // For
  std::string var;
  ExprPtr lower;
  ExprPtr upper;
  std::int64_t step = 1;
  std::vector<StmtPtr> body;

  StmtPtr clone() const;
};

bool operator==(const Stmt &a, const Stmt &b);

enum class ElementType { Int32, Float32, Float64 };

struct ArrayDecl {
  std::string name;
  std::vector<ExprPtr> extents; // rank 1 or 2
  ElementType type = ElementType::Int32;
  SourcePos pos;

  std::size_t rank() const { return extents.size(); }
};

class Kernel {
public:
  Kernel() = default;
  Kernel(const Kernel &other);
  Kernel &operator=(const Kernel &other);
  Kernel(Kernel &&) noexcept = default;
  Kernel &operator=(Kernel &&) noexcept = default;

  std::string name;
  std::vector<std::string> params;
  std::vector<ArrayDecl> arrays;
  StmtPtr root; // outermost `for`

  const ArrayDecl *find_array(std::string_view name) const;
  bool is_param(std::string_view name) const;

  /// Loops from the root down, following single-`for` bodies.
  std::vector<const Stmt *> loop_nest() const;
  /// True when every loop but the innermost contains exactly one statement,
  /// a nested loop.
  bool is_perfect_nest() const;
  /// Statements of the innermost loop of the nest.
  const std::vector<StmtPtr> &innermost_body() const;

  /// Evaluated extents of every array, throws on unbound params.
  std::vector<std::int64_t> array_extents(const ArrayDecl &decl,
                                          const Env &params) const;

  friend bool operator==(const Kernel &a, const Kernel &b);
};

/// Parses kernel source. Throws SourceError with code Syntax or
/// UnknownIdentifier.
Kernel parse_kernel(std::string_view text);

/// Canonical source text; parse_kernel(print_kernel(k)) == k.
std::string print_kernel(const Kernel &k);

/// Tries to view an expression as affine over `symbols` (loop variables and
/// parameters). Returns nullopt for anything else.
std::optional<AffineExpr> to_affine(const Expr &e);

} // namespace dfe
