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

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dfe {

using Env = std::map<std::string, std::int64_t, std::less<>>;

/// sum(coeff[v] * v) + constant over named symbols (loop variables and
/// kernel parameters). Zero coefficients are never stored, so structural
/// equality is semantic equality.
class AffineExpr {
public:
  AffineExpr() = default;
  explicit AffineExpr(std::int64_t constant) : constant_(constant) {}
  static AffineExpr symbol(std::string name, std::int64_t coeff = 1);

  std::int64_t constant() const { return constant_; }
  std::int64_t coeff(std::string_view name) const;
  const std::map<std::string, std::int64_t, std::less<>> &terms() const {
    return terms_;
  }
  bool is_constant() const { return terms_.empty(); }
  bool uses(std::string_view name) const { return coeff(name) != 0; }

  AffineExpr operator+(const AffineExpr &rhs) const;
  AffineExpr operator-(const AffineExpr &rhs) const;
  AffineExpr scaled(std::int64_t factor) const;

  /// Replaces `name` by `stride * name + offset`.
  AffineExpr substituted(std::string_view name, std::int64_t stride,
                         std::int64_t offset) const;

  /// Throws Error(UnknownIdentifier) for an unbound symbol.
  std::int64_t evaluate(const Env &env) const;

  /// Canonical whitespace-free text, e.g. `2*i+j-1`, `N-1`, `0`.
  std::string to_string() const;
  /// Inverse of to_string(); throws Error(Format).
  static AffineExpr parse(std::string_view text);

  friend bool operator==(const AffineExpr &, const AffineExpr &) = default;
  friend auto operator<=>(const AffineExpr &a, const AffineExpr &b) {
    if (auto c = a.constant_ <=> b.constant_; c != 0)
      return c;
    return a.terms_ <=> b.terms_;
  }

private:
  void normalize();

  std::map<std::string, std::int64_t, std::less<>> terms_;
  std::int64_t constant_ = 0;
};

/// An array access: one affine index per dimension (rank 0 = scalar).
using AccessFunction = std::vector<AffineExpr>;

std::string access_to_string(const AccessFunction &access);
AccessFunction parse_access(std::string_view text);

} // namespace dfe
