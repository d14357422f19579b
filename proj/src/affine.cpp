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

#include "dfe/affine.hpp"

#include "dfe/error.hpp"

#include <cctype>

namespace dfe {

AffineExpr AffineExpr::symbol(std::string name, std::int64_t coeff) {
  AffineExpr e;
  if (coeff != 0)
    e.terms_.emplace(std::move(name), coeff);
  return e;
}

std::int64_t AffineExpr::coeff(std::string_view name) const {
  auto it = terms_.find(name);
  return it == terms_.end() ? 0 : it->second;
}

void AffineExpr::normalize() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (it->second == 0)
      it = terms_.erase(it);
    else
      ++it;
  }
}

AffineExpr AffineExpr::operator+(const AffineExpr &rhs) const {
  AffineExpr r = *this;
  r.constant_ += rhs.constant_;
  for (const auto &[name, c] : rhs.terms_)
    r.terms_[name] += c;
  r.normalize();
  return r;
}

AffineExpr AffineExpr::operator-(const AffineExpr &rhs) const {
  return *this + rhs.scaled(-1);
}

AffineExpr AffineExpr::scaled(std::int64_t factor) const {
  AffineExpr r;
  r.constant_ = constant_ * factor;
  for (const auto &[name, c] : terms_)
    r.terms_.emplace(name, c * factor);
  r.normalize();
  return r;
}

AffineExpr AffineExpr::substituted(std::string_view name, std::int64_t stride,
                                   std::int64_t offset) const {
  const std::int64_t c = coeff(name);
  if (c == 0)
    return *this;
  AffineExpr r = *this;
  r.terms_.erase(r.terms_.find(name));
  return r + AffineExpr::symbol(std::string(name), c * stride) + AffineExpr(c * offset);
}

std::int64_t AffineExpr::evaluate(const Env &env) const {
  std::int64_t v = constant_;
  for (const auto &[name, c] : terms_) {
    auto it = env.find(name);
    if (it == env.end())
      throw Error(ErrorCode::UnknownIdentifier, "unbound symbol '" + name + "'");
    v += c * it->second;
  }
  return v;
}

std::string AffineExpr::to_string() const {
  std::string out;
  for (const auto &[name, c] : terms_) {
    if (c < 0)
      out += '-';
    else if (!out.empty())
      out += '+';
    const std::int64_t mag = c < 0 ? -c : c;
    if (mag != 1)
      out += std::to_string(mag) + "*";
    out += name;
  }
  if (constant_ != 0 || out.empty()) {
    if (constant_ < 0)
      out += std::to_string(constant_);
    else {
      if (!out.empty())
        out += '+';
      out += std::to_string(constant_);
    }
  }
  return out;
}

AffineExpr AffineExpr::parse(std::string_view text) {
  // term := [int '*'] ident | int ; expr := ['-'] term {('+'|'-') term}
  AffineExpr result;
  std::size_t i = 0;
  auto fail = [&](const char *what) -> AffineExpr {
    throw Error(ErrorCode::Format,
                "bad affine expression '" + std::string(text) + "': " + what);
  };
  if (text.empty())
    return fail("empty");
  bool first = true;
  while (i < text.size()) {
    std::int64_t sign = 1;
    if (text[i] == '+' || text[i] == '-') {
      sign = text[i] == '-' ? -1 : 1;
      ++i;
    } else if (!first) {
      return fail("expected '+' or '-'");
    }
    first = false;
    if (i >= text.size())
      return fail("dangling sign");
    std::int64_t number = 1;
    bool have_number = false;
    if (std::isdigit(static_cast<unsigned char>(text[i]))) {
      number = 0;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
        number = number * 10 + (text[i++] - '0');
      have_number = true;
      if (i < text.size() && text[i] == '*')
        ++i;
      else {
        result = result + AffineExpr(sign * number);
        continue;
      }
    }
    std::size_t start = i;
    while (i < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
      ++i;
    if (start == i || std::isdigit(static_cast<unsigned char>(text[start])))
      return fail(have_number ? "expected symbol after '*'" : "expected term");
    result = result + AffineExpr::symbol(std::string(text.substr(start, i - start)),
                                         sign * number);
  }
  return result;
}

std::string access_to_string(const AccessFunction &access) {
  if (access.empty())
    return "[]";
  std::string out;
  for (const auto &e : access)
    out += "[" + e.to_string() + "]";
  return out;
}

AccessFunction parse_access(std::string_view text) {
  if (text == "[]")
    return {};
  AccessFunction access;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '[')
      throw Error(ErrorCode::Format, "bad access '" + std::string(text) + "'");
    const std::size_t close = text.find(']', i);
    if (close == std::string_view::npos)
      throw Error(ErrorCode::Format, "unterminated access '" + std::string(text) + "'");
    access.push_back(AffineExpr::parse(text.substr(i + 1, close - i - 1)));
    i = close + 1;
  }
  if (access.empty())
    throw Error(ErrorCode::Format, "bad access '" + std::string(text) + "'");
  return access;
}

} // namespace dfe
