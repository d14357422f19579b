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

#include "dfe/kernel.hpp"

#include "dfe/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace dfe {

const char *binary_op_spelling(BinaryOp op) {
  switch (op) {
  case BinaryOp::Add: return "+";
  case BinaryOp::Sub: return "-";
  case BinaryOp::Mul: return "*";
  case BinaryOp::Div: return "/";
  case BinaryOp::Rem: return "%";
  case BinaryOp::Eq: return "==";
  case BinaryOp::Ne: return "!=";
  case BinaryOp::Lt: return "<";
  case BinaryOp::Le: return "<=";
  case BinaryOp::Gt: return ">";
  case BinaryOp::Ge: return ">=";
  case BinaryOp::BitAnd: return "&";
  case BinaryOp::BitOr: return "|";
  case BinaryOp::BitXor: return "^";
  case BinaryOp::Shl: return "<<";
  case BinaryOp::Shr: return ">>";
  case BinaryOp::LogicalAnd: return "&&";
  case BinaryOp::LogicalOr: return "||";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// AST utilities

ExprPtr Expr::clone() const {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->pos = pos;
  e->int_value = int_value;
  e->float_text = float_text;
  e->name = name;
  e->op = op;
  for (const auto &o : operands)
    e->operands.push_back(o->clone());
  return e;
}

bool operator==(const Expr &a, const Expr &b) {
  if (a.kind != b.kind || a.operands.size() != b.operands.size())
    return false;
  switch (a.kind) {
  case Expr::Kind::IntLit:
    if (a.int_value != b.int_value)
      return false;
    break;
  case Expr::Kind::FloatLit:
    if (a.float_text != b.float_text)
      return false;
    break;
  case Expr::Kind::Var:
  case Expr::Kind::ArrayRef:
    if (a.name != b.name)
      return false;
    break;
  case Expr::Kind::Binary:
    if (a.op != b.op)
      return false;
    break;
  case Expr::Kind::Neg:
  case Expr::Kind::Select:
    break;
  }
  for (std::size_t i = 0; i < a.operands.size(); ++i)
    if (!(*a.operands[i] == *b.operands[i]))
      return false;
  return true;
}

namespace {

bool same_expr(const ExprPtr &a, const ExprPtr &b) {
  if (!a || !b)
    return !a && !b;
  return *a == *b;
}

bool same_body(const std::vector<StmtPtr> &a, const std::vector<StmtPtr> &b) {
  if (a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(*a[i] == *b[i]))
      return false;
  return true;
}

std::vector<StmtPtr> clone_body(const std::vector<StmtPtr> &body) {
  std::vector<StmtPtr> out;
  out.reserve(body.size());
  for (const auto &s : body)
    out.push_back(s->clone());
  return out;
}

ExprPtr clone_or_null(const ExprPtr &e) { return e ? e->clone() : nullptr; }

} // namespace

StmtPtr Stmt::clone() const {
  auto s = std::make_unique<Stmt>();
  s->kind = kind;
  s->pos = pos;
  s->target = clone_or_null(target);
  s->value = clone_or_null(value);
  s->cond = clone_or_null(cond);
  s->then_body = clone_body(then_body);
  s->else_body = clone_body(else_body);
  s->var = var;
  s->lower = clone_or_null(lower);
  s->upper = clone_or_null(upper);
  s->step = step;
  s->body = clone_body(body);
  return s;
}

bool operator==(const Stmt &a, const Stmt &b) {
  if (a.kind != b.kind)
    return false;
  switch (a.kind) {
  case Stmt::Kind::Assign:
    return same_expr(a.target, b.target) && same_expr(a.value, b.value);
  case Stmt::Kind::If:
    return same_expr(a.cond, b.cond) && same_body(a.then_body, b.then_body) &&
           same_body(a.else_body, b.else_body);
  case Stmt::Kind::For:
    return a.var == b.var && a.step == b.step && same_expr(a.lower, b.lower) &&
           same_expr(a.upper, b.upper) && same_body(a.body, b.body);
  }
  return false;
}

Kernel::Kernel(const Kernel &other)
    : name(other.name), params(other.params),
      root(other.root ? other.root->clone() : nullptr) {
  for (const auto &d : other.arrays) {
    ArrayDecl c;
    c.name = d.name;
    c.type = d.type;
    c.pos = d.pos;
    for (const auto &e : d.extents)
      c.extents.push_back(e->clone());
    arrays.push_back(std::move(c));
  }
}

Kernel &Kernel::operator=(const Kernel &other) {
  if (this != &other) {
    Kernel copy(other);
    *this = std::move(copy);
  }
  return *this;
}

const ArrayDecl *Kernel::find_array(std::string_view n) const {
  for (const auto &a : arrays)
    if (a.name == n)
      return &a;
  return nullptr;
}

bool Kernel::is_param(std::string_view n) const {
  return std::find(params.begin(), params.end(), n) != params.end();
}

std::vector<const Stmt *> Kernel::loop_nest() const {
  std::vector<const Stmt *> nest;
  const Stmt *s = root.get();
  while (s && s->kind == Stmt::Kind::For) {
    nest.push_back(s);
    if (s->body.size() == 1 && s->body[0]->kind == Stmt::Kind::For)
      s = s->body[0].get();
    else
      break;
  }
  return nest;
}

namespace {

bool contains_loop(const std::vector<StmtPtr> &body) {
  for (const auto &s : body) {
    if (s->kind == Stmt::Kind::For)
      return true;
    if (s->kind == Stmt::Kind::If &&
        (contains_loop(s->then_body) || contains_loop(s->else_body)))
      return true;
  }
  return false;
}

} // namespace

bool Kernel::is_perfect_nest() const {
  const auto nest = loop_nest();
  return !nest.empty() && !contains_loop(nest.back()->body);
}

const std::vector<StmtPtr> &Kernel::innermost_body() const {
  static const std::vector<StmtPtr> kEmpty;
  const auto nest = loop_nest();
  return nest.empty() ? kEmpty : nest.back()->body;
}

std::vector<std::int64_t> Kernel::array_extents(const ArrayDecl &decl,
                                                const Env &env) const {
  std::vector<std::int64_t> dims;
  for (const auto &e : decl.extents) {
    auto a = to_affine(*e);
    if (!a)
      throw Error(ErrorCode::InvalidArgument,
                  "extent of '" + decl.name + "' is not affine");
    const std::int64_t v = a->evaluate(env);
    if (v < 0)
      throw Error(ErrorCode::InvalidArgument,
                  "negative extent for '" + decl.name + "'");
    dims.push_back(v);
  }
  return dims;
}

bool operator==(const Kernel &a, const Kernel &b) {
  if (a.name != b.name || a.params != b.params || a.arrays.size() != b.arrays.size())
    return false;
  for (std::size_t i = 0; i < a.arrays.size(); ++i) {
    const auto &x = a.arrays[i];
    const auto &y = b.arrays[i];
    if (x.name != y.name || x.type != y.type || x.extents.size() != y.extents.size())
      return false;
    for (std::size_t d = 0; d < x.extents.size(); ++d)
      if (!(*x.extents[d] == *y.extents[d]))
        return false;
  }
  if (!a.root || !b.root)
    return !a.root && !b.root;
  return *a.root == *b.root;
}

std::optional<AffineExpr> to_affine(const Expr &e) {
  switch (e.kind) {
  case Expr::Kind::IntLit:
    return AffineExpr(e.int_value);
  case Expr::Kind::Var:
    return AffineExpr::symbol(e.name);
  case Expr::Kind::Neg: {
    auto a = to_affine(*e.operands[0]);
    if (!a)
      return std::nullopt;
    return a->scaled(-1);
  }
  case Expr::Kind::Binary: {
    auto l = to_affine(*e.operands[0]);
    auto r = to_affine(*e.operands[1]);
    if (!l || !r)
      return std::nullopt;
    switch (e.op) {
    case BinaryOp::Add: return *l + *r;
    case BinaryOp::Sub: return *l - *r;
    case BinaryOp::Mul:
      if (l->is_constant())
        return r->scaled(l->constant());
      if (r->is_constant())
        return l->scaled(r->constant());
      return std::nullopt;
    default:
      return std::nullopt;
    }
  }
  default:
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

struct Token {
  enum class Kind { Ident, Int, Float, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

const std::set<std::string, std::less<>> kKeywords = {
    "kernel", "arrays", "for", "in", "step", "if", "else"};

class Lexer {
public:
  explicit Lexer(std::string_view src, SourcePos origin = {1, 1})
      : src_(src), origin_(origin) {}

  const Token &peek() {
    if (!peeked_) {
      tok_ = scan();
      peeked_ = true;
    }
    return tok_;
  }

  Token next() {
    Token t = peek();
    peeked_ = false;
    return t;
  }

  /// Raw text from offset `from` up to (excluding) the next `close` character;
  /// lexing resumes after it.
  std::string_view raw_until(std::size_t from, char close) {
    const std::size_t end = src_.find(close, from);
    if (end == std::string_view::npos)
      fail_at(from, std::string("expected '") + close + "'");
    peeked_ = false;
    pos_ = end + 1;
    return src_.substr(from, end - from);
  }

  SourcePos position(std::size_t offset) const {
    SourcePos p = origin_;
    for (std::size_t i = 0; i < offset && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++p.line;
        p.column = 1;
      } else {
        ++p.column;
      }
    }
    return p;
  }

  [[noreturn]] void fail_at(std::size_t offset, const std::string &msg,
                            ErrorCode code = ErrorCode::Syntax) const {
    const SourcePos p = position(offset);
    throw SourceError(code, msg, p.line, p.column);
  }

  std::string_view source() const { return src_; }

private:
  Token scan() {
    skip_space();
    Token t;
    t.begin = pos_;
    if (pos_ >= src_.size()) {
      t.kind = Token::Kind::End;
      t.end = pos_;
      return t;
    }
    const char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      t.kind = Token::Kind::Ident;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      t.kind = Token::Kind::Int;
      digits();
      if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
          std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
        ++pos_;
        digits();
        t.kind = Token::Kind::Float;
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t p = pos_ + 1;
        if (p < src_.size() && (src_[p] == '+' || src_[p] == '-'))
          ++p;
        if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
          pos_ = p;
          digits();
          t.kind = Token::Kind::Float;
        }
      }
      if (pos_ < src_.size() && (src_[pos_] == 'f' || src_[pos_] == 'F') &&
          t.kind == Token::Kind::Float)
        ++pos_;
    } else {
      static const char *kTwo[] = {"..", "==", "!=", "<=", ">=", "&&", "||", "<<",
                                   ">>", "+=", "-=", "*=", "/=", "%="};
      t.kind = Token::Kind::Punct;
      std::size_t len = 1;
      for (const char *two : kTwo)
        if (src_.substr(pos_, 2) == two)
          len = 2;
      if (len == 1 && std::string_view("+-*/%<>=!&|^?:;,(){}[]").find(c) ==
                          std::string_view::npos)
        fail_at(pos_, std::string("unexpected character '") + c + "'");
      pos_ += len;
    }
    t.end = pos_;
    t.text = std::string(src_.substr(t.begin, t.end - t.begin));
    return t;
  }

  void digits() {
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n')
          ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  SourcePos origin_;
  std::size_t pos_ = 0;
  Token tok_;
  bool peeked_ = false;
};

// ---------------------------------------------------------------------------
// Parser

struct Scope {
  const Kernel *kernel = nullptr;
  std::vector<std::string> loop_vars;
  bool params_only = false; // extents: parameters and literals only
};

class Parser {
public:
  Parser(Lexer &lex, Scope &scope) : lex_(lex), scope_(scope) {}

  Kernel parse_kernel_source() {
    Kernel k;
    scope_.kernel = &k;
    expect_keyword("kernel");
    k.name = expect_ident("kernel name");
    expect("(");
    if (!accept(")")) {
      do {
        const Token t = lex_.peek();
        std::string p = expect_ident("parameter name");
        if (k.is_param(p))
          lex_.fail_at(t.begin, "duplicate parameter '" + p + "'");
        k.params.push_back(std::move(p));
      } while (accept(","));
      expect(")");
    }
    if (is_keyword("arrays")) {
      lex_.next();
      expect(":");
      while (lex_.peek().kind == Token::Kind::Ident && !is_keyword("for")) {
        k.arrays.push_back(parse_array_decl(k));
        accept(",");
      }
    }
    if (!is_keyword("for"))
      fail("expected 'for'");
    k.root = parse_for();
    if (lex_.peek().kind != Token::Kind::End)
      fail("expected end of input after the loop nest");
    return k;
  }

  ExprPtr parse_expr() {
    ExprPtr cond = parse_binary(0);
    if (lex_.peek().text == "?" && lex_.peek().kind == Token::Kind::Punct) {
      const Token q = lex_.next();
      auto e = make(Expr::Kind::Select, q);
      e->pos = cond->pos;
      e->operands.push_back(std::move(cond));
      e->operands.push_back(parse_expr());
      expect(":");
      e->operands.push_back(parse_expr());
      return e;
    }
    return cond;
  }

  bool at_end() { return lex_.peek().kind == Token::Kind::End; }

private:
  ArrayDecl parse_array_decl(const Kernel &k) {
    ArrayDecl d;
    const Token nt = lex_.peek();
    d.pos = lex_.position(nt.begin);
    d.name = expect_ident("array name");
    if (k.find_array(d.name) || k.is_param(d.name))
      lex_.fail_at(nt.begin, "duplicate declaration of '" + d.name + "'");
    const Token open = expect("[");
    const std::string_view raw = lex_.raw_until(open.end, ']');
    split_extents(raw, open.end, d);
    while (lex_.peek().text == "[" && lex_.peek().kind == Token::Kind::Punct) {
      const Token o = lex_.next();
      if (d.extents.size() >= 2)
        lex_.fail_at(o.begin, "arrays have rank 1 or 2");
      bool bad = false;
      ExprPtr e = extent_expr(lex_.raw_until(o.end, ']'), o.end, bad, true);
      d.extents.push_back(std::move(e));
    }
    expect(":");
    const Token tt = lex_.peek();
    const std::string type = expect_ident("element type");
    if (type == "int32")
      d.type = ElementType::Int32;
    else if (type == "float32")
      d.type = ElementType::Float32;
    else if (type == "float64")
      d.type = ElementType::Float64;
    else
      lex_.fail_at(tt.begin, "unknown element type '" + type + "'");
    return d;
  }

  /// Parses `text` as one extent. With `strict`, errors are raised; otherwise
  /// `bad` reports failure and nullptr is returned.
  ExprPtr extent_expr(std::string_view text, std::size_t offset, bool &bad,
                      bool strict) {
    bad = false;
    Lexer sub(text, lex_.position(offset));
    Scope sc;
    sc.kernel = scope_.kernel;
    sc.params_only = true;
    Parser p(sub, sc);
    try {
      if (sub.peek().kind == Token::Kind::End)
        sub.fail_at(0, "empty extent");
      ExprPtr e = p.parse_expr();
      if (!p.at_end())
        sub.fail_at(sub.peek().begin, "unexpected '" + sub.peek().text + "' in extent");
      if (!to_affine(*e))
        sub.fail_at(0, "extent must be affine in the parameters");
      return e;
    } catch (const SourceError &) {
      if (strict)
        throw;
      bad = true;
      return nullptr;
    }
  }

  void split_extents(std::string_view raw, std::size_t offset, ArrayDecl &d) {
    struct Candidate {
      std::vector<ExprPtr> extents;
    };
    std::vector<Candidate> found;
    bool bad = false;
    if (ExprPtr whole = extent_expr(raw, offset, bad, false)) {
      Candidate c;
      c.extents.push_back(std::move(whole));
      found.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != 'x')
        continue;
      bool bad_l = false, bad_r = false;
      ExprPtr l = extent_expr(raw.substr(0, i), offset, bad_l, false);
      ExprPtr r = extent_expr(raw.substr(i + 1), offset + i + 1, bad_r, false);
      if (l && r) {
        Candidate c;
        c.extents.push_back(std::move(l));
        c.extents.push_back(std::move(r));
        found.push_back(std::move(c));
      }
    }
    if (found.size() == 1) {
      d.extents = std::move(found[0].extents);
      return;
    }
    if (found.size() > 1)
      lex_.fail_at(offset, "ambiguous extent '" + std::string(raw) + "'");
    // Re-run the whole-text parse strictly for a precise diagnostic.
    bool ignored = false;
    extent_expr(raw, offset, ignored, true);
    lex_.fail_at(offset, "bad extent '" + std::string(raw) + "'");
  }

  StmtPtr parse_for() {
    const Token ft = lex_.next();
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::For;
    s->pos = lex_.position(ft.begin);
    const Token vt = lex_.peek();
    s->var = expect_ident("loop variable");
    if (is_bound(s->var) || scope_.kernel->find_array(s->var))
      lex_.fail_at(vt.begin, "loop variable '" + s->var + "' shadows a declaration");
    expect_keyword("in");
    s->lower = parse_binary(0);
    expect("..");
    s->upper = parse_binary(0);
    if (is_keyword("step")) {
      lex_.next();
      const Token st = lex_.next();
      if (st.kind != Token::Kind::Int)
        lex_.fail_at(st.begin, "step must be a positive integer literal");
      s->step = parse_int(st);
      if (s->step <= 0)
        lex_.fail_at(st.begin, "step must be a positive integer literal");
    }
    scope_.loop_vars.push_back(s->var);
    s->body = parse_block();
    scope_.loop_vars.pop_back();
    return s;
  }

  std::vector<StmtPtr> parse_block() {
    expect("{");
    std::vector<StmtPtr> body;
    while (!(lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == "}")) {
      if (at_end())
        fail("expected '}'");
      body.push_back(parse_stmt());
    }
    lex_.next();
    return body;
  }

  StmtPtr parse_stmt() {
    if (is_keyword("for"))
      return parse_for();
    if (is_keyword("if"))
      return parse_if();
    return parse_assign();
  }

  StmtPtr parse_if() {
    const Token it = lex_.next();
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::If;
    s->pos = lex_.position(it.begin);
    s->cond = parse_expr();
    s->then_body = parse_block();
    if (is_keyword("else")) {
      lex_.next();
      if (is_keyword("if"))
        s->else_body.push_back(parse_if());
      else
        s->else_body = parse_block();
    }
    return s;
  }

  StmtPtr parse_assign() {
    const Token t = lex_.peek();
    if (t.kind != Token::Kind::Ident)
      fail("expected a statement");
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::Assign;
    s->pos = lex_.position(t.begin);
    ExprPtr target = parse_primary();
    if (target->kind != Expr::Kind::ArrayRef)
      lex_.fail_at(t.begin, "assignment target must be an array element");
    const Token op = lex_.next();
    std::optional<BinaryOp> compound;
    if (op.kind != Token::Kind::Punct)
      lex_.fail_at(op.begin, "expected '='");
    if (op.text == "+=") compound = BinaryOp::Add;
    else if (op.text == "-=") compound = BinaryOp::Sub;
    else if (op.text == "*=") compound = BinaryOp::Mul;
    else if (op.text == "/=") compound = BinaryOp::Div;
    else if (op.text == "%=") compound = BinaryOp::Rem;
    else if (op.text != "=")
      lex_.fail_at(op.begin, "expected '='");
    ExprPtr value = parse_expr();
    expect(";");
    if (compound) {
      auto b = std::make_unique<Expr>();
      b->kind = Expr::Kind::Binary;
      b->op = *compound;
      b->pos = target->pos;
      b->operands.push_back(target->clone());
      b->operands.push_back(std::move(value));
      value = std::move(b);
    }
    s->target = std::move(target);
    s->value = std::move(value);
    return s;
  }

  // Precedence climbing over the binary operators, lowest level first.
  static int precedence(std::string_view op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=") return 6;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 7;
    if (op == "<<" || op == ">>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    return -1;
  }

  static BinaryOp op_of(std::string_view s) {
    static const std::pair<const char *, BinaryOp> kOps[] = {
        {"+", BinaryOp::Add},     {"-", BinaryOp::Sub},    {"*", BinaryOp::Mul},
        {"/", BinaryOp::Div},     {"%", BinaryOp::Rem},    {"==", BinaryOp::Eq},
        {"!=", BinaryOp::Ne},     {"<", BinaryOp::Lt},     {"<=", BinaryOp::Le},
        {">", BinaryOp::Gt},      {">=", BinaryOp::Ge},    {"&", BinaryOp::BitAnd},
        {"|", BinaryOp::BitOr},   {"^", BinaryOp::BitXor}, {"<<", BinaryOp::Shl},
        {">>", BinaryOp::Shr},    {"&&", BinaryOp::LogicalAnd},
        {"||", BinaryOp::LogicalOr}};
    for (const auto &[text, op] : kOps)
      if (s == text)
        return op;
    return BinaryOp::Add;
  }

  ExprPtr parse_binary(int min_prec) {
    ExprPtr lhs = parse_unary();
    for (;;) {
      const Token &t = lex_.peek();
      if (t.kind != Token::Kind::Punct)
        return lhs;
      const int prec = precedence(t.text);
      if (prec < 0 || prec < min_prec)
        return lhs;
      const Token op = lex_.next();
      ExprPtr rhs = parse_binary(prec + 1);
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Binary;
      e->op = op_of(op.text);
      e->pos = lhs->pos;
      e->operands.push_back(std::move(lhs));
      e->operands.push_back(std::move(rhs));
      lhs = std::move(e);
    }
  }

  ExprPtr parse_unary() {
    const Token &t = lex_.peek();
    if (t.kind == Token::Kind::Punct && t.text == "-") {
      const Token m = lex_.next();
      auto e = make(Expr::Kind::Neg, m);
      e->operands.push_back(parse_unary());
      return e;
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    const Token t = lex_.next();
    switch (t.kind) {
    case Token::Kind::Int: {
      auto e = make(Expr::Kind::IntLit, t);
      e->int_value = parse_int(t);
      return e;
    }
    case Token::Kind::Float: {
      auto e = make(Expr::Kind::FloatLit, t);
      e->float_text = t.text;
      return e;
    }
    case Token::Kind::Ident:
      return parse_name(t);
    case Token::Kind::Punct:
      if (t.text == "(") {
        ExprPtr e = parse_expr();
        expect(")");
        return e;
      }
      lex_.fail_at(t.begin, "unexpected '" + t.text + "'");
    case Token::Kind::End:
      break;
    }
    lex_.fail_at(t.begin, "unexpected end of input");
  }

  ExprPtr parse_name(const Token &t) {
    if (kKeywords.count(t.text))
      lex_.fail_at(t.begin, "unexpected keyword '" + t.text + "'");
    const bool indexed = lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == "[";
    const Kernel &k = *scope_.kernel;
    if (!indexed) {
      if (scope_.params_only) {
        if (!k.is_param(t.text))
          lex_.fail_at(t.begin, "unknown parameter '" + t.text + "'",
                       ErrorCode::UnknownIdentifier);
      } else if (!is_bound(t.text)) {
        if (k.find_array(t.text))
          lex_.fail_at(t.begin, "array '" + t.text + "' used without an index");
        lex_.fail_at(t.begin, "use of undeclared identifier '" + t.text + "'",
                     ErrorCode::UnknownIdentifier);
      }
      auto e = make(Expr::Kind::Var, t);
      e->name = t.text;
      return e;
    }
    if (scope_.params_only)
      lex_.fail_at(t.begin, "array reference in an extent");
    const ArrayDecl *decl = k.find_array(t.text);
    if (!decl)
      lex_.fail_at(t.begin, "use of undeclared array '" + t.text + "'",
                   ErrorCode::UnknownIdentifier);
    auto e = make(Expr::Kind::ArrayRef, t);
    e->name = t.text;
    while (lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == "[") {
      lex_.next();
      e->operands.push_back(parse_expr());
      expect("]");
    }
    if (e->operands.size() != decl->rank())
      lex_.fail_at(t.begin, "array '" + t.text + "' has rank " +
                                std::to_string(decl->rank()) + ", indexed with " +
                                std::to_string(e->operands.size()));
    return e;
  }

  bool is_bound(std::string_view name) const {
    return scope_.kernel->is_param(name) ||
           std::find(scope_.loop_vars.begin(), scope_.loop_vars.end(), name) !=
               scope_.loop_vars.end();
  }

  std::int64_t parse_int(const Token &t) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size())
      lex_.fail_at(t.begin, "integer literal out of range");
    return v;
  }

  ExprPtr make(Expr::Kind kind, const Token &t) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->pos = lex_.position(t.begin);
    return e;
  }

  bool is_keyword(std::string_view kw) {
    const Token &t = lex_.peek();
    return t.kind == Token::Kind::Ident && t.text == kw;
  }

  void expect_keyword(std::string_view kw) {
    if (!is_keyword(kw))
      fail("expected '" + std::string(kw) + "'");
    lex_.next();
  }

  std::string expect_ident(const char *what) {
    const Token t = lex_.peek();
    if (t.kind != Token::Kind::Ident || kKeywords.count(t.text))
      fail(std::string("expected ") + what);
    lex_.next();
    return t.text;
  }

  bool accept(std::string_view p) {
    const Token &t = lex_.peek();
    if (t.kind == Token::Kind::Punct && t.text == p) {
      lex_.next();
      return true;
    }
    return false;
  }

  Token expect(std::string_view p) {
    const Token t = lex_.peek();
    if (t.kind != Token::Kind::Punct || t.text != p)
      fail("expected '" + std::string(p) + "'");
    return lex_.next();
  }

  [[noreturn]] void fail(const std::string &msg) {
    const Token t = lex_.peek();
    const std::string found = t.kind == Token::Kind::End ? "end of input" : "'" + t.text + "'";
    lex_.fail_at(t.begin, msg + ", found " + found);
  }

  Lexer &lex_;
  Scope &scope_;
};

// ---------------------------------------------------------------------------
// Printer

int expr_prec(const Expr &e) {
  switch (e.kind) {
  case Expr::Kind::Select: return 0;
  case Expr::Kind::Binary: {
    switch (e.op) {
    case BinaryOp::LogicalOr: return 1;
    case BinaryOp::LogicalAnd: return 2;
    case BinaryOp::BitOr: return 3;
    case BinaryOp::BitXor: return 4;
    case BinaryOp::BitAnd: return 5;
    case BinaryOp::Eq: case BinaryOp::Ne: return 6;
    case BinaryOp::Lt: case BinaryOp::Le: case BinaryOp::Gt: case BinaryOp::Ge: return 7;
    case BinaryOp::Shl: case BinaryOp::Shr: return 8;
    case BinaryOp::Add: case BinaryOp::Sub: return 9;
    default: return 10;
    }
  }
  case Expr::Kind::Neg: return 11;
  default: return 12;
  }
}

void print_expr(const Expr &e, std::string &out, int min_prec = 0);

void print_operand(const Expr &e, std::string &out, int min_prec) {
  if (expr_prec(e) < min_prec) {
    out += '(';
    print_expr(e, out, 0);
    out += ')';
  } else {
    print_expr(e, out, min_prec);
  }
}

void print_expr(const Expr &e, std::string &out, int) {
  switch (e.kind) {
  case Expr::Kind::IntLit:
    out += std::to_string(e.int_value);
    break;
  case Expr::Kind::FloatLit:
    out += e.float_text;
    break;
  case Expr::Kind::Var:
    out += e.name;
    break;
  case Expr::Kind::ArrayRef:
    out += e.name;
    for (const auto &i : e.operands) {
      out += '[';
      print_expr(*i, out);
      out += ']';
    }
    break;
  case Expr::Kind::Neg:
    out += '-';
    print_operand(*e.operands[0], out, 11);
    break;
  case Expr::Kind::Binary: {
    const int p = expr_prec(e);
    print_operand(*e.operands[0], out, p);
    out += ' ';
    out += binary_op_spelling(e.op);
    out += ' ';
    print_operand(*e.operands[1], out, p + 1);
    break;
  }
  case Expr::Kind::Select:
    print_operand(*e.operands[0], out, 1);
    out += " ? ";
    print_operand(*e.operands[1], out, 0);
    out += " : ";
    print_operand(*e.operands[2], out, 0);
    break;
  }
}

void print_body(const std::vector<StmtPtr> &body, std::string &out, int depth);

void print_stmt(const Stmt &s, std::string &out, int depth, bool continued = false) {
  const std::string ind(static_cast<std::size_t>(depth) * 2, ' ');
  if (!continued)
    out += ind;
  switch (s.kind) {
  case Stmt::Kind::Assign:
    print_expr(*s.target, out);
    out += " = ";
    print_expr(*s.value, out);
    out += ";\n";
    break;
  case Stmt::Kind::If:
    out += "if ";
    print_expr(*s.cond, out);
    out += " {\n";
    print_body(s.then_body, out, depth + 1);
    out += ind + "}";
    if (s.else_body.size() == 1 && s.else_body[0]->kind == Stmt::Kind::If) {
      out += " else ";
      print_stmt(*s.else_body[0], out, depth, true);
      return;
    }
    if (!s.else_body.empty()) {
      out += " else {\n";
      print_body(s.else_body, out, depth + 1);
      out += ind + "}";
    }
    out += "\n";
    break;
  case Stmt::Kind::For:
    out += "for " + s.var + " in ";
    print_operand(*s.lower, out, 1);
    out += "..";
    print_operand(*s.upper, out, 1);
    if (s.step != 1)
      out += " step " + std::to_string(s.step);
    out += " {\n";
    print_body(s.body, out, depth + 1);
    out += ind + "}\n";
    break;
  }
}

void print_body(const std::vector<StmtPtr> &body, std::string &out, int depth) {
  for (const auto &s : body)
    print_stmt(*s, out, depth);
}

const char *type_name(ElementType t) {
  switch (t) {
  case ElementType::Int32: return "int32";
  case ElementType::Float32: return "float32";
  case ElementType::Float64: return "float64";
  }
  return "int32";
}

} // namespace

Kernel parse_kernel(std::string_view text) {
  Lexer lex(text);
  Scope scope;
  Parser p(lex, scope);
  return p.parse_kernel_source();
}

std::string print_kernel(const Kernel &k) {
  std::string out = "kernel " + k.name + "(";
  for (std::size_t i = 0; i < k.params.size(); ++i) {
    if (i)
      out += ", ";
    out += k.params[i];
  }
  out += ")\n";
  if (!k.arrays.empty()) {
    out += "arrays:\n";
    for (const auto &a : k.arrays) {
      out += "  " + a.name;
      for (const auto &e : a.extents) {
        out += '[';
        print_expr(*e, out);
        out += ']';
      }
      out += std::string(":") + type_name(a.type) + "\n";
    }
  }
  if (k.root)
    print_stmt(*k.root, out, 0);
  return out;
}

} // namespace dfe
