// Copyright 2026 The tdnh Authors
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

#include "tdnh/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

namespace tdnh::expr {

namespace {

struct FunctionEntry {
  std::string_view name;
  NodeKind kind;
};

constexpr std::array<FunctionEntry, 10> kFunctions{{
    {"sin", NodeKind::Sin},
    {"cos", NodeKind::Cos},
    {"tan", NodeKind::Tan},
    {"sinh", NodeKind::Sinh},
    {"cosh", NodeKind::Cosh},
    {"tanh", NodeKind::Tanh},
    {"exp", NodeKind::Exp},
    {"log", NodeKind::Log},
    {"sqrt", NodeKind::Sqrt},
    {"atan", NodeKind::Atan},
}};

std::string join(const std::set<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += "'" + s + "'";
  }
  return out;
}

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind = Tok::End;
  std::size_t offset = 0;
  std::string_view text;
  double number = 0.0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    current_ = Token{};
    current_.offset = pos_;
    if (pos_ >= src_.size()) {
      current_.kind = Tok::End;
      return;
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
        ++end;
      current_.kind = Tok::Ident;
      current_.text = src_.substr(pos_, end - pos_);
      pos_ = end;
      return;
    }
    switch (c) {
      case '+': current_.kind = Tok::Plus; break;
      case '-': current_.kind = Tok::Minus; break;
      case '*': current_.kind = Tok::Star; break;
      case '/': current_.kind = Tok::Slash; break;
      case '^': current_.kind = Tok::Caret; break;
      case '(': current_.kind = Tok::LParen; break;
      case ')': current_.kind = Tok::RParen; break;
      default:
        throw ParseError(pos_, {}, "unexpected character '" + std::string(1, c) + "'");
    }
    current_.text = src_.substr(pos_, 1);
    ++pos_;
  }

  void lex_number() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) {
        ++end;
        ++n;
      }
      return n;
    };
    std::size_t n = digits();
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      n += digits();
    }
    if (n == 0) throw ParseError(start, {"number"}, "malformed number");
    // Exponent only when followed by digits, so that a trailing `e` stays
    // available as Euler's constant for error reporting.
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t k = end + 1;
      if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
      if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
        end = k;
        digits();
      }
    }
    const std::string_view text = src_.substr(start, end - start);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
      throw ParseError(start, {"number"}, "malformed number '" + std::string(text) + "'");
    current_.kind = Tok::Number;
    current_.text = text;
    current_.number = v;
    pos_ = end;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token current_;
};

NodePtr make_node(NodeKind kind, std::size_t offset, std::vector<NodePtr> children = {},
                  double value = 0.0) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->offset = offset;
  n->value = value;
  n->children = std::move(children);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) {}

  NodePtr parse_all() {
    NodePtr root = parse_sum({"end of input"});
    if (lex_.peek().kind != Tok::End) fail({"+", "-", "*", "/", "^", "end of input"});
    return root;
  }

 private:
  [[noreturn]] void fail(std::set<std::string> expected) {
    const Token& t = lex_.peek();
    std::string found = t.kind == Tok::End ? "end of input" : "'" + std::string(t.text) + "'";
    std::ostringstream msg;
    msg << "syntax error at offset " << t.offset << ": found " << found << ", expected one of "
        << join(expected);
    throw ParseError(t.offset, std::move(expected), msg.str());
  }

  // `follow` names what may legally come after the current sub-expression;
  // it only feeds the expected-token set of error messages.
  NodePtr parse_sum(const std::set<std::string>& follow) {
    NodePtr lhs = parse_product(follow);
    while (lex_.peek().kind == Tok::Plus || lex_.peek().kind == Tok::Minus) {
      Token op = lex_.take();
      NodePtr rhs = parse_product(follow);
      lhs = make_node(op.kind == Tok::Plus ? NodeKind::Add : NodeKind::Sub, op.offset,
                      {lhs, rhs});
    }
    return lhs;
  }

  NodePtr parse_product(const std::set<std::string>& follow) {
    NodePtr lhs = parse_unary(follow);
    while (lex_.peek().kind == Tok::Star || lex_.peek().kind == Tok::Slash) {
      Token op = lex_.take();
      NodePtr rhs = parse_unary(follow);
      lhs = make_node(op.kind == Tok::Star ? NodeKind::Mul : NodeKind::Div, op.offset,
                      {lhs, rhs});
    }
    return lhs;
  }

  NodePtr parse_unary(const std::set<std::string>& follow) {
    if (lex_.peek().kind == Tok::Minus) {
      Token op = lex_.take();
      return make_node(NodeKind::Neg, op.offset, {parse_unary(follow)});
    }
    return parse_power(follow);
  }

  NodePtr parse_power(const std::set<std::string>& follow) {
    NodePtr base = parse_primary(follow);
    if (lex_.peek().kind == Tok::Caret) {
      Token op = lex_.take();
      // Right operand re-enters at unary level: 2^-1 and 2^3^2 = 2^(3^2).
      NodePtr exponent = parse_unary(follow);
      return make_node(NodeKind::Pow, op.offset, {base, exponent});
    }
    return base;
  }

  NodePtr parse_primary(const std::set<std::string>& follow) {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::Number: {
        Token n = lex_.take();
        return make_node(NodeKind::Number, n.offset, {}, n.number);
      }
      case Tok::LParen: {
        lex_.take();
        NodePtr inner = parse_sum({")"});
        if (lex_.peek().kind != Tok::RParen) fail({"+", "-", "*", "/", "^", ")"});
        lex_.take();
        return inner;
      }
      case Tok::Ident:
        return parse_identifier(follow);
      default:
        fail({"number", "identifier", "(", "-"});
    }
  }

  NodePtr parse_identifier(const std::set<std::string>& follow) {
    Token id = lex_.take();
    if (id.text == "t") return make_node(NodeKind::Variable, id.offset);
    if (id.text == "pi") return make_node(NodeKind::Pi, id.offset);
    if (id.text == "e") return make_node(NodeKind::Euler, id.offset);
    for (const auto& f : kFunctions) {
      if (f.name == id.text) {
        if (lex_.peek().kind != Tok::LParen) fail({"("});
        lex_.take();
        NodePtr arg = parse_sum({")"});
        if (lex_.peek().kind != Tok::RParen) fail({"+", "-", "*", "/", "^", ")"});
        lex_.take();
        return make_node(f.kind, id.offset, {arg});
      }
    }
    (void)follow;
    throw UnknownIdentifier(id.offset, std::string(id.text));
  }

  Lexer lex_;
};

[[noreturn]] void domain(const Node& n, const std::string& what) {
  throw DomainError(n.offset, what + " at offset " + std::to_string(n.offset));
}

double checked(const Node& n, double v) {
  if (!std::isfinite(v)) domain(n, "non-finite result");
  return v;
}

bool is_integer(double x) { return std::isfinite(x) && std::floor(x) == x; }

double eval_node(const Node& n, double t) {
  switch (n.kind) {
    case NodeKind::Number: return n.value;
    case NodeKind::Variable: return t;
    case NodeKind::Pi: return std::numbers::pi;
    case NodeKind::Euler: return std::numbers::e;
    default: break;
  }
  const double a = eval_node(*n.children[0], t);
  switch (n.kind) {
    case NodeKind::Neg: return -a;
    case NodeKind::Sin: return std::sin(a);
    case NodeKind::Cos: return std::cos(a);
    case NodeKind::Tan: return checked(n, std::tan(a));
    case NodeKind::Sinh: return checked(n, std::sinh(a));
    case NodeKind::Cosh: return checked(n, std::cosh(a));
    case NodeKind::Tanh: return std::tanh(a);
    case NodeKind::Exp: return checked(n, std::exp(a));
    case NodeKind::Log:
      if (a <= 0.0) domain(n, "log of non-positive value");
      return std::log(a);
    case NodeKind::Sqrt:
      if (a < 0.0) domain(n, "sqrt of negative value");
      return std::sqrt(a);
    case NodeKind::Atan: return std::atan(a);
    default: break;
  }
  const double b = eval_node(*n.children[1], t);
  switch (n.kind) {
    case NodeKind::Add: return checked(n, a + b);
    case NodeKind::Sub: return checked(n, a - b);
    case NodeKind::Mul: return checked(n, a * b);
    case NodeKind::Div:
      if (b == 0.0) domain(n, "division by zero");
      return checked(n, a / b);
    case NodeKind::Pow:
      if (a < 0.0 && !is_integer(b)) domain(n, "negative base with non-integer exponent");
      if (a == 0.0 && b < 0.0) domain(n, "division by zero in power");
      return checked(n, std::pow(a, b));
    default: break;
  }
  domain(n, "unknown node");
}

DualValue dual_node(const Node& n, double t) {
  switch (n.kind) {
    case NodeKind::Number: return {n.value, 0.0};
    case NodeKind::Variable: return {t, 1.0};
    case NodeKind::Pi: return {std::numbers::pi, 0.0};
    case NodeKind::Euler: return {std::numbers::e, 0.0};
    default: break;
  }
  const DualValue a = dual_node(*n.children[0], t);
  auto out = [&](double v, double d) {
    return DualValue{checked(n, v), checked(n, d)};
  };
  switch (n.kind) {
    case NodeKind::Neg: return {-a.value, -a.derivative};
    case NodeKind::Sin: return out(std::sin(a.value), std::cos(a.value) * a.derivative);
    case NodeKind::Cos: return out(std::cos(a.value), -std::sin(a.value) * a.derivative);
    case NodeKind::Tan: {
      const double c = std::cos(a.value);
      return out(std::tan(a.value), a.derivative / (c * c));
    }
    case NodeKind::Sinh: return out(std::sinh(a.value), std::cosh(a.value) * a.derivative);
    case NodeKind::Cosh: return out(std::cosh(a.value), std::sinh(a.value) * a.derivative);
    case NodeKind::Tanh: {
      const double th = std::tanh(a.value);
      return out(th, (1.0 - th * th) * a.derivative);
    }
    case NodeKind::Exp: {
      const double v = std::exp(a.value);
      return out(v, v * a.derivative);
    }
    case NodeKind::Log:
      if (a.value <= 0.0) domain(n, "log of non-positive value");
      return out(std::log(a.value), a.derivative / a.value);
    case NodeKind::Sqrt: {
      if (a.value < 0.0) domain(n, "sqrt of negative value");
      const double v = std::sqrt(a.value);
      if (a.derivative == 0.0) return {v, 0.0};
      if (v == 0.0) domain(n, "sqrt derivative at zero");
      return out(v, 0.5 * a.derivative / v);
    }
    case NodeKind::Atan:
      return out(std::atan(a.value), a.derivative / (1.0 + a.value * a.value));
    default: break;
  }
  const DualValue b = dual_node(*n.children[1], t);
  switch (n.kind) {
    case NodeKind::Add: return out(a.value + b.value, a.derivative + b.derivative);
    case NodeKind::Sub: return out(a.value - b.value, a.derivative - b.derivative);
    case NodeKind::Mul:
      return out(a.value * b.value, a.value * b.derivative + b.value * a.derivative);
    case NodeKind::Div: {
      if (b.value == 0.0) domain(n, "division by zero");
      const double v = a.value / b.value;
      return out(v, (a.derivative - v * b.derivative) / b.value);
    }
    case NodeKind::Pow: {
      if (a.value < 0.0 && !is_integer(b.value))
        domain(n, "negative base with non-integer exponent");
      if (a.value == 0.0 && b.value < 0.0) domain(n, "division by zero in power");
      const double v = std::pow(a.value, b.value);
      if (b.derivative == 0.0) {
        if (a.derivative == 0.0) return out(v, 0.0);
        return out(v, b.value * std::pow(a.value, b.value - 1.0) * a.derivative);
      }
      if (a.value <= 0.0) domain(n, "variable exponent needs a positive base");
      return out(v, v * (b.derivative * std::log(a.value) + b.value * a.derivative / a.value));
    }
    default: break;
  }
  domain(n, "unknown node");
}

bool contains_variable(const Node& n) {
  if (n.kind == NodeKind::Variable) return true;
  for (const auto& c : n.children)
    if (contains_variable(*c)) return true;
  return false;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Number: out += format_number(n.value); return;
    case NodeKind::Variable: out += "t"; return;
    case NodeKind::Pi: out += "pi"; return;
    case NodeKind::Euler: out += "e"; return;
    case NodeKind::Neg:
      out += "(-";
      print_node(*n.children[0], out);
      out += ")";
      return;
    default: break;
  }
  if (arity(n.kind) == 1) {
    out += function_name(n.kind);
    out += "(";
    print_node(*n.children[0], out);
    out += ")";
    return;
  }
  const char* op = "";
  switch (n.kind) {
    case NodeKind::Add: op = " + "; break;
    case NodeKind::Sub: op = " - "; break;
    case NodeKind::Mul: op = "*"; break;
    case NodeKind::Div: op = "/"; break;
    case NodeKind::Pow: op = "^"; break;
    default: break;
  }
  out += "(";
  print_node(*n.children[0], out);
  out += op;
  print_node(*n.children[1], out);
  out += ")";
}

}  // namespace

int arity(NodeKind kind) {
  switch (kind) {
    case NodeKind::Number:
    case NodeKind::Variable:
    case NodeKind::Pi:
    case NodeKind::Euler:
      return 0;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div:
    case NodeKind::Pow:
      return 2;
    default:
      return 1;
  }
}

std::string_view function_name(NodeKind kind) {
  for (const auto& f : kFunctions)
    if (f.kind == kind) return f.name;
  return {};
}

ParseError::ParseError(std::size_t offset, std::set<std::string> expected,
                       const std::string& message)
    : std::runtime_error(message), offset_(offset), expected_(std::move(expected)) {}

UnknownIdentifier::UnknownIdentifier(std::size_t offset, std::string name)
    : ParseError(offset, {"t", "pi", "e", "function name"},
                 "unknown identifier '" + name + "' at offset " + std::to_string(offset)),
      name_(std::move(name)) {}

DomainError::DomainError(std::size_t offset, const std::string& message)
    : std::runtime_error(message), offset_(offset) {}

Expr::Expr() : root_(make_number(0.0)), source_("0") {}

Expr::Expr(NodePtr root, std::string source) : root_(std::move(root)), source_(std::move(source)) {
  if (source_.empty()) source_ = print(*this);
}

Expr Expr::constant(double value) { return Expr(make_number(value)); }

double Expr::eval(double t) const { return eval_node(*root_, t); }

DualValue Expr::eval_dual(double t) const { return dual_node(*root_, t); }

bool Expr::is_constant() const { return !contains_variable(*root_); }

Expr parse(std::string_view source) {
  Parser p(source);
  return Expr(p.parse_all(), std::string(source));
}

std::string print(const Expr& e) {
  std::string out;
  print_node(e.root(), out);
  return out;
}

bool structurally_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
  if (a.kind == NodeKind::Number && a.value != b.value) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!structurally_equal(*a.children[i], *b.children[i])) return false;
  return true;
}

NodePtr make_number(double v) { return make_node(NodeKind::Number, 0, {}, v); }

NodePtr make_variable() { return make_node(NodeKind::Variable, 0); }

NodePtr make_unary(NodeKind kind, NodePtr child) {
  return make_node(kind, 0, {std::move(child)});
}

NodePtr make_binary(NodeKind kind, NodePtr lhs, NodePtr rhs) {
  return make_node(kind, 0, {std::move(lhs), std::move(rhs)});
}

}  // namespace tdnh::expr
