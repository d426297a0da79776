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

#pragma once

// Arithmetic expressions of the time variable `t`, evaluated either plainly
// or with an exact forward-mode derivative. Used for every time-dependent
// coefficient in a scenario.

#include <cstddef>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tdnh::expr {

enum class NodeKind {
  Number,
  Variable,
  Pi,
  Euler,
  Neg,
  Sin,
  Cos,
  Tan,
  Sinh,
  Cosh,
  Tanh,
  Exp,
  Log,
  Sqrt,
  Atan,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
};

/// Number of children a node of this kind carries (0, 1 or 2).
int arity(NodeKind kind);

/// Function name for the unary function kinds ("sin", "exp", ...); empty
/// for everything else.
std::string_view function_name(NodeKind kind);

struct Node {
  NodeKind kind = NodeKind::Number;
  double value = 0.0;           // Number only
  std::size_t offset = 0;       // byte offset into the source text
  std::vector<std::shared_ptr<const Node>> children;
};

using NodePtr = std::shared_ptr<const Node>;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, std::set<std::string> expected,
             const std::string& message);
  std::size_t offset() const { return offset_; }
  const std::set<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::set<std::string> expected_;
};

class UnknownIdentifier : public ParseError {
 public:
  UnknownIdentifier(std::size_t offset, std::string name);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Raised for log of a non-positive number, division by zero and the like.
class DomainError : public std::runtime_error {
 public:
  DomainError(std::size_t offset, const std::string& message);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct DualValue {
  double value = 0.0;
  double derivative = 0.0;
};

/// Immutable expression tree. Cheap to copy; safe to share between threads.
class Expr {
 public:
  Expr();  // the constant 0
  explicit Expr(NodePtr root, std::string source = {});

  static Expr constant(double value);

  const Node& root() const { return *root_; }
  const NodePtr& root_ptr() const { return root_; }
  const std::string& source() const { return source_; }

  double eval(double t) const;
  DualValue eval_dual(double t) const;

  /// True when the tree contains no `t`.
  bool is_constant() const;

 private:
  NodePtr root_;
  std::string source_;
};

/// Precedence (high to low): `^` (right-associative), unary minus, `* /`,
/// `+ -`. Accepts `t`, `pi`, `e`, decimal/scientific numbers and the
/// functions sin cos tan sinh cosh tanh exp log sqrt atan.
Expr parse(std::string_view source);

/// Renders a fully parenthesised form with round-trip exact numbers, so
/// that parse(print(e)) reproduces the tree.
std::string print(const Expr& e);

bool structurally_equal(const Node& a, const Node& b);

// Tree builders, mostly for tests and programmatic paths.
NodePtr make_number(double v);
NodePtr make_variable();
NodePtr make_unary(NodeKind kind, NodePtr child);
NodePtr make_binary(NodeKind kind, NodePtr lhs, NodePtr rhs);

}  // namespace tdnh::expr
