#pragma once

// Small arithmetic expression language for boundary traces.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr ')' | '(' expr ')'
//
// Names: s (arclength along the side), x, y, pi, e. Functions: sin, cos, tan,
// exp, log, sqrt, tanh, abs.

#include <memory>
#include <string>
#include <string_view>

namespace nps {

struct ExprVars {
  double s = 0.0;
  double x = 0.0;
  double y = 0.0;
};

class Expression {
 public:
  struct Node;

  Expression() = default;

  /// Throws ParseError naming the field, line and column of the problem.
  static Expression parse(std::string_view text, const std::string& field = {}, int line = 0);
  static Expression constant(double v);

  double eval(const ExprVars& vars) const;
  const std::string& text() const { return text_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace nps
