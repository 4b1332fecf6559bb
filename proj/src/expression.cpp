#include "nps/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

#include "nps/errors.hpp"
#include "nps/io.hpp"

namespace nps {

struct Expression::Node {
  enum class Kind { Number, VarS, VarX, VarY, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
  double value = 0.0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;

  double eval(const ExprVars& v) const {
    switch (kind) {
      case Kind::Number: return value;
      case Kind::VarS: return v.s;
      case Kind::VarX: return v.x;
      case Kind::VarY: return v.y;
      case Kind::Neg: return -a->eval(v);
      case Kind::Add: return a->eval(v) + b->eval(v);
      case Kind::Sub: return a->eval(v) - b->eval(v);
      case Kind::Mul: return a->eval(v) * b->eval(v);
      case Kind::Div: return a->eval(v) / b->eval(v);
      case Kind::Pow: return std::pow(a->eval(v), b->eval(v));
      case Kind::Call: return fn(a->eval(v));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr number(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = Kind::Number;
  n->value = v;
  return n;
}

struct Function {
  const char* name;
  double (*fn)(double);
};

const Function kFunctions[] = {
    {"sin", [](double x) { return std::sin(x); }},   {"cos", [](double x) { return std::cos(x); }},
    {"tan", [](double x) { return std::tan(x); }},   {"exp", [](double x) { return std::exp(x); }},
    {"log", [](double x) { return std::log(x); }},   {"sqrt", [](double x) { return std::sqrt(x); }},
    {"tanh", [](double x) { return std::tanh(x); }}, {"abs", [](double x) { return std::abs(x); }},
};

class Parser {
 public:
  Parser(std::string_view text, const std::string& field, int line) : text_(text), field_(field), line_(line) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at column " + std::to_string(pos_ + 1) + " of \"" + std::string(text_) + "\"", line_,
                     field_);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr n = term();
    while (true) {
      if (accept('+')) n = make(Kind::Add, n, term());
      else if (accept('-')) n = make(Kind::Sub, n, term());
      else return n;
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    while (true) {
      if (accept('*')) n = make(Kind::Mul, n, unary());
      else if (accept('/')) n = make(Kind::Div, n, unary());
      else return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Kind::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Kind::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (accept('(')) {
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
      if (res.ec != std::errc()) fail("malformed number");
      pos_ = static_cast<std::size_t>(res.ptr - text_.data());
      return number(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      if (accept('(')) {
        for (const auto& f : kFunctions) {
          if (name == f.name) {
            NodePtr arg = expr();
            if (!accept(')')) fail("expected ')'");
            auto n = std::make_shared<Expression::Node>();
            n->kind = Kind::Call;
            n->fn = f.fn;
            n->a = std::move(arg);
            return n;
          }
        }
        pos_ = start;
        fail("unknown function '" + std::string(name) + "'");
      }
      if (name == "s") return make(Kind::VarS);
      if (name == "x") return make(Kind::VarX);
      if (name == "y") return make(Kind::VarY);
      if (name == "pi") return number(std::numbers::pi);
      if (name == "e") return number(std::numbers::e);
      pos_ = start;
      fail("unknown name '" + std::string(name) + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  const std::string& field_;
  int line_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text, const std::string& field, int line) {
  Expression e;
  e.root_ = Parser(text, field, line).parse();
  e.text_ = std::string(text);
  return e;
}

Expression Expression::constant(double v) {
  Expression e;
  e.root_ = number(v);
  e.text_ = format_double(v);
  return e;
}

double Expression::eval(const ExprVars& vars) const { return root_ ? root_->eval(vars) : 0.0; }

}  // namespace nps
