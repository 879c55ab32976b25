#include "dcflow/expression.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>

namespace dcflow {

namespace {

using Eval = std::function<double(double, double)>;

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  Eval parse() {
    Eval e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError("expression '" + s_ + "': " + what + " at position " +
                          std::to_string(pos_));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Eval expr() {
    Eval lhs = term();
    for (;;) {
      if (eat('+')) {
        lhs = [a = lhs, b = term()](double x, double y) { return a(x, y) + b(x, y); };
      } else if (eat('-')) {
        lhs = [a = lhs, b = term()](double x, double y) { return a(x, y) - b(x, y); };
      } else {
        return lhs;
      }
    }
  }

  Eval term() {
    Eval lhs = unary();
    for (;;) {
      if (eat('*')) {
        lhs = [a = lhs, b = unary()](double x, double y) { return a(x, y) * b(x, y); };
      } else if (eat('/')) {
        lhs = [a = lhs, b = unary()](double x, double y) { return a(x, y) / b(x, y); };
      } else {
        return lhs;
      }
    }
  }

  Eval unary() {
    if (eat('-')) return [a = unary()](double x, double y) { return -a(x, y); };
    if (eat('+')) return unary();
    return power();
  }

  Eval power() {
    Eval base = primary();
    if (eat('^')) {
      return [a = base, b = unary()](double x, double y) { return std::pow(a(x, y), b(x, y)); };
    }
    return base;
  }

  Eval primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (eat('(')) {
      Eval e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      const double v = std::stod(s_.substr(pos_), &used);
      pos_ += used;
      return [v](double, double) { return v; };
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "x") return [](double x, double) { return x; };
      if (name == "y") return [](double, double y) { return y; };
      if (name == "pi") return [](double, double) { return std::numbers::pi; };
      double (*fn)(double) = nullptr;
      if (name == "sin") fn = [](double v) { return std::sin(v); };
      else if (name == "cos") fn = [](double v) { return std::cos(v); };
      else if (name == "tan") fn = [](double v) { return std::tan(v); };
      else if (name == "exp") fn = [](double v) { return std::exp(v); };
      else if (name == "log") fn = [](double v) { return std::log(v); };
      else if (name == "sqrt") fn = [](double v) { return std::sqrt(v); };
      else if (name == "abs") fn = [](double v) { return std::abs(v); };
      else fail("unknown identifier '" + name + "'");
      if (!eat('(')) fail("expected '(' after " + name);
      Eval arg = expr();
      if (!eat(')')) fail("expected ')'");
      return [fn, arg](double x, double y) { return fn(arg(x, y)); };
    }
    fail(std::string("unexpected '") + c + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::function<double(double, double)> compile_expression(const std::string& source) {
  return Parser(source).parse();
}

}  // namespace dcflow
