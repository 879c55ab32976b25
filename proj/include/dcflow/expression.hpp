#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace dcflow {

class ExpressionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Compiles an arithmetic expression in x and y, e.g.
/// "sin(2*pi*x)*sin(2*pi*y)*exp(2*x)/6". Supports + - * / ^, unary minus,
/// the constant pi and sin cos tan exp log sqrt abs.
std::function<double(double, double)> compile_expression(const std::string& source);

}  // namespace dcflow
