#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace certclose {

/// A small arithmetic/boolean expression over named values, used to write
/// relational constraints such as "abs(X - Y) == l2" in model files.
///
/// Grammar (lowest to highest precedence):
///   or      := and ("||" and)*
///   and     := cmp ("&&" cmp)*
///   cmp     := sum (("=="|"!="|"<"|"<="|">"|">=") sum)?
///   sum     := product (("+"|"-") product)*
///   product := unary (("*"|"/"|"%") unary)*
///   unary   := ("-"|"!") unary | atom
///   atom    := number | identifier | identifier "(" args ")" | "(" or ")"
/// Functions: abs, min, max. Booleans evaluate to 1 and 0.
class Expression {
 public:
  static Expression parse(std::string_view source);

  const std::string& source() const { return source_; }

  /// Identifiers in order of first appearance.
  const std::vector<std::string>& identifiers() const { return identifiers_; }

  /// Evaluates with `values[i]` bound to `identifiers()[i]`.
  double evaluate(const std::vector<double>& values) const;

  struct Node;

 private:
  std::string source_;
  std::vector<std::string> identifiers_;
  std::shared_ptr<const Node> root_;
};

}  // namespace certclose
