#include "certclose/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "certclose/error.hpp"

namespace certclose {

struct Expression::Node {
  enum class Kind { Number, Ident, Unary, Binary, Call } kind;
  double number = 0.0;
  std::size_t ident = 0;
  std::string op;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

class Parser {
 public:
  Parser(std::string_view src, std::vector<std::string>& idents) : src_(src), idents_(idents) {}

  NodePtr parse() {
    NodePtr n = parse_or();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("expression '" + std::string(src_) + "': " + what + " at offset " +
                     std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip_ws();
    if (src_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  static NodePtr binary(std::string op, NodePtr l, NodePtr r) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->op = std::move(op);
    n->args = {std::move(l), std::move(r)};
    return n;
  }

  NodePtr parse_or() {
    NodePtr l = parse_and();
    while (accept("||")) l = binary("||", l, parse_and());
    return l;
  }

  NodePtr parse_and() {
    NodePtr l = parse_cmp();
    while (accept("&&")) l = binary("&&", l, parse_cmp());
    return l;
  }

  NodePtr parse_cmp() {
    NodePtr l = parse_sum();
    for (std::string_view op : {"==", "!=", "<=", ">=", "<", ">"}) {
      if (accept(op)) return binary(std::string(op), l, parse_sum());
    }
    return l;
  }

  NodePtr parse_sum() {
    NodePtr l = parse_product();
    for (;;) {
      if (accept("+")) {
        l = binary("+", l, parse_product());
      } else if (accept("-")) {
        l = binary("-", l, parse_product());
      } else {
        return l;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr l = parse_unary();
    for (;;) {
      if (accept("*")) {
        l = binary("*", l, parse_unary());
      } else if (accept("/")) {
        l = binary("/", l, parse_unary());
      } else if (accept("%")) {
        l = binary("%", l, parse_unary());
      } else {
        return l;
      }
    }
  }

  NodePtr parse_unary() {
    skip_ws();
    if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '!') &&
        src_.substr(pos_, 2) != "!=") {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Unary;
      n->op = std::string(1, src_[pos_++]);
      n->args = {parse_unary()};
      return n;
    }
    return parse_atom();
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = parse_or();
      if (!accept(")")) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::string tail(src_.substr(pos_));
      char* end = nullptr;
      double v = std::strtod(tail.c_str(), &end);
      if (end == tail.c_str()) fail("bad number");
      pos_ += static_cast<std::size_t>(end - tail.c_str());
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Number;
      n->number = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      std::string name(src_.substr(start, pos_ - start));
      if (accept("(")) {
        if (name != "abs" && name != "min" && name != "max") fail("unknown function " + name);
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Call;
        n->op = name;
        if (!accept(")")) {
          do {
            n->args.push_back(parse_or());
          } while (accept(","));
          if (!accept(")")) fail("expected ')'");
        }
        std::size_t want = name == "abs" ? 1 : 2;
        if (n->args.size() != want) fail(name + " takes " + std::to_string(want) + " argument(s)");
        return n;
      }
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Ident;
      std::size_t idx = 0;
      while (idx < idents_.size() && idents_[idx] != name) ++idx;
      if (idx == idents_.size()) idents_.push_back(name);
      n->ident = idx;
      return n;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  std::vector<std::string>& idents_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, const std::vector<double>& v) {
  switch (n.kind) {
    case Node::Kind::Number:
      return n.number;
    case Node::Kind::Ident:
      return v[n.ident];
    case Node::Kind::Unary: {
      double a = eval(*n.args[0], v);
      return n.op == "-" ? -a : (a == 0.0 ? 1.0 : 0.0);
    }
    case Node::Kind::Call: {
      double a = eval(*n.args[0], v);
      if (n.op == "abs") return std::fabs(a);
      double b = eval(*n.args[1], v);
      return n.op == "min" ? std::min(a, b) : std::max(a, b);
    }
    case Node::Kind::Binary:
      break;
  }
  const std::string& op = n.op;
  if (op == "&&") return (eval(*n.args[0], v) != 0.0 && eval(*n.args[1], v) != 0.0) ? 1.0 : 0.0;
  if (op == "||") return (eval(*n.args[0], v) != 0.0 || eval(*n.args[1], v) != 0.0) ? 1.0 : 0.0;
  double a = eval(*n.args[0], v);
  double b = eval(*n.args[1], v);
  if (op == "+") return a + b;
  if (op == "-") return a - b;
  if (op == "*") return a * b;
  if (op == "/") return a / b;
  if (op == "%") return std::fmod(a, b);
  if (op == "==") return a == b ? 1.0 : 0.0;
  if (op == "!=") return a != b ? 1.0 : 0.0;
  if (op == "<") return a < b ? 1.0 : 0.0;
  if (op == "<=") return a <= b ? 1.0 : 0.0;
  if (op == ">") return a > b ? 1.0 : 0.0;
  return a >= b ? 1.0 : 0.0;
}

}  // namespace

Expression Expression::parse(std::string_view source) {
  Expression e;
  e.source_ = std::string(source);
  Parser p(e.source_, e.identifiers_);
  e.root_ = p.parse();
  return e;
}

double Expression::evaluate(const std::vector<double>& values) const {
  return eval(*root_, values);
}

}  // namespace certclose
