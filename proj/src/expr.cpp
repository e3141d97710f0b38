#include "symctrl/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace symctrl {

ParseError::ParseError(const std::string& what, std::size_t position)
    : std::runtime_error(what + " at position " + std::to_string(position)),
      position_(position) {}

DomainError::DomainError(const std::string& what, std::string subexpression)
    : std::runtime_error(what + " in '" + subexpression + "'"),
      subexpression_(std::move(subexpression)) {}

namespace {

using NodePtr = std::shared_ptr<const Node>;

NodePtr make_node(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  Parser(std::string_view text, int n, int m) : text_(text), n_(n), m_(m) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    NodePtr e = expr();
    skip_ws();
    if (pos_ < text_.size())
      throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = make_node(Op::Add, lhs, term());
      else if (accept('-'))
        lhs = make_node(Op::Sub, lhs, term());
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = make_node(Op::Mul, lhs, unary());
      else if (accept('/'))
        lhs = make_node(Op::Div, lhs, unary());
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_node(Op::Neg, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make_node(Op::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (c == '(') {
      std::size_t open = pos_++;
      NodePtr e = expr();
      if (!accept(')')) throw ParseError("unclosed parenthesis", open);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
        ++pos_;
      if (pos_ < text_.size() &&
          std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
      } else {
        pos_ = save;
      }
    }
    double value = 0.0;
    auto [ptr, ec] =
        std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_)
      throw ParseError("malformed number", start);
    auto n = std::make_shared<Node>();
    n->op = Op::Number;
    n->value = value;
    return n;
  }

  NodePtr identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isalnum(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    std::string_view name = text_.substr(start, pos_ - start);

    static constexpr std::pair<std::string_view, Op> functions[] = {
        {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp},
        {"sqrt", Op::Sqrt}, {"abs", Op::Abs}};
    for (auto [fname, op] : functions) {
      if (name == fname) {
        std::size_t open = pos_;
        if (!accept('(')) throw ParseError("expected '(' after " + std::string(name), pos_);
        NodePtr arg = expr();
        if (!accept(')')) throw ParseError("unclosed parenthesis", open);
        return make_node(op, arg);
      }
    }

    if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'u')) {
      int index = 0;
      auto digits = name.substr(1);
      auto [ptr, ec] =
          std::from_chars(digits.data(), digits.data() + digits.size(), index);
      if (ec == std::errc() && ptr == digits.data() + digits.size() &&
          digits[0] != '0') {
        int limit = name[0] == 'x' ? n_ : m_;
        if (index < 1 || index > limit)
          throw ParseError("variable " + std::string(name) +
                               " out of range (dimension " +
                               std::to_string(limit) + ")",
                           start);
        auto n = std::make_shared<Node>();
        n->op = name[0] == 'x' ? Op::State : Op::Input;
        n->index = index - 1;
        return n;
      }
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view text_;
  int n_;
  int m_;
  std::size_t pos_ = 0;
};

int precedence(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    default: return 5;
  }
}

const char* symbol(Op op) {
  switch (op) {
    case Op::Add: return " + ";
    case Op::Sub: return " - ";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Pow: return "^";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Sqrt: return "sqrt";
    case Op::Abs: return "abs";
    default: return "?";
  }
}

void render_into(const Node& node, std::string& out);

void render_child(const Node& child, bool parens, std::string& out) {
  if (parens) out += '(';
  render_into(child, out);
  if (parens) out += ')';
}

void render_into(const Node& node, std::string& out) {
  switch (node.op) {
    case Op::Number: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", node.value);
      out += buf;
      return;
    }
    case Op::State:
      out += 'x' + std::to_string(node.index + 1);
      return;
    case Op::Input:
      out += 'u' + std::to_string(node.index + 1);
      return;
    case Op::Neg:
      out += '-';
      render_child(*node.lhs, precedence(node.lhs->op) < precedence(Op::Neg), out);
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      int p = precedence(node.op);
      render_child(*node.lhs, precedence(node.lhs->op) < p, out);
      out += symbol(node.op);
      render_child(*node.rhs, precedence(node.rhs->op) <= p, out);
      return;
    }
    case Op::Pow: {
      int p = precedence(Op::Pow);
      render_child(*node.lhs, precedence(node.lhs->op) <= p, out);
      out += '^';
      // the grammar accepts a unary operand on the right
      render_child(*node.rhs, precedence(node.rhs->op) < precedence(Op::Neg), out);
      return;
    }
    default:
      out += symbol(node.op);
      render_child(*node.lhs, true, out);
      return;
  }
}

double eval_node(const Node& node, const Eigen::Ref<const Eigen::VectorXd>& x,
                 const Eigen::Ref<const Eigen::VectorXd>& u) {
  switch (node.op) {
    case Op::Number: return node.value;
    case Op::State: return x[node.index];
    case Op::Input: return u[node.index];
    case Op::Neg: return -eval_node(*node.lhs, x, u);
    case Op::Add: return eval_node(*node.lhs, x, u) + eval_node(*node.rhs, x, u);
    case Op::Sub: return eval_node(*node.lhs, x, u) - eval_node(*node.rhs, x, u);
    case Op::Mul: return eval_node(*node.lhs, x, u) * eval_node(*node.rhs, x, u);
    case Op::Div: {
      double num = eval_node(*node.lhs, x, u);
      double den = eval_node(*node.rhs, x, u);
      if (den == 0.0) throw DomainError("division by zero", render(node));
      return num / den;
    }
    case Op::Pow:
      return apply_pow(eval_node(*node.lhs, x, u), eval_node(*node.rhs, x, u));
    case Op::Sqrt: {
      double a = eval_node(*node.lhs, x, u);
      if (a < 0.0) throw DomainError("sqrt of negative argument", render(node));
      return std::sqrt(a);
    }
    default:
      return apply_function(node.op, eval_node(*node.lhs, x, u));
  }
}

}  // namespace

Expr::Expr(std::shared_ptr<const Node> root, int state_dim, int input_dim)
    : root_(std::move(root)), state_dim_(state_dim), input_dim_(input_dim) {}

std::string Expr::to_string() const { return render(*root_); }

std::string render(const Node& node) {
  std::string out;
  render_into(node, out);
  return out;
}

Expr parse_expression(std::string_view text, int state_dim, int input_dim) {
  return Expr(Parser(text, state_dim, input_dim).parse(), state_dim, input_dim);
}

double eval(const Expr& expr, const Eigen::Ref<const Eigen::VectorXd>& x,
            const Eigen::Ref<const Eigen::VectorXd>& u) {
  if (x.size() != expr.state_dim() || u.size() != expr.input_dim())
    throw std::invalid_argument("eval: dimension mismatch");
  return eval_node(expr.root(), x, u);
}

double apply_pow(double base, double exponent) {
  // small integer powers by repeated multiplication
  if (exponent == 2.0) return base * base;
  if (exponent == 3.0) return base * base * base;
  return std::pow(base, exponent);
}

double apply_function(Op op, double arg) {
  switch (op) {
    case Op::Sin: return std::sin(arg);
    case Op::Cos: return std::cos(arg);
    case Op::Exp: return std::exp(arg);
    case Op::Sqrt: return std::sqrt(arg);
    case Op::Abs: return std::abs(arg);
    default: throw std::logic_error("apply_function: not a function node");
  }
}

// ---------------------------------------------------------------------------

BatchProgram::BatchProgram(const std::vector<Expr>& exprs) : exprs_(exprs) {
  for (const auto& e : exprs_) {
    std::vector<Instr> code;
    int depth = 0;
    emit(e.root(), code, depth, stack_depth_);
    entry_.push_back(std::move(code));
  }
}

void BatchProgram::emit(const Node& node, std::vector<Instr>& code, int& depth,
                        int& max_depth) const {
  auto push = [&](Instr in) {
    code.push_back(in);
    ++depth;
    max_depth = std::max(max_depth, depth);
  };
  switch (node.op) {
    case Op::Number: push({Code::Const, node.value, 0, &node}); return;
    case Op::State: push({Code::LoadState, 0.0, node.index, &node}); return;
    case Op::Input: push({Code::LoadInput, 0.0, node.index, &node}); return;
    case Op::Neg:
      emit(*node.lhs, code, depth, max_depth);
      code.push_back({Code::Neg, 0.0, 0, &node});
      return;
    case Op::Pow:
      if (node.rhs->op == Op::Number &&
          (node.rhs->value == 2.0 || node.rhs->value == 3.0)) {
        emit(*node.lhs, code, depth, max_depth);
        code.push_back({node.rhs->value == 2.0 ? Code::Square : Code::Cube, 0.0,
                        0, &node});
        return;
      }
      [[fallthrough]];
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      emit(*node.lhs, code, depth, max_depth);
      emit(*node.rhs, code, depth, max_depth);
      Code c = node.op == Op::Add   ? Code::Add
               : node.op == Op::Sub ? Code::Sub
               : node.op == Op::Mul ? Code::Mul
               : node.op == Op::Div ? Code::Div
                                    : Code::Pow;
      code.push_back({c, 0.0, 0, &node});
      --depth;
      return;
    }
    default: {
      emit(*node.lhs, code, depth, max_depth);
      Code c = node.op == Op::Sin   ? Code::Sin
               : node.op == Op::Cos ? Code::Cos
               : node.op == Op::Exp ? Code::Exp
               : node.op == Op::Sqrt ? Code::Sqrt
                                     : Code::Abs;
      code.push_back({c, 0.0, 0, &node});
      return;
    }
  }
}

void BatchProgram::eval(const Eigen::ArrayXXd& x, const Eigen::ArrayXXd& u,
                        Eigen::ArrayXXd& out) const {
  const Eigen::Index k = x.rows();
  out.resize(k, static_cast<Eigen::Index>(entry_.size()));
  std::vector<Eigen::ArrayXd> stack(static_cast<std::size_t>(stack_depth_),
                                    Eigen::ArrayXd(k));

  auto first_row = [](const auto& mask) {
    for (Eigen::Index i = 0; i < mask.size(); ++i)
      if (mask[i]) return i;
    return Eigen::Index{-1};
  };

  for (std::size_t e = 0; e < entry_.size(); ++e) {
    std::size_t sp = 0;
    for (const Instr& in : entry_[e]) {
      switch (in.code) {
        case Code::Const: stack[sp++].setConstant(in.value); break;
        case Code::LoadState: stack[sp++] = x.col(in.index); break;
        case Code::LoadInput: stack[sp++] = u.col(in.index); break;
        case Code::Neg: stack[sp - 1] = -stack[sp - 1]; break;
        case Code::Add: stack[sp - 2] += stack[sp - 1]; --sp; break;
        case Code::Sub: stack[sp - 2] -= stack[sp - 1]; --sp; break;
        case Code::Mul: stack[sp - 2] *= stack[sp - 1]; --sp; break;
        case Code::Div: {
          auto& den = stack[sp - 1];
          if ((den == 0.0).any())
            throw DomainError("division by zero (sample " +
                                  std::to_string(first_row(den == 0.0)) + ")",
                              render(*in.source));
          stack[sp - 2] /= den;
          --sp;
          break;
        }
        case Code::Square: stack[sp - 1] = stack[sp - 1] * stack[sp - 1]; break;
        case Code::Cube:
          stack[sp - 1] = stack[sp - 1] * stack[sp - 1] * stack[sp - 1];
          break;
        case Code::Pow:
          stack[sp - 2] = stack[sp - 2].binaryExpr(
              stack[sp - 1], [](double a, double b) { return apply_pow(a, b); });
          --sp;
          break;
        case Code::Sqrt: {
          auto& a = stack[sp - 1];
          if ((a < 0.0).any())
            throw DomainError("sqrt of negative argument (sample " +
                                  std::to_string(first_row(a < 0.0)) + ")",
                              render(*in.source));
          a = a.sqrt();
          break;
        }
        case Code::Sin: stack[sp - 1] = stack[sp - 1].unaryExpr([](double a) { return std::sin(a); }); break;
        case Code::Cos: stack[sp - 1] = stack[sp - 1].unaryExpr([](double a) { return std::cos(a); }); break;
        case Code::Exp: stack[sp - 1] = stack[sp - 1].unaryExpr([](double a) { return std::exp(a); }); break;
        case Code::Abs: stack[sp - 1] = stack[sp - 1].abs(); break;
      }
    }
    out.col(static_cast<Eigen::Index>(e)) = stack[0];
  }
}

}  // namespace symctrl
