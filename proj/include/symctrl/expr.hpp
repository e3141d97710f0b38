/*
 * expr.hpp
 *
 * Right-hand-side expressions for vector fields: a small arithmetic language
 * over state variables x1..xn and input variables u1..um.
 *
 *   expr    := term (('+' | '-') term)*
 *   term    := unary (('*' | '/') unary)*
 *   unary   := '-' unary | power
 *   power   := primary ('^' unary)?          (right associative)
 *   primary := number | xK | uK | func '(' expr ')' | '(' expr ')'
 *   func    := sin | cos | exp | sqrt | abs
 *
 * Expressions are immutable once parsed. Evaluation is reentrant.
 */
#ifndef SYMCTRL_EXPR_HPP_
#define SYMCTRL_EXPR_HPP_

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace symctrl {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/* sqrt of a negative number or division by zero */
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& what, std::string subexpression);
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

enum class Op {
  Number,
  State,
  Input,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Sin,
  Cos,
  Exp,
  Sqrt,
  Abs,
};

struct Node {
  Op op;
  double value = 0.0;   // Number
  int index = 0;        // State/Input, zero based
  std::shared_ptr<const Node> lhs;  // operand of unary ops and functions
  std::shared_ptr<const Node> rhs;
};

class Expr {
 public:
  Expr(std::shared_ptr<const Node> root, int state_dim, int input_dim);

  const Node& root() const { return *root_; }
  int state_dim() const { return state_dim_; }
  int input_dim() const { return input_dim_; }

  /* minimal-parenthesis rendering; literals use 17 significant digits so
   * that parse(to_string(e)) evaluates bit-identically to e */
  std::string to_string() const;

 private:
  std::shared_ptr<const Node> root_;
  int state_dim_;
  int input_dim_;
};

Expr parse_expression(std::string_view text, int state_dim, int input_dim);

double eval(const Expr& expr, const Eigen::Ref<const Eigen::VectorXd>& x,
            const Eigen::Ref<const Eigen::VectorXd>& u);

/* Scalar kernels shared by the tree walker and the batch evaluator; both
 * paths must round identically. */
double apply_pow(double base, double exponent);
double apply_function(Op op, double arg);

/*
 * Postfix program compiled from one or more expressions, evaluated over a
 * batch of points at once. Rows of the batch matrices are sample points:
 * x is (k x n), u is (k x m), the result is (k x number of expressions).
 */
class BatchProgram {
 public:
  BatchProgram() = default;
  explicit BatchProgram(const std::vector<Expr>& exprs);

  std::size_t outputs() const { return entry_.size(); }

  /* Throws DomainError; the failing sample row is appended to the message. */
  void eval(const Eigen::ArrayXXd& x, const Eigen::ArrayXXd& u,
            Eigen::ArrayXXd& out) const;

 private:
  enum class Code { Const, LoadState, LoadInput, Neg, Add, Sub, Mul, Div,
                    Square, Cube, Pow, Sin, Cos, Exp, Sqrt, Abs };
  struct Instr {
    Code code;
    double value = 0.0;
    int index = 0;
    const Node* source = nullptr;
  };

  void emit(const Node& node, std::vector<Instr>& code, int& depth,
            int& max_depth) const;

  std::vector<std::vector<Instr>> entry_;
  std::vector<Expr> exprs_;  // owns the trees the instructions point into
  int stack_depth_ = 0;
};

std::string render(const Node& node);

}  // namespace symctrl

#endif  // SYMCTRL_EXPR_HPP_
