#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vlab/grid.hpp"

namespace vlab {

// Closed-form expressions over x (= x1) and x2.
//
//   expr    := or
//   or      := and { "or" and }
//   and     := cmp { "and" cmp }
//   cmp     := sum [ ("<" | "<=" | ">" | ">=" | "=") sum ]
//   sum     := product { ("+" | "-") product }
//   product := unary { ("*" | "/") unary }
//   unary   := "-" unary | power
//   power   := atom [ "^" unary ]
//   atom    := number | x | x1 | x2 | "(" expr ")" | call | piecewise
//   call    := name "(" expr { "," expr } ")"
//   piecewise := "piecewise" "(" cond ":" expr { "," cond ":" expr } "," "else" ":" expr ")"
//
// Functions: abs log exp sqrt loglog (one argument), min max (two or more),
// chi(a, b) with literal bounds a < b: the indicator of [a, b] in x.

enum class NodeKind { number, variable, negate, binary, call, piecewise, compare, logic };
enum class BinaryOp { add, sub, mul, div, pow };
enum class Func { abs, log, exp, sqrt, loglog, min, max, chi };
enum class CompareOp { lt, le, gt, ge, eq };
enum class LogicOp { land, lor };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  NodeKind kind = NodeKind::number;
  double number = 0.0;
  int var = 0;             // 0 for x/x1, 1 for x2
  std::string var_name;    // spelling kept for printing
  BinaryOp binary = BinaryOp::add;
  Func func = Func::abs;
  CompareOp compare = CompareOp::lt;
  LogicOp logic = LogicOp::land;
  double lo = 0.0, hi = 0.0;  // chi bounds
  // negate: {operand}; binary/compare/logic: {lhs, rhs}; call: arguments;
  // piecewise: {cond0, value0, cond1, value1, ..., otherwise}.
  std::vector<ExprPtr> args;
  std::size_t offset = 0;  // 1-based source column, 0 when synthesized

  bool is_boolean() const { return kind == NodeKind::compare || kind == NodeKind::logic; }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, std::string expected, std::string excerpt);
  // 1-based byte column; input length + 1 denotes end of input.
  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }
  const std::string& excerpt() const { return excerpt_; }

 private:
  std::size_t offset_;
  std::string expected_;
  std::string excerpt_;
};

class EvalError : public std::runtime_error {
 public:
  EvalError(std::string message, std::string subexpression);
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

ExprPtr parse(const std::string& src);

// Canonical text; parse(print(e)) is structurally equal to e.
std::string print(const Expr& e);
bool structurally_equal(const Expr& a, const Expr& b);
// Highest variable index used plus one (0 for constants).
int arity(const Expr& e);

// Node constructors, mostly for tests and programmatic fixtures.
namespace ast {
ExprPtr number(double v);
ExprPtr variable(int index);
ExprPtr negate(ExprPtr a);
ExprPtr binary(BinaryOp op, ExprPtr a, ExprPtr b);
ExprPtr call(Func f, std::vector<ExprPtr> args);
ExprPtr chi(double lo, double hi);
ExprPtr compare(CompareOp op, ExprPtr a, ExprPtr b);
ExprPtr logic(LogicOp op, ExprPtr a, ExprPtr b);
ExprPtr piecewise(std::vector<ExprPtr> cond_value_pairs, ExprPtr otherwise);
}  // namespace ast

// Flattened stack program compiled from an Expr; cheap to evaluate at many
// points. Boolean operators short-circuit, piecewise branches are lazy.
class Program {
 public:
  explicit Program(ExprPtr e);
  double eval(std::span<const double> point) const;
  const Expr& expr() const { return *root_; }

  enum class Op : unsigned char {
    push, load, neg, add, sub, mul, div, pow, abs, log, exp, sqrt, loglog,
    min, max, chi, lt, le, gt, ge, eq, jump, jump_if_false, jump_if_true,
    pop
  };
  struct Instr {
    Op op;
    std::size_t arg = 0;  // var index, operand count, or jump target
    double a = 0.0, b = 0.0;
    const Expr* node = nullptr;
  };

 private:
  void emit(const Expr& e);
  ExprPtr root_;
  std::vector<Instr> code_;
  int needed_dim_ = 0;
  std::size_t max_stack_ = 0;
};

double eval(const Expr& e, std::span<const double> point);
double eval(const ExprPtr& e, std::initializer_list<double> point);

// Evaluates e at every masked-in cell center. Errors carry the coordinate.
GridFunction sample(const Expr& e, const DomainPtr& dom);
ExponentField sample_exponent(const Expr& e, const DomainPtr& dom);

// Evaluates a constant (variable-free) expression.
double eval_constant(const std::string& src);

}  // namespace vlab
