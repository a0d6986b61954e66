#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "vlab/expr.hpp"

using namespace vlab;
using namespace vlab::testing;

namespace {

// Straightforward tree walk, kept independent of the compiled Program.
double walk(const Expr& e, double x, double x2) {
  auto arg = [&](std::size_t i) { return walk(*e.args[i], x, x2); };
  switch (e.kind) {
    case NodeKind::number: return e.number;
    case NodeKind::variable: return e.var == 0 ? x : x2;
    case NodeKind::negate: return -arg(0);
    case NodeKind::binary: {
      const double a = arg(0), b = arg(1);
      switch (e.binary) {
        case BinaryOp::add: return a + b;
        case BinaryOp::sub: return a - b;
        case BinaryOp::mul: return a * b;
        case BinaryOp::div:
          if (b == 0) throw EvalError("division by zero", "");
          return a / b;
        case BinaryOp::pow: return std::pow(a, b);
      }
      break;
    }
    case NodeKind::call:
      switch (e.func) {
        case Func::abs: return std::fabs(arg(0));
        case Func::log: return std::log(arg(0));
        case Func::exp: return std::exp(arg(0));
        case Func::sqrt: return std::sqrt(arg(0));
        case Func::loglog: return std::log(std::log(arg(0)));
        case Func::chi: return (x >= e.lo && x <= e.hi) ? 1.0 : 0.0;
        case Func::min:
        case Func::max: {
          double acc = arg(0);
          for (std::size_t i = 1; i < e.args.size(); ++i)
            acc = e.func == Func::min ? std::min(acc, arg(i)) : std::max(acc, arg(i));
          return acc;
        }
      }
      break;
    case NodeKind::compare: {
      const double a = arg(0), b = arg(1);
      switch (e.compare) {
        case CompareOp::lt: return a < b;
        case CompareOp::le: return a <= b;
        case CompareOp::gt: return a > b;
        case CompareOp::ge: return a >= b;
        case CompareOp::eq: return a == b;
      }
      break;
    }
    case NodeKind::logic:
      if (e.logic == LogicOp::land) return arg(0) != 0 && arg(1) != 0;
      return arg(0) != 0 || arg(1) != 0;
    case NodeKind::piecewise: {
      const std::size_t n = e.args.size();
      for (std::size_t i = 0; i + 1 < n; i += 2)
        if (arg(i) != 0) return arg(i + 1);
      return arg(n - 1);
    }
  }
  return NAN;
}

struct Gen {
  std::mt19937_64 rng;
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
  double number() { return std::round(std::uniform_real_distribution<double>(-8, 8)(rng) * 16) / 16; }

  ExprPtr boolean(int depth) {
    if (depth > 0 && pick(3) == 0)
      return ast::logic(pick(2) ? LogicOp::land : LogicOp::lor, boolean(depth - 1), boolean(depth - 1));
    return ast::compare(static_cast<CompareOp>(pick(5)), real(depth - 1), real(depth - 1));
  }

  // Only total operations, so both evaluators must return the same double.
  ExprPtr real(int depth) {
    if (depth <= 0) {
      switch (pick(3)) {
        case 0: return ast::number(number());
        case 1: return ast::variable(0);
        default: return ast::variable(pick(2));
      }
    }
    switch (pick(11)) {
      case 0: return ast::negate(real(depth - 1));
      case 1: return ast::binary(BinaryOp::add, real(depth - 1), real(depth - 1));
      case 2: return ast::binary(BinaryOp::sub, real(depth - 1), real(depth - 1));
      case 3: return ast::binary(BinaryOp::mul, real(depth - 1), real(depth - 1));
      case 4: {
        auto sq = ast::binary(BinaryOp::mul, real(depth - 1), real(depth - 1));
        return ast::binary(BinaryOp::div, real(depth - 1),
                           ast::binary(BinaryOp::add, ast::number(1), ast::call(Func::abs, {sq})));
      }
      case 5: return ast::call(Func::abs, {real(depth - 1)});
      case 6: return ast::call(pick(2) ? Func::min : Func::max, {real(depth - 1), real(depth - 1), real(depth - 1)});
      case 7: {
        const double a = number();
        return ast::chi(a, a + 1 + pick(4));
      }
      case 8: return ast::binary(BinaryOp::pow, ast::call(Func::abs, {real(depth - 1)}), ast::number(pick(4)));
      case 9: return ast::piecewise({boolean(depth - 1), real(depth - 1)}, real(depth - 1));
      default: return ast::call(Func::sqrt, {ast::call(Func::abs, {real(depth - 1)})});
    }
  }
};

}  // namespace

TEST_CASE("parse examples") {
  const ExprPtr e = parse("2 - 1/(1+x^2)");
  REQUIRE(e->kind == NodeKind::binary);
  CHECK(e->binary == BinaryOp::sub);
  CHECK(e->args[0]->number == 2);
  CHECK(e->args[1]->kind == NodeKind::binary);
  CHECK(e->args[1]->binary == BinaryOp::div);

  CHECK_NOTHROW(parse("2*loglog(x)/(loglog(x)-2)"));
  CHECK_NOTHROW(parse("piecewise(x >= 2 and x <= 3 : 3, else : 2)"));
  CHECK_NOTHROW(parse("x1 * x2 + chi(-1, 1)"));
}

TEST_CASE("parse errors carry offsets") {
  try {
    parse("chi(0,1");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 8);
    CHECK(e.expected().find(')') != std::string::npos);
  }
  auto offset_of = [](const std::string& s) -> std::size_t {
    try {
      parse(s);
    } catch (const ParseError& e) {
      return e.offset();
    }
    return 0;
  };
  CHECK(offset_of("1 +") == 4);
  CHECK(offset_of("foo(x)") == 1);
  CHECK(offset_of("2 $ 3") == 3);
  CHECK(offset_of("chi(1, 0)") > 0);
  CHECK(offset_of("log(1, 2)") > 0);
  CHECK(offset_of("x < 1") > 0);  // a condition is not a value
  CHECK(offset_of("piecewise(x : 1, else : 2)") > 0);
}

TEST_CASE("evaluation examples") {
  CHECK(eval(parse("2 - 1/(1+x^2)"), {0.0}) == 1.0);
  const double big = std::exp(std::exp(4.0));
  CHECK(eval(parse("2*loglog(x)/(loglog(x)-2)"), {big}) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(eval(parse("loglog(x)"), {2.0}) == doctest::Approx(std::log(std::log(2.0))));
  CHECK(eval(parse("loglog(x)"), {2.0}) == doctest::Approx(-0.3665129205816643));
  CHECK(eval(parse("piecewise(x >= 2 and x <= 3 : 3, else : 2)"), {2.5}) == 3);
  CHECK(eval(parse("piecewise(x >= 2 and x <= 3 : 3, else : 2)"), {0.5}) == 2);
  CHECK(eval(parse("chi(0, 1)"), {1.0}) == 1);
  CHECK(eval(parse("chi(0, 1)"), {1.5}) == 0);
  CHECK(eval(parse("x2 - x1"), {1.0, 5.0}) == 4);
  CHECK(eval_constant("exp(9)") == std::exp(9.0));
  CHECK(eval_constant("-2^2") == -4);
  CHECK(eval_constant("2^3^2") == 512);
}

TEST_CASE("evaluation errors") {
  CHECK_THROWS_AS(eval(parse("loglog(x)"), {1.0}), EvalError);
  CHECK_THROWS_AS(eval(parse("log(x)"), {0.0}), EvalError);
  CHECK_THROWS_AS(eval(parse("1/x"), {0.0}), EvalError);
  CHECK_THROWS_AS(eval(parse("sqrt(x)"), {-1.0}), EvalError);
  CHECK_THROWS_AS(eval(parse("x^0.5"), {-1.0}), EvalError);
  CHECK_THROWS_AS(eval(parse("x2"), {1.0}), EvalError);
  CHECK_THROWS_AS(eval_constant("x + 1"), EvalError);
  try {
    sample(*parse("1/(x - 0.25)"), interval(0, 1, 0.5));
    FAIL("expected an evaluation error");
  } catch (const EvalError& e) {
    CHECK(std::string(e.what()).find("x = 0.25") != std::string::npos);
  }
}

TEST_CASE("printing is canonical and round-trips") {
  for (const char* s : {"2 - 1/(1+x^2)", "-(x - 1)^2", "2*loglog(x)/(loglog(x)-2)", "(2^3)^2", "x - (1 - x)",
                        "piecewise(x < 0 or x > 1 : abs(x), else : 0)", "max(x, 1, -2) / min(x2, 3)"}) {
    const ExprPtr e = parse(s);
    const std::string printed = print(*e);
    CHECK(structurally_equal(*parse(printed), *e));
    CHECK(print(*parse(printed)) == printed);
  }
}

TEST_CASE("random expressions: round trip and evaluator agreement") {
  Gen g{std::mt19937_64(2024)};
  std::uniform_real_distribution<double> u(-4, 4);
  for (int i = 0; i < 50; ++i) {
    const ExprPtr e = g.real(4);
    const std::string text = print(*e);
    CAPTURE(text);
    const ExprPtr back = parse(text);
    REQUIRE(structurally_equal(*back, *e));
    const Program prog(back);
    for (int k = 0; k < 20; ++k) {
      const double pt[2] = {u(g.rng), u(g.rng)};
      const double expect = walk(*e, pt[0], pt[1]);
      if (!std::isfinite(expect)) continue;
      CHECK(prog.eval(pt) == expect);
    }
  }
}
