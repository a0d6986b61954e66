#include "vlab/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace vlab {

ParseError::ParseError(std::size_t offset, std::string expected, std::string excerpt)
    : std::runtime_error("parse error at column " + std::to_string(offset) + ": expected " +
                         expected + "\n" + excerpt),
      offset_(offset),
      expected_(std::move(expected)),
      excerpt_(std::move(excerpt)) {}

EvalError::EvalError(std::string message, std::string subexpression)
    : std::runtime_error(message + " in '" + subexpression + "'"),
      subexpression_(std::move(subexpression)) {}

namespace {

// ---------------------------------------------------------------------------
// Tokens

enum class Tok { number, ident, op, end };

struct Token {
  Tok kind;
  std::string text;
  double value = 0.0;
  std::size_t offset = 0;  // 1-based
};

std::string excerpt_at(const std::string& src, std::size_t offset) {
  // Single line: the source line that contains the offset plus a caret.
  std::size_t zero = offset == 0 ? 0 : offset - 1;
  zero = std::min(zero, src.size());
  const std::size_t begin = src.rfind('\n', zero == 0 ? 0 : zero - 1);
  const std::size_t line_start = (begin == std::string::npos || zero == 0) ? 0 : begin + 1;
  std::size_t line_end = src.find('\n', zero);
  if (line_end == std::string::npos) line_end = src.size();
  std::string line = src.substr(line_start, line_end - line_start);
  return line + "\n" + std::string(zero - line_start, ' ') + "^";
}

std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto fail = [&](std::size_t at, const std::string& what) {
    throw ParseError(at + 1, what, excerpt_at(src, at + 1));
  };
  while (i < src.size()) {
    const unsigned char c = static_cast<unsigned char>(src[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(c) || (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      while (i < src.size() && (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '.')) ++i;
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
          i = j;
          while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
        }
      }
      Token t{Tok::number, src.substr(start, i - start), 0.0, start + 1};
      const auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
      if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
        fail(start, "a number");
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(c) || c == '_') {
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      out.push_back({Tok::ident, src.substr(start, i - start), 0.0, start + 1});
      continue;
    }
    auto starts = [&](const char* s) { return src.compare(i, std::strlen(s), s) == 0; };
    struct Spelling {
      const char* text;
      const char* canon;
    };
    static constexpr Spelling kOps[] = {
        {"<=", "<="}, {">=", ">="}, {"==", "="}, {"\xE2\x89\xA4", "<="}, {"\xE2\x89\xA5", ">="},
        {"\xC3\xB7", "/"}, {"+", "+"}, {"-", "-"}, {"*", "*"}, {"/", "/"}, {"^", "^"},
        {"(", "("}, {")", ")"}, {",", ","}, {":", ":"}, {"<", "<"}, {">", ">"}, {"=", "="}};
    bool matched = false;
    for (const auto& op : kOps) {
      if (starts(op.text)) {
        out.push_back({Tok::op, op.canon, 0.0, start + 1});
        i += std::strlen(op.text);
        matched = true;
        break;
      }
    }
    if (!matched) fail(start, "an operator, number or identifier");
  }
  out.push_back({Tok::end, "", 0.0, src.size() + 1});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(const std::string& src) : src_(src), toks_(tokenize(src)) {}

  ExprPtr run() {
    ExprPtr e = parse_or();
    if (peek().kind != Tok::end) fail(peek(), "end of input");
    require_numeric(e);
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  bool at_op(const char* s) const { return peek().kind == Tok::op && peek().text == s; }
  bool at_ident(const char* s) const { return peek().kind == Tok::ident && peek().text == s; }

  [[noreturn]] void fail(const Token& t, const std::string& expected) const {
    throw ParseError(t.offset, expected, excerpt_at(src_, t.offset));
  }
  [[noreturn]] void fail_at(std::size_t offset, const std::string& expected) const {
    throw ParseError(offset, expected, excerpt_at(src_, offset));
  }
  void expect_op(const char* s) {
    if (!at_op(s)) fail(peek(), std::string("\"") + s + "\"");
    next();
  }
  void require_numeric(const ExprPtr& e) const {
    if (e->is_boolean()) fail_at(e->offset, "a numeric expression, not a condition");
  }
  void require_boolean(const ExprPtr& e) const {
    if (!e->is_boolean()) fail_at(e->offset, "a condition");
  }

  static std::shared_ptr<Expr> node(NodeKind k, std::size_t offset) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->offset = offset;
    return e;
  }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (at_ident("or")) {
      const auto at = next().offset;
      ExprPtr rhs = parse_and();
      require_boolean(lhs);
      require_boolean(rhs);
      auto e = node(NodeKind::logic, at);
      e->logic = LogicOp::lor;
      e->args = {lhs, rhs};
      lhs = e;
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_cmp();
    while (at_ident("and")) {
      const auto at = next().offset;
      ExprPtr rhs = parse_cmp();
      require_boolean(lhs);
      require_boolean(rhs);
      auto e = node(NodeKind::logic, at);
      e->logic = LogicOp::land;
      e->args = {lhs, rhs};
      lhs = e;
    }
    return lhs;
  }

  ExprPtr parse_cmp() {
    ExprPtr lhs = parse_sum();
    static const std::pair<const char*, CompareOp> kCmp[] = {
        {"<", CompareOp::lt}, {"<=", CompareOp::le}, {">", CompareOp::gt},
        {">=", CompareOp::ge}, {"=", CompareOp::eq}};
    for (const auto& [text, op] : kCmp) {
      if (at_op(text)) {
        const auto at = next().offset;
        ExprPtr rhs = parse_sum();
        require_numeric(lhs);
        require_numeric(rhs);
        auto e = node(NodeKind::compare, at);
        e->compare = op;
        e->args = {lhs, rhs};
        return e;
      }
    }
    return lhs;
  }

  ExprPtr parse_sum() {
    ExprPtr lhs = parse_product();
    while (at_op("+") || at_op("-")) {
      const Token& t = next();
      ExprPtr rhs = parse_product();
      require_numeric(lhs);
      require_numeric(rhs);
      auto e = node(NodeKind::binary, t.offset);
      e->binary = t.text == "+" ? BinaryOp::add : BinaryOp::sub;
      e->args = {lhs, rhs};
      lhs = e;
    }
    return lhs;
  }

  ExprPtr parse_product() {
    ExprPtr lhs = parse_unary();
    while (at_op("*") || at_op("/")) {
      const Token& t = next();
      ExprPtr rhs = parse_unary();
      require_numeric(lhs);
      require_numeric(rhs);
      auto e = node(NodeKind::binary, t.offset);
      e->binary = t.text == "*" ? BinaryOp::mul : BinaryOp::div;
      e->args = {lhs, rhs};
      lhs = e;
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (at_op("-")) {
      const auto at = next().offset;
      ExprPtr operand = parse_unary();
      require_numeric(operand);
      if (operand->kind == NodeKind::number) {
        auto lit = node(NodeKind::number, at);
        lit->number = -operand->number;
        return lit;
      }
      auto e = node(NodeKind::negate, at);
      e->args = {operand};
      return e;
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    if (at_op("^")) {
      const auto at = next().offset;
      ExprPtr exponent = parse_unary();
      require_numeric(base);
      require_numeric(exponent);
      auto e = node(NodeKind::binary, at);
      e->binary = BinaryOp::pow;
      e->args = {base, exponent};
      return e;
    }
    return base;
  }

  double literal_bound() {
    bool negative = false;
    if (at_op("-")) {
      next();
      negative = true;
    }
    if (peek().kind != Tok::number) fail(peek(), "a numeric literal bound");
    const double v = next().value;
    return negative ? -v : v;
  }

  ExprPtr parse_atom() {
    const Token& t = peek();
    if (t.kind == Tok::number) {
      next();
      auto e = node(NodeKind::number, t.offset);
      e->number = t.value;
      return e;
    }
    if (t.kind == Tok::op && t.text == "(") {
      next();
      ExprPtr inner = parse_or();
      expect_op(")");
      return inner;
    }
    if (t.kind != Tok::ident) fail(t, "a number, variable, function call or \"(\"");
    next();
    const std::string& name = t.text;
    if (name == "x" || name == "x1" || name == "x2") {
      auto e = node(NodeKind::variable, t.offset);
      e->var = name == "x2" ? 1 : 0;
      e->var_name = name;
      return e;
    }
    if (name == "piecewise") return parse_piecewise(t);
    static const std::pair<const char*, Func> kFuncs[] = {
        {"abs", Func::abs}, {"log", Func::log}, {"exp", Func::exp}, {"sqrt", Func::sqrt},
        {"loglog", Func::loglog}, {"min", Func::min}, {"max", Func::max}, {"chi", Func::chi}};
    const auto it = std::find_if(std::begin(kFuncs), std::end(kFuncs),
                                 [&](const auto& f) { return name == f.first; });
    if (it == std::end(kFuncs))
      fail_at(t.offset, "x, x1, x2 or a known function (unknown identifier '" + name + "')");
    expect_op("(");
    auto e = node(NodeKind::call, t.offset);
    e->func = it->second;
    if (e->func == Func::chi) {
      e->lo = literal_bound();
      expect_op(",");
      e->hi = literal_bound();
      expect_op(")");
      if (!(e->lo < e->hi)) fail_at(t.offset, "chi bounds with lo < hi");
      return e;
    }
    e->args.push_back(parse_or());
    while (at_op(",")) {
      next();
      e->args.push_back(parse_or());
    }
    expect_op(")");
    for (const auto& a : e->args) require_numeric(a);
    const bool variadic = e->func == Func::min || e->func == Func::max;
    if (variadic ? e->args.size() < 2 : e->args.size() != 1)
      fail_at(t.offset, name + (variadic ? " with at least two arguments" : " with exactly one argument"));
    return e;
  }

  ExprPtr parse_piecewise(const Token& t) {
    expect_op("(");
    auto e = node(NodeKind::piecewise, t.offset);
    while (true) {
      if (at_ident("else")) {
        next();
        expect_op(":");
        ExprPtr otherwise = parse_or();
        require_numeric(otherwise);
        e->args.push_back(otherwise);
        expect_op(")");
        break;
      }
      ExprPtr cond = parse_or();
      require_boolean(cond);
      expect_op(":");
      ExprPtr value = parse_or();
      require_numeric(value);
      e->args.push_back(cond);
      e->args.push_back(value);
      if (!at_op(",")) fail(peek(), "\",\" followed by another case or else");
      next();
    }
    if (e->args.size() < 3) fail_at(t.offset, "piecewise with at least one condition");
    return e;
  }

  const std::string& src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printing

std::string number_text(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

int precedence(const Expr& e) {
  switch (e.kind) {
    case NodeKind::logic: return e.logic == LogicOp::lor ? 1 : 2;
    case NodeKind::compare: return 3;
    case NodeKind::binary:
      switch (e.binary) {
        case BinaryOp::add:
        case BinaryOp::sub: return 4;
        case BinaryOp::mul:
        case BinaryOp::div: return 5;
        case BinaryOp::pow: return 7;
      }
      return 7;
    case NodeKind::negate: return 6;
    case NodeKind::number: return e.number < 0 ? 6 : 8;
    default: return 8;
  }
}

const char* func_name(Func f) {
  switch (f) {
    case Func::abs: return "abs";
    case Func::log: return "log";
    case Func::exp: return "exp";
    case Func::sqrt: return "sqrt";
    case Func::loglog: return "loglog";
    case Func::min: return "min";
    case Func::max: return "max";
    case Func::chi: return "chi";
  }
  return "?";
}

void print_to(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print_to(e, out);
  if (wrap) out += ')';
}

void print_to(const Expr& e, std::string& out) {
  switch (e.kind) {
    case NodeKind::number: out += number_text(e.number); return;
    case NodeKind::variable: out += e.var_name.empty() ? (e.var == 0 ? "x" : "x2") : e.var_name; return;
    case NodeKind::negate:
      out += '-';
      print_wrapped(*e.args[0], precedence(*e.args[0]) < 6, out);
      return;
    case NodeKind::binary: {
      const int p = precedence(e);
      if (e.binary == BinaryOp::pow) {
        print_wrapped(*e.args[0], precedence(*e.args[0]) < 8, out);
        out += '^';
        print_wrapped(*e.args[1], precedence(*e.args[1]) < 6, out);
        return;
      }
      static const char* kText[] = {" + ", " - ", " * ", " / "};
      print_wrapped(*e.args[0], precedence(*e.args[0]) < p, out);
      out += kText[static_cast<int>(e.binary)];
      print_wrapped(*e.args[1], precedence(*e.args[1]) <= p, out);
      return;
    }
    case NodeKind::compare: {
      static const char* kText[] = {" < ", " <= ", " > ", " >= ", " = "};
      print_wrapped(*e.args[0], precedence(*e.args[0]) <= 3, out);
      out += kText[static_cast<int>(e.compare)];
      print_wrapped(*e.args[1], precedence(*e.args[1]) <= 3, out);
      return;
    }
    case NodeKind::logic: {
      const int p = precedence(e);
      print_wrapped(*e.args[0], precedence(*e.args[0]) < p, out);
      out += e.logic == LogicOp::land ? " and " : " or ";
      print_wrapped(*e.args[1], precedence(*e.args[1]) <= p, out);
      return;
    }
    case NodeKind::call:
      out += func_name(e.func);
      out += '(';
      if (e.func == Func::chi) {
        out += number_text(e.lo) + ", " + number_text(e.hi);
      } else {
        for (std::size_t i = 0; i < e.args.size(); ++i) {
          if (i) out += ", ";
          print_to(*e.args[i], out);
        }
      }
      out += ')';
      return;
    case NodeKind::piecewise:
      out += "piecewise(";
      for (std::size_t i = 0; i + 1 < e.args.size(); i += 2) {
        print_to(*e.args[i], out);
        out += " : ";
        print_to(*e.args[i + 1], out);
        out += ", ";
      }
      out += "else : ";
      print_to(*e.args.back(), out);
      out += ')';
      return;
  }
}

int arity_of(const Expr& e) {
  int n = e.kind == NodeKind::variable ? e.var + 1 : 0;
  if (e.kind == NodeKind::call && e.func == Func::chi) n = 1;
  for (const auto& a : e.args) n = std::max(n, arity_of(*a));
  return n;
}

std::string fmt_coord(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

ExprPtr parse(const std::string& src) { return Parser(src).run(); }

std::string print(const Expr& e) {
  std::string out;
  print_to(e, out);
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case NodeKind::number:
      if (a.number != b.number) return false;
      break;
    case NodeKind::variable:
      if (a.var != b.var) return false;
      break;
    case NodeKind::binary:
      if (a.binary != b.binary) return false;
      break;
    case NodeKind::call:
      if (a.func != b.func) return false;
      if (a.func == Func::chi && (a.lo != b.lo || a.hi != b.hi)) return false;
      break;
    case NodeKind::compare:
      if (a.compare != b.compare) return false;
      break;
    case NodeKind::logic:
      if (a.logic != b.logic) return false;
      break;
    default: break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  return true;
}

int arity(const Expr& e) { return arity_of(e); }

namespace ast {

namespace {
std::shared_ptr<Expr> make(NodeKind k) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  return e;
}
}  // namespace

ExprPtr number(double v) {
  auto e = make(NodeKind::number);
  e->number = v;
  return e;
}
ExprPtr variable(int index) {
  auto e = make(NodeKind::variable);
  e->var = index;
  e->var_name = index == 0 ? "x" : "x2";
  return e;
}
ExprPtr negate(ExprPtr a) {
  // A negated literal is a negative literal, as in the parser.
  if (a->kind == NodeKind::number) return number(-a->number);
  auto e = make(NodeKind::negate);
  e->args = {std::move(a)};
  return e;
}
ExprPtr binary(BinaryOp op, ExprPtr a, ExprPtr b) {
  auto e = make(NodeKind::binary);
  e->binary = op;
  e->args = {std::move(a), std::move(b)};
  return e;
}
ExprPtr call(Func f, std::vector<ExprPtr> args) {
  auto e = make(NodeKind::call);
  e->func = f;
  e->args = std::move(args);
  return e;
}
ExprPtr chi(double lo, double hi) {
  auto e = make(NodeKind::call);
  e->func = Func::chi;
  e->lo = lo;
  e->hi = hi;
  return e;
}
ExprPtr compare(CompareOp op, ExprPtr a, ExprPtr b) {
  auto e = make(NodeKind::compare);
  e->compare = op;
  e->args = {std::move(a), std::move(b)};
  return e;
}
ExprPtr logic(LogicOp op, ExprPtr a, ExprPtr b) {
  auto e = make(NodeKind::logic);
  e->logic = op;
  e->args = {std::move(a), std::move(b)};
  return e;
}
ExprPtr piecewise(std::vector<ExprPtr> cond_value_pairs, ExprPtr otherwise) {
  auto e = make(NodeKind::piecewise);
  e->args = std::move(cond_value_pairs);
  e->args.push_back(std::move(otherwise));
  return e;
}

}  // namespace ast

// ---------------------------------------------------------------------------
// Program

Program::Program(ExprPtr e) : root_(std::move(e)) {
  needed_dim_ = arity_of(*root_);
  emit(*root_);
}

void Program::emit(const Expr& e) {
  auto push = [&](Instr in) { code_.push_back(in); };
  switch (e.kind) {
    case NodeKind::number: push({Op::push, 0, e.number, 0, &e}); break;
    case NodeKind::variable: push({Op::load, static_cast<std::size_t>(e.var), 0, 0, &e}); break;
    case NodeKind::negate:
      emit(*e.args[0]);
      push({Op::neg, 0, 0, 0, &e});
      break;
    case NodeKind::binary: {
      emit(*e.args[0]);
      emit(*e.args[1]);
      static const Op kOps[] = {Op::add, Op::sub, Op::mul, Op::div, Op::pow};
      push({kOps[static_cast<int>(e.binary)], 0, 0, 0, &e});
      break;
    }
    case NodeKind::compare: {
      emit(*e.args[0]);
      emit(*e.args[1]);
      static const Op kOps[] = {Op::lt, Op::le, Op::gt, Op::ge, Op::eq};
      push({kOps[static_cast<int>(e.compare)], 0, 0, 0, &e});
      break;
    }
    case NodeKind::call:
      if (e.func == Func::chi) {
        push({Op::load, 0, 0, 0, &e});
        push({Op::chi, 0, e.lo, e.hi, &e});
        break;
      }
      for (const auto& a : e.args) emit(*a);
      switch (e.func) {
        case Func::abs: push({Op::abs, 0, 0, 0, &e}); break;
        case Func::log: push({Op::log, 0, 0, 0, &e}); break;
        case Func::exp: push({Op::exp, 0, 0, 0, &e}); break;
        case Func::sqrt: push({Op::sqrt, 0, 0, 0, &e}); break;
        case Func::loglog: push({Op::loglog, 0, 0, 0, &e}); break;
        case Func::min: push({Op::min, e.args.size(), 0, 0, &e}); break;
        case Func::max: push({Op::max, e.args.size(), 0, 0, &e}); break;
        case Func::chi: break;
      }
      break;
    case NodeKind::logic: {
      // a and b: a; jif L0; b; jump L1; L0: push 0; L1:
      emit(*e.args[0]);
      const std::size_t branch = code_.size();
      push({e.logic == LogicOp::land ? Op::jump_if_false : Op::jump_if_true, 0, 0, 0, &e});
      emit(*e.args[1]);
      const std::size_t skip = code_.size();
      push({Op::jump, 0, 0, 0, &e});
      code_[branch].arg = code_.size();
      push({Op::push, 0, e.logic == LogicOp::land ? 0.0 : 1.0, 0, &e});
      code_[skip].arg = code_.size();
      break;
    }
    case NodeKind::piecewise: {
      std::vector<std::size_t> exits;
      for (std::size_t i = 0; i + 1 < e.args.size(); i += 2) {
        emit(*e.args[i]);
        const std::size_t branch = code_.size();
        push({Op::jump_if_false, 0, 0, 0, &e});
        emit(*e.args[i + 1]);
        exits.push_back(code_.size());
        push({Op::jump, 0, 0, 0, &e});
        code_[branch].arg = code_.size();
      }
      emit(*e.args.back());
      for (std::size_t at : exits) code_[at].arg = code_.size();
      break;
    }
  }
  // Conservative stack bound: every instruction pushes at most one value.
  max_stack_ = std::max(max_stack_, code_.size());
}

double Program::eval(std::span<const double> point) const {
  if (static_cast<int>(point.size()) < needed_dim_)
    throw EvalError("point has " + std::to_string(point.size()) + " coordinate(s), expression needs " +
                        std::to_string(needed_dim_),
                    print(*root_));
  constexpr std::size_t kInline = 64;
  double inline_stack[kInline] = {};
  std::vector<double> heap;
  double* stack = inline_stack;
  if (max_stack_ > kInline) {
    heap.resize(max_stack_);
    stack = heap.data();
  }
  std::size_t sp = 0;
  auto fail = [](const Instr& in, const char* what) -> double {
    throw EvalError(what, print(*in.node));
  };
  for (std::size_t pc = 0; pc < code_.size();) {
    const Instr& in = code_[pc++];
    switch (in.op) {
      case Op::push: stack[sp++] = in.a; break;
      case Op::load: stack[sp++] = point[in.arg]; break;
      case Op::neg: stack[sp - 1] = -stack[sp - 1]; break;
      case Op::add: --sp; stack[sp - 1] += stack[sp]; break;
      case Op::sub: --sp; stack[sp - 1] -= stack[sp]; break;
      case Op::mul: --sp; stack[sp - 1] *= stack[sp]; break;
      case Op::div:
        --sp;
        if (stack[sp] == 0.0) fail(in, "division by zero");
        stack[sp - 1] /= stack[sp];
        break;
      case Op::pow: {
        --sp;
        const double base = stack[sp - 1], ex = stack[sp];
        if (base < 0 && ex != std::floor(ex)) fail(in, "non-real power of a negative base");
        if (base == 0 && ex < 0) fail(in, "division by zero in power");
        stack[sp - 1] = std::pow(base, ex);
        break;
      }
      case Op::abs: stack[sp - 1] = std::fabs(stack[sp - 1]); break;
      case Op::log:
        if (!(stack[sp - 1] > 0)) fail(in, "log of a non-positive argument");
        stack[sp - 1] = std::log(stack[sp - 1]);
        break;
      case Op::exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
      case Op::sqrt:
        if (stack[sp - 1] < 0) fail(in, "sqrt of a negative argument");
        stack[sp - 1] = std::sqrt(stack[sp - 1]);
        break;
      case Op::loglog:
        if (!(stack[sp - 1] > 1)) fail(in, "loglog needs an argument greater than 1");
        stack[sp - 1] = std::log(std::log(stack[sp - 1]));
        break;
      case Op::min:
      case Op::max: {
        double acc = stack[sp - in.arg];
        for (std::size_t k = sp - in.arg + 1; k < sp; ++k)
          acc = in.op == Op::min ? std::min(acc, stack[k]) : std::max(acc, stack[k]);
        sp -= in.arg;
        stack[sp++] = acc;
        break;
      }
      case Op::chi: stack[sp - 1] = (stack[sp - 1] >= in.a && stack[sp - 1] <= in.b) ? 1.0 : 0.0; break;
      case Op::lt: --sp; stack[sp - 1] = stack[sp - 1] < stack[sp] ? 1.0 : 0.0; break;
      case Op::le: --sp; stack[sp - 1] = stack[sp - 1] <= stack[sp] ? 1.0 : 0.0; break;
      case Op::gt: --sp; stack[sp - 1] = stack[sp - 1] > stack[sp] ? 1.0 : 0.0; break;
      case Op::ge: --sp; stack[sp - 1] = stack[sp - 1] >= stack[sp] ? 1.0 : 0.0; break;
      case Op::eq: --sp; stack[sp - 1] = stack[sp - 1] == stack[sp] ? 1.0 : 0.0; break;
      case Op::jump: pc = in.arg; break;
      case Op::jump_if_false:
        if (stack[--sp] == 0.0) pc = in.arg;
        break;
      case Op::jump_if_true:
        if (stack[--sp] != 0.0) pc = in.arg;
        break;
      case Op::pop: --sp; break;
    }
  }
  return stack[0];
}

double eval(const Expr& e, std::span<const double> point) {
  // Non-owning alias: the program never outlives this call.
  return Program(ExprPtr(std::shared_ptr<const Expr>{}, &e)).eval(point);
}

double eval(const ExprPtr& e, std::initializer_list<double> point) {
  return Program(e).eval(std::span<const double>(point.begin(), point.size()));
}

GridFunction sample(const Expr& e, const DomainPtr& dom) {
  const Program prog(ExprPtr(std::shared_ptr<const Expr>{}, &e));
  std::vector<double> values;
  values.reserve(dom->cell_count());
  for (std::size_t c : dom->cells()) {
    const auto center = dom->center(c);
    const std::span<const double> point(center.data(), static_cast<std::size_t>(dom->dim()));
    auto where = [&] {
      std::string s = "x = " + fmt_coord(center[0]);
      if (dom->dim() == 2) s += ", x2 = " + fmt_coord(center[1]);
      return s;
    };
    double v = 0;
    try {
      v = prog.eval(point);
    } catch (const EvalError& err) {
      throw EvalError(std::string(err.what()) + " at " + where(), err.subexpression());
    }
    if (!std::isfinite(v)) throw EvalError("non-finite value at " + where(), print(e));
    values.push_back(v);
  }
  return GridFunction(dom, std::move(values));
}

ExponentField sample_exponent(const Expr& e, const DomainPtr& dom) {
  return ExponentField(sample(e, dom));
}

double eval_constant(const std::string& src) {
  const ExprPtr e = parse(src);
  if (arity(*e) != 0) throw EvalError("expected a constant expression", print(*e));
  return Program(e).eval({});
}

}  // namespace vlab
