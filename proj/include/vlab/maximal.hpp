#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "vlab/grid.hpp"

namespace vlab {

// An averaging window in box-index coordinates. 1D: cells [start[0],
// start[0] + size). 2D: the size x size square with lower corner `start`,
// which may hang over the bounding box into zero padding.
struct Window {
  std::array<std::ptrdiff_t, 2> start{0, 0};
  std::size_t size = 0;
  bool operator==(const Window&) const = default;
};

struct MaxOpResult {
  GridFunction mf;
  std::vector<Window> windows;  // one per masked-in cell, argmax of the average
};

// Discrete uncentered maximal function of |f| (zero-extended off the mask).
// 1D windows are contiguous cell ranges inside the bounding box. 2D windows
// are k x k squares meeting the box, k up to the longer box side. Averages are
// the correctly rounded exact window sum divided by the cell count. Ties go to
// the smaller window, then the smaller start (y before x in 2D).
//
// The oracle enumerates every window; the fast version uses prefix sums /
// a summed-area table with sliding-window maxima and is bit-identical.
MaxOpResult maximal_oracle(const GridFunction& f);
MaxOpResult maximal_fast(const GridFunction& f);

// Operator plug-in for the modular inequality experiments.
class Operator {
 public:
  virtual ~Operator() = default;
  virtual std::string name() const = 0;
  // Whether the operator is bounded on the constant-exponent space L^p.
  virtual bool bounded_on(double p) const = 0;
  virtual GridFunction apply(const GridFunction& f) const = 0;
};

class IdentityOperator : public Operator {
 public:
  std::string name() const override { return "identity"; }
  bool bounded_on(double) const override { return true; }
  GridFunction apply(const GridFunction& f) const override { return f; }
};

class MaximalOperator : public Operator {
 public:
  std::string name() const override { return "maximal"; }
  bool bounded_on(double p) const override { return p > 1; }
  GridFunction apply(const GridFunction& f) const override { return maximal_fast(f).mf; }
};

// |unitary DFT of f| on the frequency grid, which is the full bounding box of
// f's grid (all cells masked in). sum |Tf|^2 h^d = sum |f|^2 h^d.
class FourierModulus : public Operator {
 public:
  std::string name() const override { return "fourier"; }
  bool bounded_on(double p) const override { return p == 2.0; }
  GridFunction apply(const GridFunction& f) const override;
};

GridFunction apply_operator(const Operator& t, const GridFunction& f);

}  // namespace vlab
