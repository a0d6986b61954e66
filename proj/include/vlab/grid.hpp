#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vlab {

class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Uniform grid over an axis-parallel box in R^1 or R^2 with a cell mask.
// Cells are indexed row-major with x fastest: box index = iy * nx + ix.
class GridDomain {
 public:
  GridDomain(int dim, std::array<double, 2> origin, double h,
             std::array<std::size_t, 2> counts, std::vector<std::uint8_t> mask);

  int dim() const { return dim_; }
  double h() const { return h_; }
  std::array<double, 2> origin() const { return origin_; }
  std::array<std::size_t, 2> counts() const { return counts_; }
  std::size_t nx() const { return counts_[0]; }
  std::size_t ny() const { return counts_[1]; }
  std::size_t box_size() const { return counts_[0] * counts_[1]; }

  // Masked-in cells, in increasing box index.
  std::span<const std::size_t> cells() const { return cells_; }
  std::size_t cell_count() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  bool contains(std::size_t box_index) const { return mask_[box_index] != 0; }
  // Position of a box cell in cells(), or -1 when masked out.
  std::ptrdiff_t slot(std::size_t box_index) const { return slots_[box_index]; }
  std::span<const std::uint8_t> mask() const { return mask_; }

  double cell_volume() const;
  double measure() const;
  std::array<double, 2> center(std::size_t box_index) const;
  double center_norm(std::size_t box_index) const;

  bool same_grid(const GridDomain& other) const;
  bool operator==(const GridDomain& other) const;

  // Same grid with a different mask.
  GridDomain with_mask(std::vector<std::uint8_t> mask) const;

 private:
  int dim_;
  std::array<double, 2> origin_;
  double h_;
  std::array<std::size_t, 2> counts_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::size_t> cells_;
  std::vector<std::ptrdiff_t> slots_;
};

using DomainPtr = std::shared_ptr<const GridDomain>;

// Real samples at the masked-in cell centers of a domain; zero outside.
class GridFunction {
 public:
  GridFunction(DomainPtr domain, std::vector<double> values);

  const GridDomain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t slot) const { return values_[slot]; }

  // Zero-extended lookup by box index.
  double at_box(std::size_t box_index) const;
  // Dense zero-extended copy over the whole bounding box.
  std::vector<double> box_values() const;

  // Samples on a sub-domain of the same grid. Cells of `sub` outside this
  // function's mask read as zero.
  GridFunction restrict_to(DomainPtr sub) const;

  GridFunction scaled(double c) const;
  GridFunction abs() const;

 private:
  DomainPtr domain_;
  std::vector<double> values_;
};

// Exponent samples; every value is finite and >= 1.
class ExponentField {
 public:
  explicit ExponentField(GridFunction values);

  const GridFunction& function() const { return values_; }
  const GridDomain& domain() const { return values_.domain(); }
  double at_box(std::size_t box_index) const { return values_.at_box(box_index); }

  // Exponent restricted to a sub-domain; throws when `sub` has cells where the
  // exponent is undefined.
  ExponentField restrict_to(DomainPtr sub) const;

 private:
  GridFunction values_;
};

// Domain construction.
GridDomain make_interval(double a, double b, double h);
GridDomain make_box(std::array<double, 2> lo, std::array<double, 2> hi, double h);
DomainPtr share(GridDomain d);

// Omega minus the closed ball B(0, R): keeps cells whose center norm is > R.
GridDomain tail_restrict(const GridDomain& dom, double radius);
// Omega intersected with B(0, R): keeps cells whose center norm is <= R.
GridDomain ball_restrict(const GridDomain& dom, double radius);

double measure(const GridDomain& dom);

// Sub-domain of masked-in cells where `keep(box_index)` holds.
GridDomain restrict_mask(const GridDomain& dom,
                         const std::function<bool(std::size_t)>& keep);
// Level-set helper: cells of f's domain where pred(f value) holds.
GridDomain restrict_mask(const GridFunction& f,
                         const std::function<bool(double)>& pred);

// Increasing radii R_1 < ... < R_m standing in for an unbounded domain: the
// k-th truncation is Omega intersected with B(0, R_k).
struct TruncationSchedule {
  std::vector<double> radii;

  // R_k = 2^k * r0 for k = 0..k_max.
  static TruncationSchedule geometric(double r0, int k_max = 12);
  // Throws GridError unless radii are finite, non-negative and strictly increasing.
  void validate() const;
};

// Text record {dim, origin, h, counts, mask run lengths}; exact round trip.
std::string serialize(const GridDomain& dom);
GridDomain parse_domain(const std::string& text);

}  // namespace vlab
