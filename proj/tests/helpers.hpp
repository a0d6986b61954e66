#pragma once

#include <random>
#include <string>
#include <vector>

#include "vlab/expr.hpp"
#include "vlab/grid.hpp"

namespace vlab::testing {

inline ExponentField exponent(const std::string& src, const DomainPtr& d) {
  return sample_exponent(*parse(src), d);
}

inline GridFunction function(const std::string& src, const DomainPtr& d) { return sample(*parse(src), d); }

inline GridFunction values_on(const DomainPtr& d, std::vector<double> v) { return GridFunction(d, std::move(v)); }

inline DomainPtr interval(double a, double b, double h) { return share(make_interval(a, b, h)); }

// Random field on d with values uniform in [lo, hi], rounded to a few binary
// digits so ties between cells actually happen.
inline GridFunction random_field(const DomainPtr& d, std::mt19937_64& rng, double lo, double hi, bool coarse = false) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(d->cell_count());
  for (double& x : v) {
    x = u(rng);
    if (coarse) x = std::round(x * 4) / 4;
  }
  return GridFunction(d, std::move(v));
}

}  // namespace vlab::testing
