#include "vlab/simd.hpp"

namespace vlab::simd::detail {

MinMax minmax_scalar(std::span<const double> xs) {
  MinMax r{xs[0], xs[0]};
  for (double x : xs) {
    r.min = x < r.min ? x : r.min;
    r.max = x > r.max ? x : r.max;
  }
  return r;
}

void promote_greater_scalar(std::span<double> best_val, std::span<std::int64_t> best_tag,
                            std::span<const double> cand_val, std::span<const std::int64_t> cand_tag) {
  for (std::size_t i = 0; i < best_val.size(); ++i) {
    if (cand_val[i] > best_val[i]) {
      best_val[i] = cand_val[i];
      best_tag[i] = cand_tag[i];
    }
  }
}

void dft_scalar(std::span<const double> re_in, std::span<const double> im_in,
                std::span<const double> cos_t, std::span<const double> sin_t,
                std::span<double> re_out, std::span<double> im_out) {
  const std::size_t n = re_in.size();
  for (std::size_t k = 0; k < n; ++k) {
    double re = 0.0, im = 0.0;
    std::size_t m = 0;  // (j * k) mod n
    for (std::size_t j = 0; j < n; ++j) {
      const double c = cos_t[m], s = sin_t[m];
      re += re_in[j] * c;
      re += im_in[j] * s;
      im += im_in[j] * c;
      im -= re_in[j] * s;
      m += k;
      if (m >= n) m -= n;
    }
    re_out[k] = re;
    im_out[k] = im;
  }
}

}  // namespace vlab::simd::detail
