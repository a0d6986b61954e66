#include <immintrin.h>

#include "vlab/simd.hpp"

namespace vlab::simd::detail {

MinMax minmax_avx2(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 4) return minmax_scalar(xs);
  __m256d lo = _mm256_loadu_pd(xs.data());
  __m256d hi = lo;
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(xs.data() + i);
    lo = _mm256_min_pd(v, lo);
    hi = _mm256_max_pd(v, hi);
  }
  alignas(32) double l[4], h[4];
  _mm256_store_pd(l, lo);
  _mm256_store_pd(h, hi);
  MinMax r{l[0], h[0]};
  for (int k = 1; k < 4; ++k) {
    r.min = l[k] < r.min ? l[k] : r.min;
    r.max = h[k] > r.max ? h[k] : r.max;
  }
  for (; i < n; ++i) {
    r.min = xs[i] < r.min ? xs[i] : r.min;
    r.max = xs[i] > r.max ? xs[i] : r.max;
  }
  return r;
}

void promote_greater_avx2(std::span<double> best_val, std::span<std::int64_t> best_tag,
                          std::span<const double> cand_val, std::span<const std::int64_t> cand_tag) {
  const std::size_t n = best_val.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d b = _mm256_loadu_pd(best_val.data() + i);
    const __m256d c = _mm256_loadu_pd(cand_val.data() + i);
    const __m256d gt = _mm256_cmp_pd(c, b, _CMP_GT_OQ);
    if (_mm256_movemask_pd(gt) == 0) continue;
    _mm256_storeu_pd(best_val.data() + i, _mm256_blendv_pd(b, c, gt));
    const __m256d bt = _mm256_castsi256_pd(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(best_tag.data() + i)));
    const __m256d ct = _mm256_castsi256_pd(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(cand_tag.data() + i)));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(best_tag.data() + i),
                        _mm256_castpd_si256(_mm256_blendv_pd(bt, ct, gt)));
  }
  promote_greater_scalar(best_val.subspan(i), best_tag.subspan(i), cand_val.subspan(i), cand_tag.subspan(i));
}

void dft_avx2(std::span<const double> re_in, std::span<const double> im_in,
              std::span<const double> cos_t, std::span<const double> sin_t,
              std::span<double> re_out, std::span<double> im_out) {
  const std::size_t n = re_in.size();
  // Four output frequencies per pass; twiddles gathered by index (j*k) mod n.
  // Table indices must fit 32-bit gathers.
  if (n >= (std::size_t{1} << 30)) return dft_scalar(re_in, im_in, cos_t, sin_t, re_out, im_out);
  std::size_t k0 = 0;
  for (; k0 + 4 <= n; k0 += 4) {
    __m256d re = _mm256_setzero_pd(), im = _mm256_setzero_pd();
    const int ni = static_cast<int>(n);
    __m128i m = _mm_setzero_si128();
    const __m128i step = _mm_setr_epi32(static_cast<int>(k0), static_cast<int>(k0 + 1),
                                        static_cast<int>(k0 + 2), static_cast<int>(k0 + 3));
    const __m128i nv = _mm_set1_epi32(ni);
    const __m128i nm1 = _mm_set1_epi32(ni - 1);
    for (std::size_t j = 0; j < n; ++j) {
      const __m256d c = _mm256_i32gather_pd(cos_t.data(), m, 8);
      const __m256d s = _mm256_i32gather_pd(sin_t.data(), m, 8);
      const __m256d xr = _mm256_set1_pd(re_in[j]);
      const __m256d xi = _mm256_set1_pd(im_in[j]);
      re = _mm256_add_pd(re, _mm256_mul_pd(xr, c));
      re = _mm256_add_pd(re, _mm256_mul_pd(xi, s));
      im = _mm256_add_pd(im, _mm256_mul_pd(xi, c));
      im = _mm256_sub_pd(im, _mm256_mul_pd(xr, s));
      m = _mm_add_epi32(m, step);
      // m >= n  <=>  m > n - 1; both below 2n so one subtraction suffices.
      m = _mm_sub_epi32(m, _mm_and_si128(_mm_cmpgt_epi32(m, nm1), nv));
    }
    _mm256_storeu_pd(re_out.data() + k0, re);
    _mm256_storeu_pd(im_out.data() + k0, im);
  }
  for (std::size_t k = k0; k < n; ++k) {
    double re = 0.0, im = 0.0;
    std::size_t m = 0;
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
