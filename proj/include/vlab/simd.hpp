#pragma once

#include <cstdint>
#include <span>

// Hot kernels with a portable scalar reference and an AVX2 variant chosen at
// run time. Every kernel returns bit-identical results on both backends: the
// vector code performs the same floating-point operations in the same order
// per output element, and the build disables FMA contraction.
namespace vlab::simd {

enum class Backend { scalar, avx2 };

bool supported(Backend b);
Backend active_backend();
// Throws std::invalid_argument when the backend is not available here.
void set_backend(Backend b);
const char* backend_name(Backend b);

struct MinMax {
  double min;
  double max;
};
// Exact min and max of a non-empty span.
MinMax minmax(std::span<const double> xs);

// For each i with cand_val[i] > best_val[i] (strictly), copies the candidate
// value and tag. Ties keep the incumbent, which is how the maximal operator
// prefers smaller windows merged earlier.
void promote_greater(std::span<double> best_val, std::span<std::int64_t> best_tag,
                     std::span<const double> cand_val, std::span<const std::int64_t> cand_tag);

// Naive DFT out_k = sum_j in_j * exp(-2 pi i j k / n), unnormalized. `cos_t`
// and `sin_t` hold cos/sin(2 pi m / n) for m in [0, n).
void dft(std::span<const double> re_in, std::span<const double> im_in,
         std::span<const double> cos_t, std::span<const double> sin_t,
         std::span<double> re_out, std::span<double> im_out);

namespace detail {
MinMax minmax_scalar(std::span<const double> xs);
void promote_greater_scalar(std::span<double>, std::span<std::int64_t>, std::span<const double>,
                            std::span<const std::int64_t>);
void dft_scalar(std::span<const double>, std::span<const double>, std::span<const double>,
                std::span<const double>, std::span<double>, std::span<double>);
#if VLAB_HAVE_AVX2
MinMax minmax_avx2(std::span<const double> xs);
void promote_greater_avx2(std::span<double>, std::span<std::int64_t>, std::span<const double>,
                          std::span<const std::int64_t>);
void dft_avx2(std::span<const double>, std::span<const double>, std::span<const double>,
              std::span<const double>, std::span<double>, std::span<double>);
#endif
}  // namespace detail

}  // namespace vlab::simd
