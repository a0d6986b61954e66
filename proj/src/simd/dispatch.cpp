#include <atomic>
#include <stdexcept>

#include "vlab/simd.hpp"

namespace vlab::simd {

namespace {

Backend detect() {
#if VLAB_HAVE_AVX2
  if (__builtin_cpu_supports("avx2")) return Backend::avx2;
#endif
  return Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{detect()};
  return b;
}

}  // namespace

bool supported(Backend b) {
  if (b == Backend::scalar) return true;
#if VLAB_HAVE_AVX2
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!supported(b)) throw std::invalid_argument(std::string("backend not available: ") + backend_name(b));
  current().store(b, std::memory_order_relaxed);
}

const char* backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

MinMax minmax(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("minmax of an empty span");
#if VLAB_HAVE_AVX2
  if (active_backend() == Backend::avx2) return detail::minmax_avx2(xs);
#endif
  return detail::minmax_scalar(xs);
}

void promote_greater(std::span<double> best_val, std::span<std::int64_t> best_tag,
                     std::span<const double> cand_val, std::span<const std::int64_t> cand_tag) {
  if (best_tag.size() != best_val.size() || cand_val.size() != best_val.size() ||
      cand_tag.size() != best_val.size())
    throw std::invalid_argument("promote_greater: length mismatch");
#if VLAB_HAVE_AVX2
  if (active_backend() == Backend::avx2) return detail::promote_greater_avx2(best_val, best_tag, cand_val, cand_tag);
#endif
  detail::promote_greater_scalar(best_val, best_tag, cand_val, cand_tag);
}

void dft(std::span<const double> re_in, std::span<const double> im_in,
         std::span<const double> cos_t, std::span<const double> sin_t,
         std::span<double> re_out, std::span<double> im_out) {
  const std::size_t n = re_in.size();
  if (im_in.size() != n || cos_t.size() != n || sin_t.size() != n || re_out.size() != n ||
      im_out.size() != n)
    throw std::invalid_argument("dft: length mismatch");
#if VLAB_HAVE_AVX2
  if (active_backend() == Backend::avx2) return detail::dft_avx2(re_in, im_in, cos_t, sin_t, re_out, im_out);
#endif
  detail::dft_scalar(re_in, im_in, cos_t, sin_t, re_out, im_out);
}

}  // namespace vlab::simd
