// AVX2/FMA variants of the product-kernel loops. This translation unit is
// compiled with -mavx2 -mfma and only reached after a runtime CPU check, so
// it must not instantiate inline library code that other TUs could share.

#include "jitter/simd/kernels.hpp"
#include "kernel_constant.hpp"

#include <immintrin.h>

namespace jitter::simd::avx2 {

namespace {

// exp for 4 doubles (Cephes rational approximation, ~1 ulp on the reduced
// range). Results below the normal range flush to zero.
inline __m256d
exp_pd(__m256d x)
{
  const __m256d lo = _mm256_set1_pd(-708.39);
  const __m256d hi = _mm256_set1_pd(709.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_max_pd(_mm256_min_pd(x, hi), lo);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d c1 = _mm256_set1_pd(6.93145751953125E-1);
  const __m256d c2 = _mm256_set1_pd(1.42860682030941723212E-6);
  __m256d fx = _mm256_floor_pd(_mm256_fmadd_pd(x, log2e, _mm256_set1_pd(0.5)));
  x = _mm256_fnmadd_pd(fx, c1, x);
  x = _mm256_fnmadd_pd(fx, c2, x);

  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d p = _mm256_set1_pd(1.26177193074810590878E-4);
  p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(3.02994407707441961300E-2));
  p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(9.99999999999999999910E-1));
  p = _mm256_mul_pd(p, x);
  __m256d q = _mm256_set1_pd(3.00198505138664455042E-6);
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.52448340349684104192E-3));
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.27265548208155028766E-1));
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.00000000000000000009E0));
  __m256d r = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  r = _mm256_fmadd_pd(_mm256_set1_pd(2.0), r, _mm256_set1_pd(1.0));

  // scale by 2^fx through the exponent field
  __m256i n = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(fx));
  n = _mm256_slli_epi64(_mm256_add_epi64(n, _mm256_set1_epi64x(1023)), 52);
  r = _mm256_mul_pd(r, _mm256_castsi256_pd(n));
  return _mm256_andnot_pd(underflow, r);
}

inline __m256i
tail_mask(std::size_t remaining)
{
  const __m256i lanes = _mm256_set_epi64x(3, 2, 1, 0);
  return _mm256_cmpgt_epi64(
    _mm256_set1_epi64x(static_cast<long long>(remaining)), lanes);
}

// unnormalized kernel values of rows i..i+3; lanes past `mask` are zero
template<KernelType kernel>
inline __m256d
rows4(const KernelBlock& b, std::size_t i, __m256i mask, bool full)
{
  if constexpr (kernel == KernelType::gaussian) {
    __m256d s = _mm256_setzero_pd();
    for (std::size_t k = 0; k < b.num_cols; ++k) {
      const double* col = b.data + b.cols[k] * b.ld + i;
      const __m256d x =
        full ? _mm256_loadu_pd(col) : _mm256_maskload_pd(col, mask);
      const __m256d u = _mm256_mul_pd(_mm256_sub_pd(x, _mm256_set1_pd(b.point[k])),
                                      _mm256_set1_pd(b.inv_bw[k]));
      s = _mm256_fmadd_pd(u, u, s);
    }
    const __m256d w = exp_pd(_mm256_mul_pd(_mm256_set1_pd(-0.5), s));
    return full ? w : _mm256_and_pd(w, _mm256_castsi256_pd(mask));
  } else {
    __m256d w = full ? _mm256_set1_pd(1.0)
                     : _mm256_and_pd(_mm256_set1_pd(1.0),
                                     _mm256_castsi256_pd(mask));
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    for (std::size_t k = 0; k < b.num_cols; ++k) {
      const double* col = b.data + b.cols[k] * b.ld + i;
      const __m256d x =
        full ? _mm256_loadu_pd(col) : _mm256_maskload_pd(col, mask);
      const __m256d u = _mm256_mul_pd(_mm256_sub_pd(x, _mm256_set1_pd(b.point[k])),
                                      _mm256_set1_pd(b.inv_bw[k]));
      const __m256d t = _mm256_fnmadd_pd(u, u, one);
      w = _mm256_mul_pd(w, _mm256_max_pd(t, zero));
    }
    return w;
  }
}

inline double
hsum(__m256d v)
{
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

template<KernelType kernel>
double
sum_impl(const KernelBlock& b)
{
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  const __m256i all = _mm256_set1_epi64x(-1);
  std::size_t i = 0;
  for (; i + 8 <= b.n; i += 8) {
    acc0 = _mm256_add_pd(acc0, rows4<kernel>(b, i, all, true));
    acc1 = _mm256_add_pd(acc1, rows4<kernel>(b, i + 4, all, true));
  }
  for (; i + 4 <= b.n; i += 4)
    acc0 = _mm256_add_pd(acc0, rows4<kernel>(b, i, all, true));
  if (i < b.n)
    acc1 = _mm256_add_pd(acc1, rows4<kernel>(b, i, tail_mask(b.n - i), false));
  return hsum(_mm256_add_pd(acc0, acc1));
}

template<KernelType kernel>
void
weights_impl(const KernelBlock& b, double c, double* out)
{
  const __m256i all = _mm256_set1_epi64x(-1);
  const __m256d cv = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= b.n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_mul_pd(cv, rows4<kernel>(b, i, all, true)));
  if (i < b.n) {
    const __m256i mask = tail_mask(b.n - i);
    _mm256_maskstore_pd(
      out + i, mask, _mm256_mul_pd(cv, rows4<kernel>(b, i, mask, false)));
  }
}

} // namespace

double
kernel_sum(KernelType kernel, const KernelBlock& block)
{
  const double c = detail::kernel_constant(kernel, block.num_cols);
  if (kernel == KernelType::gaussian)
    return c * sum_impl<KernelType::gaussian>(block);
  return c * sum_impl<KernelType::epanechnikov>(block);
}

void
kernel_weights(KernelType kernel, const KernelBlock& block, double* out)
{
  const double c = detail::kernel_constant(kernel, block.num_cols);
  if (kernel == KernelType::gaussian)
    weights_impl<KernelType::gaussian>(block, c, out);
  else
    weights_impl<KernelType::epanechnikov>(block, c, out);
}

} // namespace jitter::simd::avx2
