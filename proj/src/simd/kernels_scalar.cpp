#include "jitter/simd/kernels.hpp"
#include "kernel_constant.hpp"

#include <cmath>

namespace jitter::simd::scalar {

namespace {

inline double
gaussian_row(const KernelBlock& b, std::size_t i)
{
  double s = 0.0;
  for (std::size_t k = 0; k < b.num_cols; ++k) {
    const double u = (b.data[b.cols[k] * b.ld + i] - b.point[k]) * b.inv_bw[k];
    s += u * u;
  }
  return std::exp(-0.5 * s);
}

inline double
epanechnikov_row(const KernelBlock& b, std::size_t i)
{
  double w = 1.0;
  for (std::size_t k = 0; k < b.num_cols; ++k) {
    const double u = (b.data[b.cols[k] * b.ld + i] - b.point[k]) * b.inv_bw[k];
    const double t = 1.0 - u * u;
    if (t <= 0.0)
      return 0.0;
    w *= t;
  }
  return w;
}

} // namespace

using detail::kernel_constant;

double
kernel_sum(KernelType kernel, const KernelBlock& block)
{
  double sum = 0.0;
  if (kernel == KernelType::gaussian) {
    for (std::size_t i = 0; i < block.n; ++i)
      sum += gaussian_row(block, i);
  } else {
    for (std::size_t i = 0; i < block.n; ++i)
      sum += epanechnikov_row(block, i);
  }
  return sum * kernel_constant(kernel, block.num_cols);
}

void
kernel_weights(KernelType kernel, const KernelBlock& block, double* out)
{
  const double c = kernel_constant(kernel, block.num_cols);
  if (kernel == KernelType::gaussian) {
    for (std::size_t i = 0; i < block.n; ++i)
      out[i] = c * gaussian_row(block, i);
  } else {
    for (std::size_t i = 0; i < block.n; ++i)
      out[i] = c * epanechnikov_row(block, i);
  }
}

} // namespace jitter::simd::scalar
