#pragma once

// Product-kernel inner loops shared by the density and local linear
// estimators, with a portable scalar reference and AVX2 variants. The
// variant is picked once at startup from the CPU features; set the
// environment variable JITTER_SIMD=scalar to force the reference path.

#include <cstddef>

namespace jitter::simd {

enum class KernelType
{
  gaussian,
  epanechnikov
};

enum class Backend
{
  scalar,
  avx2
};

const char*
to_string(Backend backend);

//! Column-major n x d data block restricted to a subset of columns.
//!
//! Row i, active column k lives at data[cols[k] * ld + i]. `point` and
//! `inv_bw` are indexed by k.
struct KernelBlock
{
  const double* data;
  std::size_t n;
  std::size_t ld;
  const std::size_t* cols;
  std::size_t num_cols;
  const double* point;
  const double* inv_bw;
};

//! sum_i prod_k K((x_ik - point_k) * inv_bw_k), K the univariate kernel.
double
kernel_sum(KernelType kernel, const KernelBlock& block);

//! out[i] = prod_k K((x_ik - point_k) * inv_bw_k).
void
kernel_weights(KernelType kernel, const KernelBlock& block, double* out);

bool
backend_supported(Backend backend);
//! best backend of the running CPU (honoring JITTER_SIMD).
Backend
detect_backend();
Backend
active_backend();
//! Throws InvalidParameter if the backend is not supported here.
void
set_backend(Backend backend);

//! Fixed-backend entry points, used by the equivalence tests.
namespace scalar {
double
kernel_sum(KernelType kernel, const KernelBlock& block);
void
kernel_weights(KernelType kernel, const KernelBlock& block, double* out);
} // namespace scalar

namespace avx2 {
double
kernel_sum(KernelType kernel, const KernelBlock& block);
void
kernel_weights(KernelType kernel, const KernelBlock& block, double* out);
} // namespace avx2

} // namespace jitter::simd
