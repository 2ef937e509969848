#pragma once

#include "jitter/simd/kernels.hpp"

namespace jitter::simd::detail {

//! normalizing constant of the d-variate product kernel.
double
kernel_constant(KernelType kernel, std::size_t d);

} // namespace jitter::simd::detail
