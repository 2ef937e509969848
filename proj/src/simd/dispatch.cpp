#include "jitter/errors.hpp"
#include "jitter/simd/kernels.hpp"
#include "kernel_constant.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string_view>

namespace jitter::simd {

namespace detail {

double
kernel_constant(KernelType kernel, std::size_t d)
{
  if (kernel == KernelType::gaussian)
    return std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(d));
  return std::pow(0.75, static_cast<double>(d));
}

} // namespace detail

#ifndef JITTER_HAVE_AVX2
namespace avx2 {
double
kernel_sum(KernelType, const KernelBlock&)
{
  throw InvalidParameter("AVX2 kernels were not compiled in");
}
void
kernel_weights(KernelType, const KernelBlock&, double*)
{
  throw InvalidParameter("AVX2 kernels were not compiled in");
}
} // namespace avx2
#endif

namespace {

bool
cpu_has_avx2()
{
#if defined(JITTER_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__)) && \
  (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Backend>&
current()
{
  static std::atomic<Backend> backend{ detect_backend() };
  return backend;
}

} // namespace

const char*
to_string(Backend backend)
{
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

bool
backend_supported(Backend backend)
{
  return backend == Backend::scalar || cpu_has_avx2();
}

Backend
detect_backend()
{
  if (const char* env = std::getenv("JITTER_SIMD")) {
    if (std::string_view(env) == "scalar")
      return Backend::scalar;
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

Backend
active_backend()
{
  return current().load(std::memory_order_relaxed);
}

void
set_backend(Backend backend)
{
  if (!backend_supported(backend))
    throw InvalidParameter(std::string("SIMD backend not supported: ") +
                           to_string(backend));
  current().store(backend, std::memory_order_relaxed);
}

double
kernel_sum(KernelType kernel, const KernelBlock& block)
{
  if (active_backend() == Backend::avx2)
    return avx2::kernel_sum(kernel, block);
  return scalar::kernel_sum(kernel, block);
}

void
kernel_weights(KernelType kernel, const KernelBlock& block, double* out)
{
  if (active_backend() == Backend::avx2)
    avx2::kernel_weights(kernel, block, out);
  else
    scalar::kernel_weights(kernel, block, out);
}

} // namespace jitter::simd
