#pragma once

#include <cstdint>
#include <random>

namespace jitter {

//! splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t
mix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

//! Seed of the stream `stream` below the master seed `seed`.
constexpr std::uint64_t
derive_seed(std::uint64_t seed, std::uint64_t stream)
{
  return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

//! Reproducible random stream.
//!
//! Streams are addressed by (master seed, stream index); distinct indices
//! give statistically independent sequences. All conversions to real
//! numbers are done here rather than through `<random>` distributions, whose
//! output is implementation defined, so draws are bit-identical across
//! standard libraries.
class RandomStream
{
public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
    : engine_(derive_seed(seed, stream))
  {}

  std::uint64_t next_u64() { return engine_(); }

  //! uniform on the open interval (0, 1).
  double uniform_open()
  {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  //! standard normal via Box-Muller (one draw per call, pair not cached).
  double normal();

private:
  std::mt19937_64 engine_;
};

} // namespace jitter
