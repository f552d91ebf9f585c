#pragma once

#include <cstdint>
#include <array>

namespace dualbound {

// Counter-based random number generator built on a Philox-4x32-10 block
// function.  A stream is addressed by (seed, stream, path); blocks within a
// stream are addressed by a 64-bit counter.  Draw j of path k is therefore a
// pure function of (seed, stream, k, j), independent of evaluation order or
// the number of worker threads consuming paths.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t path);

  std::uint64_t next_u64();

  // Uniform on the open interval (0,1); never returns an endpoint, so it is
  // safe to feed through inverse CDFs.
  double uniform01();

  // Standard normal via the inverse-CDF transform (one uniform per variate).
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> path_;   // counter words 2..3
  std::uint64_t block_ = 0;             // counter words 0..1
  std::array<std::uint32_t, 4> buf_{};
  int buf_pos_ = 4;                     // exhausted
};

// Inverse of the standard normal CDF (Wichura's PPND16 rational
// approximation, accurate to ~1e-15 over (0,1)).  Exposed for tests and for
// deterministic quantile needs outside the generator.
double inverse_normal_cdf(double p);

// SplitMix64 finalizer; used to derive stream keys and cell seeds.
std::uint64_t mix64(std::uint64_t x);

// Fixed substream ids so the bound pipeline never reuses noise across
// phases: the fitting paths double as lower-bound paths, everything else is
// fresh.
namespace streams {
inline constexpr std::uint64_t kPrimalPaths = 0;   // LB estimation + regression
inline constexpr std::uint64_t kFeasibility = 1;   // penalty feasibility checks
inline constexpr std::uint64_t kUpperBound = 2;    // dual (inner problem) paths
inline constexpr std::uint64_t kScratch = 3;       // tests, ad-hoc draws
}  // namespace streams

}  // namespace dualbound
