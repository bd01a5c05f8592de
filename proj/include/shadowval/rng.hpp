#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace shadowval {

// Counter-based generator (Philox4x32-10). Every stochastic routine takes an
// RngStream keyed by (seed, stream label, item index), so parallel loops can
// derive independent deterministic streams per item: the output never depends
// on scheduling.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform in [0,1), 53-bit mantissa.
  double uniform();
  // Uniform integer in [0, n), n >= 1. Rejection sampling, unbiased.
  std::uint64_t below(std::uint64_t n);
  // Index into a cumulative weight table (strictly increasing, last = total).
  std::size_t pick_cumulative(const std::vector<double>& cum);

 private:
  void refill();
  std::uint32_t key_[2];
  std::uint32_t ctr_[4];
  std::uint32_t buf_[4];
  int pos_;
};

// Stable 64-bit label hash (FNV-1a) for naming streams.
std::uint64_t stream_label(std::string_view name);

}  // namespace shadowval
