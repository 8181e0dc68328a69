#pragma once

#include <cstdint>
#include <string>

#include "vlcot/image.hpp"

namespace vlcot::dedup {

// Frozen algorithm (version "dct-v1"):
//   1. grayscale via BT.601 luma,
//   2. bilinear resize to 32x32,
//   3. 2-D orthonormal type-II DCT,
//   4. top-left 8x8 coefficient block (DC included), each coefficient
//      quantized to the nearest multiple of 2^-10 (structurally-zero
//      coefficients of flat or symmetric images would otherwise sit at
//      float-noise level and make the median comparison build-dependent),
//   5. median of the 64 quantized coefficients (mean of the two middle order
//      statistics), bit = 1 where coefficient > median, row-major,
//      bit 63 = (row 0, col 0).
struct PerceptualHash {
  std::uint64_t bits = 0;
  std::string algorithm_version = "dct-v1";

  bool operator==(const PerceptualHash&) const = default;
};

PerceptualHash phash(const Image& img);

// Popcount of XOR, in [0, 64]. Throws DataError on version mismatch.
int hamming(const PerceptualHash& a, const PerceptualHash& b);

}  // namespace vlcot::dedup
