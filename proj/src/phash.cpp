#include "vlcot/phash.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "vlcot/error.hpp"

namespace vlcot::dedup {

namespace {

constexpr int kResize = 32;
constexpr int kBlock = 8;

// Orthonormal type-II DCT matrix, row k: c_k * cos(pi/(2N) * k * (2i+1)),
// c_0 = sqrt(1/N), c_k = sqrt(2/N).
const std::array<double, kResize * kResize>& dct_matrix() {
  static const std::array<double, kResize * kResize> m = [] {
    std::array<double, kResize * kResize> out{};
    const double n = kResize;
    for (int i = 0; i < kResize; ++i) out[i] = std::sqrt(1.0 / n);
    const double c = std::sqrt(2.0 / n);
    for (int k = 1; k < kResize; ++k) {
      for (int i = 0; i < kResize; ++i) {
        out[static_cast<std::size_t>(k) * kResize + i] =
            c * std::cos((M_PI / (2.0 * n)) * k * (2.0 * i + 1.0));
      }
    }
    return out;
  }();
  return m;
}

}  // namespace

PerceptualHash phash(const Image& img) {
  if (img.width < 1 || img.height < 1) throw DataError("phash of empty image");
  std::vector<double> gray = to_grayscale(img);
  std::vector<double> small =
      resize_bilinear_gray(gray, img.width, img.height, kResize, kResize);

  // top kBlock rows of M * small * M^T; only an 8x32 intermediate is needed
  const auto& m = dct_matrix();
  std::array<double, kBlock * kResize> tmp{};  // rows of M * small
  for (int k = 0; k < kBlock; ++k) {
    for (int j = 0; j < kResize; ++j) {
      double acc = 0.0;
      for (int i = 0; i < kResize; ++i) {
        acc += m[static_cast<std::size_t>(k) * kResize + i] *
               small[static_cast<std::size_t>(i) * kResize + j];
      }
      tmp[static_cast<std::size_t>(k) * kResize + j] = acc;
    }
  }
  std::array<double, kBlock * kBlock> coeffs{};
  for (int k = 0; k < kBlock; ++k) {
    for (int l = 0; l < kBlock; ++l) {
      double acc = 0.0;
      for (int j = 0; j < kResize; ++j) {
        acc += tmp[static_cast<std::size_t>(k) * kResize + j] *
               m[static_cast<std::size_t>(l) * kResize + j];
      }
      // quantize at 2^-10: keeps the hash independent of summation order
      // and FMA contraction while staying far below pixel-level signal
      coeffs[static_cast<std::size_t>(k) * kBlock + l] = std::round(acc * 1024.0) / 1024.0;
    }
  }

  std::array<double, kBlock * kBlock> sorted = coeffs;
  std::sort(sorted.begin(), sorted.end());
  double median = 0.5 * (sorted[kBlock * kBlock / 2 - 1] + sorted[kBlock * kBlock / 2]);

  PerceptualHash h;
  for (int i = 0; i < kBlock * kBlock; ++i) {
    h.bits <<= 1;
    if (coeffs[static_cast<std::size_t>(i)] > median) h.bits |= 1;
  }
  return h;
}

int hamming(const PerceptualHash& a, const PerceptualHash& b) {
  if (a.algorithm_version != b.algorithm_version) {
    throw DataError("perceptual hash version mismatch: " + a.algorithm_version + " vs " +
                    b.algorithm_version);
  }
  return __builtin_popcountll(a.bits ^ b.bits);
}

}  // namespace vlcot::dedup
