#include "vlcot/image.hpp"

#include <algorithm>
#include <cmath>

#include "vlcot/error.hpp"

namespace vlcot {

std::vector<double> to_grayscale(const Image& img) {
  std::vector<double> gray(static_cast<std::size_t>(img.width) * img.height);
  const std::uint8_t* p = img.pixels.data();
  for (std::size_t i = 0; i < gray.size(); ++i, p += 3) {
    gray[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  }
  return gray;
}

namespace {

inline double sample_axis(int dst, int dst_size, int src_size) {
  return (dst + 0.5) * static_cast<double>(src_size) / dst_size - 0.5;
}

struct LerpCoord {
  int lo;
  int hi;
  double frac;
};

inline LerpCoord lerp_coord(double s, int size) {
  if (s < 0) s = 0;
  if (s > size - 1) s = size - 1;
  int lo = static_cast<int>(std::floor(s));
  int hi = std::min(lo + 1, size - 1);
  return {lo, hi, s - lo};
}

}  // namespace

Image resize_bilinear(const Image& img, int new_w, int new_h) {
  if (img.width <= 0 || img.height <= 0) throw DataError("resize of empty image");
  if (new_w <= 0 || new_h <= 0) throw DataError("resize to non-positive dimensions");
  if (new_w == img.width && new_h == img.height) return img;
  Image out(new_w, new_h);
  for (int y = 0; y < new_h; ++y) {
    LerpCoord cy = lerp_coord(sample_axis(y, new_h, img.height), img.height);
    for (int x = 0; x < new_w; ++x) {
      LerpCoord cx = lerp_coord(sample_axis(x, new_w, img.width), img.width);
      const std::uint8_t* p00 = img.at(cx.lo, cy.lo);
      const std::uint8_t* p10 = img.at(cx.hi, cy.lo);
      const std::uint8_t* p01 = img.at(cx.lo, cy.hi);
      const std::uint8_t* p11 = img.at(cx.hi, cy.hi);
      std::uint8_t* dst = out.at(x, y);
      for (int c = 0; c < 3; ++c) {
        double top = p00[c] + (p10[c] - p00[c]) * cx.frac;
        double bot = p01[c] + (p11[c] - p01[c]) * cx.frac;
        double v = top + (bot - top) * cy.frac;
        dst[c] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
      }
    }
  }
  return out;
}

std::vector<double> resize_bilinear_gray(const std::vector<double>& gray, int w, int h,
                                         int new_w, int new_h) {
  std::vector<double> out(static_cast<std::size_t>(new_w) * new_h);
  for (int y = 0; y < new_h; ++y) {
    LerpCoord cy = lerp_coord(sample_axis(y, new_h, h), h);
    for (int x = 0; x < new_w; ++x) {
      LerpCoord cx = lerp_coord(sample_axis(x, new_w, w), w);
      double p00 = gray[static_cast<std::size_t>(cy.lo) * w + cx.lo];
      double p10 = gray[static_cast<std::size_t>(cy.lo) * w + cx.hi];
      double p01 = gray[static_cast<std::size_t>(cy.hi) * w + cx.lo];
      double p11 = gray[static_cast<std::size_t>(cy.hi) * w + cx.hi];
      double top = p00 + (p10 - p00) * cx.frac;
      double bot = p01 + (p11 - p01) * cx.frac;
      out[static_cast<std::size_t>(y) * new_w + x] = top + (bot - top) * cy.frac;
    }
  }
  return out;
}

}  // namespace vlcot
