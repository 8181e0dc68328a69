#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vlcot {

// Owned 8-bit RGB raster. All pixel math in the project runs on this type;
// codecs live behind load_image / save_png.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 3 bytes per pixel (R,G,B)

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 255)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {}

  std::uint8_t* at(int x, int y) {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }

  bool operator==(const Image&) const = default;
};

// Decodes PNG/JPEG/WebP. Throws DataError on missing or undecodable files.
Image load_image(const std::filesystem::path& path);
Image decode_image(const std::vector<std::uint8_t>& bytes);

void save_png(const Image& img, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const Image& img);

// ITU-R BT.601 luma: 0.299 R + 0.587 G + 0.114 B, kept as doubles.
std::vector<double> to_grayscale(const Image& img);

// Bilinear resample with pixel-center alignment: source coordinate of
// destination pixel x is (x + 0.5) * w_src / w_dst - 0.5, clamped to the
// image. Resizing to the identical size reproduces the input exactly.
Image resize_bilinear(const Image& img, int new_w, int new_h);
std::vector<double> resize_bilinear_gray(const std::vector<double>& gray, int w, int h,
                                         int new_w, int new_h);

}  // namespace vlcot
