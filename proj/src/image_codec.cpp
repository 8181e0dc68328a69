// All OpenCV usage for decode/encode lives in this TU.

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "vlcot/error.hpp"
#include "vlcot/image.hpp"

namespace vlcot {

namespace {

Image from_mat(const cv::Mat& m, const std::string& what) {
  if (m.empty()) throw DataError("undecodable image: " + what);
  cv::Mat rgb;
  if (m.channels() == 1) {
    cv::cvtColor(m, rgb, cv::COLOR_GRAY2RGB);
  } else if (m.channels() == 3) {
    cv::cvtColor(m, rgb, cv::COLOR_BGR2RGB);
  } else if (m.channels() == 4) {
    cv::cvtColor(m, rgb, cv::COLOR_BGRA2RGB);
  } else {
    throw DataError("unsupported channel count in image: " + what);
  }
  Image img(rgb.cols, rgb.rows);
  for (int y = 0; y < rgb.rows; ++y) {
    std::memcpy(img.at(0, y), rgb.ptr(y), static_cast<std::size_t>(rgb.cols) * 3);
  }
  return img;
}

cv::Mat to_mat(const Image& img) {
  if (img.width <= 0 || img.height <= 0) throw DataError("cannot encode empty image");
  cv::Mat rgb(img.height, img.width, CV_8UC3, const_cast<std::uint8_t*>(img.pixels.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  return bgr;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("image file not found: " + path.string());
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  return from_mat(m, path.string());
}

Image decode_image(const std::vector<std::uint8_t>& bytes) {
  cv::Mat m = cv::imdecode(bytes, cv::IMREAD_UNCHANGED);
  return from_mat(m, "<memory>");
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  std::vector<std::uint8_t> buf;
  if (!cv::imencode(".png", to_mat(img), buf)) throw DataError("PNG encode failed");
  return buf;
}

void save_png(const Image& img, const std::filesystem::path& path) {
  auto bytes = encode_png(img);
  FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw DataError("cannot write image: " + path.string());
  std::size_t n = std::fwrite(bytes.data(), 1, bytes.size(), f);
  std::fclose(f);
  if (n != bytes.size()) throw DataError("short write: " + path.string());
}

}  // namespace vlcot
