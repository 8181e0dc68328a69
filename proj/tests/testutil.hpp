#pragma once

#include <filesystem>
#include <string>

#include "vlcot/image.hpp"
#include "vlcot/record.hpp"
#include "vlcot/rng.hpp"

namespace vlcot::testutil {

// Unique scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("vlcot-" + tag + "-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
};

inline Image noise_image(int w, int h, std::uint64_t seed) {
  Image img(w, h);
  Rng rng(seed);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.uniform_index(256));
  return img;
}

inline Image gradient_image(int w, int h, int phase = 0) {
  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t* p = img.at(x, y);
      p[0] = static_cast<std::uint8_t>((x * 255 / std::max(1, w - 1) + phase) % 256);
      p[1] = static_cast<std::uint8_t>((y * 255 / std::max(1, h - 1) + phase) % 256);
      p[2] = static_cast<std::uint8_t>((x + y + phase) % 256);
    }
  }
  return img;
}

inline Image checkerboard(int w, int h, int cell, bool invert = false) {
  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool on = ((x / cell) + (y / cell)) % 2 == 0;
      if (invert) on = !on;
      std::uint8_t v = on ? 255 : 0;
      std::uint8_t* p = img.at(x, y);
      p[0] = p[1] = p[2] = v;
    }
  }
  return img;
}

inline CurationRecord make_record(const std::string& id, const std::string& question,
                                  const std::string& ground_truth = "",
                                  const std::string& source = "fixture") {
  CurationRecord r;
  r.id = id;
  r.question = question;
  if (!ground_truth.empty()) r.ground_truth = ground_truth;
  r.source = source;
  return r;
}

inline CurationRecord with_cot(CurationRecord r, const std::string& solution,
                               const std::string& predicted = "",
                               const std::string& caption = "") {
  ChainOfThought cot;
  cot.solution = solution;
  if (!predicted.empty()) cot.predicted = predicted;
  if (!caption.empty()) cot.caption = caption;
  r.cot = std::move(cot);
  return r;
}

}  // namespace vlcot::testutil
