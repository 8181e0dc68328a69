#include "reference.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

namespace vlcot::ref {

namespace {

double gray_at(const Image& img, int x, int y) {
  const std::uint8_t* p = img.at(x, y);
  return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
}

double bilinear_gray(const Image& img, double sx, double sy) {
  if (sx < 0) sx = 0;
  if (sy < 0) sy = 0;
  if (sx > img.width - 1) sx = img.width - 1;
  if (sy > img.height - 1) sy = img.height - 1;
  int x0 = static_cast<int>(std::floor(sx));
  int y0 = static_cast<int>(std::floor(sy));
  int x1 = std::min(x0 + 1, img.width - 1);
  int y1 = std::min(y0 + 1, img.height - 1);
  double fx = sx - x0, fy = sy - y0;
  double top = gray_at(img, x0, y0) * (1 - fx) + gray_at(img, x1, y0) * fx;
  double bot = gray_at(img, x0, y1) * (1 - fx) + gray_at(img, x1, y1) * fx;
  return top * (1 - fy) + bot * fy;
}

}  // namespace

std::uint64_t phash_reference(const Image& img) {
  constexpr int N = 32;
  // resize to 32x32 with pixel-center alignment
  double small[N][N];
  for (int y = 0; y < N; ++y) {
    for (int x = 0; x < N; ++x) {
      double sx = (x + 0.5) * img.width / static_cast<double>(N) - 0.5;
      double sy = (y + 0.5) * img.height / static_cast<double>(N) - 0.5;
      small[y][x] = bilinear_gray(img, sx, sy);
    }
  }
  // direct orthonormal DCT-II, one double loop per coefficient
  double coeffs[8][8];
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int y = 0; y < N; ++y) {
        for (int x = 0; x < N; ++x) {
          acc += small[y][x] * std::cos(M_PI * u * (2.0 * y + 1.0) / (2.0 * N)) *
                 std::cos(M_PI * v * (2.0 * x + 1.0) / (2.0 * N));
        }
      }
      double cu = u == 0 ? std::sqrt(1.0 / N) : std::sqrt(2.0 / N);
      double cv = v == 0 ? std::sqrt(1.0 / N) : std::sqrt(2.0 / N);
      // quantization at 2^-10 is part of the frozen algorithm
      coeffs[u][v] = std::round(cu * cv * acc * 1024.0) / 1024.0;
    }
  }
  double flat[64];
  for (int i = 0; i < 64; ++i) flat[i] = coeffs[i / 8][i % 8];
  double sorted[64];
  std::copy(flat, flat + 64, sorted);
  std::sort(sorted, sorted + 64);
  double median = 0.5 * (sorted[31] + sorted[32]);
  std::uint64_t bits = 0;
  for (int i = 0; i < 64; ++i) {
    bits <<= 1;
    if (flat[i] > median) bits |= 1;
  }
  return bits;
}

int hamming_loop(std::uint64_t a, std::uint64_t b) {
  int n = 0;
  for (int i = 0; i < 64; ++i) {
    if (((a >> i) & 1) != ((b >> i) & 1)) ++n;
  }
  return n;
}

double mixup_reference(double p1, double p2, double alpha) {
  return alpha * p1 + (1.0 - alpha) * p2;
}

Image rotate90_loop(const Image& img) {
  Image out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::uint8_t* s = img.at(x, y);
      std::uint8_t* d = out.at(y, img.width - 1 - x);
      d[0] = s[0];
      d[1] = s[1];
      d[2] = s[2];
    }
  }
  return out;
}

std::vector<std::string> decontaminate_naive(const Dataset& d,
                                             const std::vector<std::filesystem::path>& eval_images,
                                             const std::filesystem::path& image_root) {
  std::vector<std::uint64_t> eval_hashes;
  for (const auto& p : eval_images) eval_hashes.push_back(phash_reference(load_image(p)));

  std::vector<std::string> survivors;
  for (const auto& r : d.records) {
    if (!r.image_ref) {
      survivors.push_back(r.id);
      continue;
    }
    std::filesystem::path p(*r.image_ref);
    if (p.is_relative() && !image_root.empty()) p = image_root / p;
    std::uint64_t h;
    try {
      h = phash_reference(load_image(p));
    } catch (const std::exception&) {
      continue;  // undecodable: removed
    }
    bool hit = false;
    for (std::uint64_t e : eval_hashes) {
      if (hamming_loop(h, e) == 0) {
        hit = true;
        break;
      }
    }
    if (!hit) survivors.push_back(r.id);
  }
  std::sort(survivors.begin(), survivors.end());
  return survivors;
}

std::vector<std::string> length_filter_ids(
    const std::vector<std::pair<std::string, std::size_t>>& id_lengths) {
  auto sorted = id_lengths;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::size_t keep = (sorted.size() + 1) / 2;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < keep; ++i) ids.push_back(sorted[i].first);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string majority_count_naive(const std::vector<std::string>& answers,
                                 std::size_t threshold) {
  std::map<std::string, std::size_t> counts;
  for (const auto& a : answers) ++counts[a];
  std::string winner;
  for (const auto& [a, n] : counts) {
    if (n >= threshold) {
      if (!winner.empty()) return "";  // ambiguous treated as no result by callers
      winner = a;
    }
  }
  return winner;
}

std::size_t keyword_containment_serial(const std::vector<std::string>& texts,
                                       const std::string& keyword) {
  auto lower = [](std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  auto word_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  };
  std::string needle = lower(keyword);
  std::size_t n = 0;
  for (const auto& t : texts) {
    std::string hay = lower(t);
    bool found = false;
    for (std::size_t pos = 0; !found && pos + needle.size() <= hay.size(); ++pos) {
      if (hay.compare(pos, needle.size(), needle) != 0) continue;
      bool left = pos == 0 || !word_char(hay[pos - 1]);
      bool right = pos + needle.size() >= hay.size() || !word_char(hay[pos + needle.size()]);
      if (left && right) found = true;
    }
    if (found) ++n;
  }
  return n;
}

}  // namespace vlcot::ref
