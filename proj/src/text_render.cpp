// Text-rich rendering on top of OpenCV's built-in Hershey vector fonts; the
// font set ships with the library, so renders are identical across machines.

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "vlcot/error.hpp"
#include "vlcot/imageops.hpp"
#include "vlcot/text.hpp"

namespace vlcot::imageops {

namespace {

constexpr int kMargin = 16;
constexpr int kLineGap = 6;
constexpr int kMinCanvasWidth = 320;
constexpr std::size_t kMaxQuestionChars = 10000;

struct FontStyle {
  int face;
  double scale;
  int thickness;
};

const std::array<FontStyle, 6>& font_set() {
  static const std::array<FontStyle, 6> fonts = {{
      {cv::FONT_HERSHEY_SIMPLEX, 0.55, 1},
      {cv::FONT_HERSHEY_DUPLEX, 0.55, 1},
      {cv::FONT_HERSHEY_COMPLEX, 0.55, 1},
      {cv::FONT_HERSHEY_TRIPLEX, 0.55, 1},
      {cv::FONT_HERSHEY_COMPLEX_SMALL, 0.8, 1},
      {cv::FONT_HERSHEY_SIMPLEX, 0.7, 2},
  }};
  return fonts;
}

int text_width(const std::string& s, const FontStyle& f) {
  int baseline = 0;
  cv::Size sz = cv::getTextSize(s, f.face, f.scale, f.thickness, &baseline);
  return sz.width;
}

int line_height(const FontStyle& f) {
  int baseline = 0;
  cv::Size sz = cv::getTextSize("Ag", f.face, f.scale, f.thickness, &baseline);
  return sz.height + baseline;
}

std::vector<std::string> word_wrap(const std::string& question, const FontStyle& f,
                                   int wrap_width) {
  std::vector<std::string> lines;
  std::string current;
  for (std::string_view w : split_whitespace(question)) {
    std::string word(w);
    // hard-break words wider than the wrap width
    while (text_width(word, f) > wrap_width && word.size() > 1) {
      std::size_t cut = word.size() - 1;
      while (cut > 1 && text_width(word.substr(0, cut), f) > wrap_width) --cut;
      if (!current.empty()) {
        lines.push_back(current);
        current.clear();
      }
      lines.push_back(word.substr(0, cut));
      word = word.substr(cut);
    }
    std::string candidate = current.empty() ? word : current + " " + word;
    if (!current.empty() && text_width(candidate, f) > wrap_width) {
      lines.push_back(current);
      current = word;
    } else {
      current = candidate;
    }
  }
  if (!current.empty()) lines.push_back(current);
  return lines;
}

}  // namespace

const std::array<std::array<std::uint8_t, 3>, 8>& TextRichStyle::background_palette() {
  static const std::array<std::array<std::uint8_t, 3>, 8> p = {{
      {255, 255, 255},  // white
      {245, 241, 222},  // cream
      {221, 235, 247},  // pale blue
      {224, 244, 224},  // pale green
      {250, 224, 228},  // pale pink
      {240, 230, 250},  // lavender
      {255, 243, 205},  // light amber
      {40, 44, 52},     // charcoal
  }};
  return p;
}

const std::array<std::array<std::uint8_t, 3>, 8>& TextRichStyle::text_palette() {
  static const std::array<std::array<std::uint8_t, 3>, 8> p = {{
      {0, 0, 0},        // black
      {33, 37, 41},     // near-black
      {178, 34, 34},    // firebrick
      {0, 80, 157},     // deep blue
      {0, 100, 0},      // dark green
      {102, 51, 153},   // rebecca purple
      {255, 255, 255},  // white
      {255, 213, 79},   // amber
  }};
  return p;
}

Image render_text_rich(const Image& img, const std::string& question,
                       std::uint64_t style_seed) {
  std::string_view trimmed = trim(question);
  if (trimmed.empty()) throw DataError("render_text_rich: question is empty");
  if (question.size() > kMaxQuestionChars)
    throw DataError("render_text_rich: question exceeds 10,000 characters");

  Rng rng(style_seed);
  const auto& bgs = TextRichStyle::background_palette();
  const auto& fgs = TextRichStyle::text_palette();
  const auto bg = bgs[rng.uniform_index(bgs.size())];

  std::vector<std::array<std::uint8_t, 3>> usable;
  for (const auto& fg : fgs) {
    if (contrast_ratio(fg, bg) >= 3.0) usable.push_back(fg);
  }
  const auto fg = usable[rng.uniform_index(usable.size())];
  const FontStyle font = font_set()[rng.uniform_index(font_set().size())];

  const int wrap_width = std::max(img.width, kMinCanvasWidth);
  std::vector<std::string> lines = word_wrap(std::string(trimmed), font, wrap_width);

  int max_line_w = 0;
  for (const auto& l : lines) max_line_w = std::max(max_line_w, text_width(l, font));
  const int lh = line_height(font);
  const int text_block_h =
      static_cast<int>(lines.size()) * lh + static_cast<int>(lines.size() - 1) * kLineGap;

  const int canvas_w = std::max(img.width, max_line_w) + 2 * kMargin;
  const int canvas_h = text_block_h + img.height + 3 * kMargin;

  cv::Mat canvas(canvas_h, canvas_w, CV_8UC3, cv::Scalar(bg[2], bg[1], bg[0]));  // BGR
  int y = kMargin;
  for (const auto& l : lines) {
    int baseline = 0;
    cv::Size sz = cv::getTextSize(l, font.face, font.scale, font.thickness, &baseline);
    cv::putText(canvas, l, cv::Point(kMargin, y + sz.height), font.face, font.scale,
                cv::Scalar(fg[2], fg[1], fg[0]), font.thickness, cv::LINE_8);
    y += lh + kLineGap;
  }

  // original image below the text block
  const int img_y = kMargin + text_block_h + kMargin;
  for (int iy = 0; iy < img.height; ++iy) {
    std::uint8_t* row = canvas.ptr(img_y + iy);
    for (int ix = 0; ix < img.width; ++ix) {
      const std::uint8_t* s = img.at(ix, iy);
      std::uint8_t* d = row + 3 * (kMargin + ix);
      d[0] = s[2];
      d[1] = s[1];
      d[2] = s[0];
    }
  }

  Image out(canvas_w, canvas_h);
  for (int oy = 0; oy < canvas_h; ++oy) {
    const std::uint8_t* row = canvas.ptr(oy);
    for (int ox = 0; ox < canvas_w; ++ox) {
      std::uint8_t* d = out.at(ox, oy);
      d[0] = row[3 * ox + 2];
      d[1] = row[3 * ox + 1];
      d[2] = row[3 * ox + 0];
    }
  }
  return out;
}

}  // namespace vlcot::imageops
