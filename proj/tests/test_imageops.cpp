#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "reference.hpp"
#include "testutil.hpp"
#include "vlcot/error.hpp"
#include "vlcot/imageops.hpp"
#include "vlcot/rng.hpp"

using namespace vlcot;
using namespace vlcot::imageops;
using testutil::TempDir;

namespace {

Image rotation_fixture_4x4() {
  Image fx(4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      auto* p = fx.at(x, y);
      p[0] = static_cast<std::uint8_t>(x * 60 + 10);
      p[1] = static_cast<std::uint8_t>(y * 60 + 20);
      p[2] = static_cast<std::uint8_t>((x + y) * 30 + 5);
    }
  }
  return fx;
}

// Golden raster for rotate(fixture, 15): produced once by an independent
// rasterizer (numeric matrix inverse, separate bilinear code) and frozen.
constexpr std::array<std::uint8_t, 75> kGolden15 = {
    255, 255, 255, 255, 255, 255, 185, 121, 147, 200, 61,  122, 255, 255, 255,
    52,  61,  49,  58,  37,  37,  116, 52,  74,  173, 68,  111, 255, 255, 255,
    116, 155, 130, 42,  94,  58,  100, 110, 95,  158, 126, 132, 218, 190, 198,
    255, 255, 255, 27,  152, 79,  84,  168, 116, 142, 183, 153, 201, 209, 197,
    255, 255, 255, 53,  210, 123, 149, 224, 181, 255, 255, 255, 255, 255, 255,
};

}  // namespace

TEST_CASE("rotate: 0 degrees is the identity") {
  Image img = testutil::noise_image(13, 9, 3);
  CHECK(rotate(img, 0) == img);
}

TEST_CASE("rotate: angle must come from the 24-angle list") {
  Image img(4, 4);
  CHECK_THROWS_AS(rotate(img, 17), UsageError);
  CHECK_THROWS_AS(rotate(img, -15), UsageError);
  CHECK_THROWS_AS(rotate(img, 360), UsageError);
  for (int a : kRotationAngles) CHECK_NOTHROW(rotate(img, a));
}

TEST_CASE("rotate: 90 degrees matches the index-permutation oracle") {
  Image img = testutil::noise_image(11, 7, 21);
  Image got = rotate(img, 90);
  CHECK(got.width == img.height);
  CHECK(got.height == img.width);
  CHECK(got == ref::rotate90_loop(img));
}

TEST_CASE("rotate: four quarter turns are the exact identity") {
  Image img = testutil::noise_image(10, 6, 8);
  Image r = rotate(rotate(rotate(rotate(img, 90), 90), 90), 90);
  CHECK(r == img);
  // and the named right angles compose consistently
  CHECK(rotate(img, 180) == rotate(rotate(img, 90), 90));
  CHECK(rotate(img, 270) == rotate(rotate(img, 180), 90));
}

TEST_CASE("rotate: 15 degrees on the 4x4 fixture matches the stored golden raster") {
  Image got = rotate(rotation_fixture_4x4(), 15);
  REQUIRE(got.width == 5);
  REQUIRE(got.height == 5);
  REQUIRE(got.pixels.size() == kGolden15.size());
  for (std::size_t i = 0; i < kGolden15.size(); ++i) {
    CHECK(got.pixels[i] == kGolden15[i]);
  }
}

TEST_CASE("concat_width: equal heights are a plain side-by-side") {
  Image a = testutil::gradient_image(5, 4);
  Image b = testutil::noise_image(3, 4, 2);
  Image out = concat_width(a, b);
  CHECK(out.width == 8);
  CHECK(out.height == 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 5; ++x) CHECK(std::equal(out.at(x, y), out.at(x, y) + 3, a.at(x, y)));
    for (int x = 0; x < 3; ++x)
      CHECK(std::equal(out.at(5 + x, y), out.at(5 + x, y) + 3, b.at(x, y)));
  }
}

TEST_CASE("concat_width: shorter image is padded at the bottom with white") {
  Image tall = testutil::noise_image(4, 6, 5);
  Image shorter = testutil::noise_image(3, 2, 6);
  Image out = concat_width(tall, shorter);
  CHECK(out.width == 7);
  CHECK(out.height == 6);
  // region compare: left = tall, right-top = shorter, right-bottom = white
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 4; ++x)
      CHECK(std::equal(out.at(x, y), out.at(x, y) + 3, tall.at(x, y)));
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 3; ++x)
      CHECK(std::equal(out.at(4 + x, y), out.at(4 + x, y) + 3, shorter.at(x, y)));
  for (int y = 2; y < 6; ++y)
    for (int x = 4; x < 7; ++x)
      for (int c = 0; c < 3; ++c) CHECK(out.at(x, y)[c] == 255);
}

TEST_CASE("concat_width: self-concat halves are equal") {
  Image a = testutil::noise_image(6, 5, 31);
  Image out = concat_width(a, a);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 6; ++x)
      CHECK(std::equal(out.at(x, y), out.at(x, y) + 3, out.at(6 + x, y)));
}

TEST_CASE("mixup: arithmetic and range checks") {
  Image a(2, 2, 100);
  Image b(2, 2, 0);
  Image out = mixup(a, b, 0.8);
  CHECK(out.pixels[0] == 80);
  CHECK_THROWS_AS(mixup(a, b, 0.79), UsageError);
  CHECK_THROWS_AS(mixup(a, b, 1.0), UsageError);
  CHECK_NOTHROW(mixup(a, b, 0.999999));
}

TEST_CASE("mixup: identical images are a fixed point for any alpha") {
  Image a = testutil::noise_image(9, 9, 77);
  for (double alpha : {0.8, 0.85, 0.9, 0.95, 0.9999}) {
    CHECK(mixup(a, a, alpha) == a);
  }
}

TEST_CASE("mixup: 1000 random cases stay within +/-1 of the real-valued blend") {
  Rng rng(2024);
  Image a(1, 1), b(1, 1);
  for (int i = 0; i < 1000; ++i) {
    double p1 = static_cast<double>(rng.uniform_index(256));
    double p2 = static_cast<double>(rng.uniform_index(256));
    double alpha = rng.uniform_double(0.8, 1.0);
    for (int c = 0; c < 3; ++c) {
      a.pixels[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(p1);
      b.pixels[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(p2);
    }
    Image out = mixup(a, b, alpha);
    double want = ref::mixup_reference(p1, p2, alpha);
    CHECK(std::fabs(out.pixels[0] - want) <= 1.0);
  }
}

TEST_CASE("mixup: dominance is preserved at the blend extremes") {
  Image a = testutil::noise_image(16, 16, 41);
  Image b = testutil::noise_image(16, 16, 42);
  for (double alpha : {0.8, 0.9, 0.99}) {
    Image out = mixup(a, b, alpha);
    double mad = 0;
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
      mad += std::fabs(static_cast<double>(out.pixels[i]) - a.pixels[i]);
    }
    mad /= static_cast<double>(out.pixels.size());
    CHECK(mad <= 0.2 * 255.0);
  }
}

TEST_CASE("mixup: distractor is resized to the original's dimensions") {
  Image a = testutil::gradient_image(8, 6);
  Image b = testutil::gradient_image(20, 14, 3);
  Image out = mixup(a, b, 0.9);
  CHECK(out.width == 8);
  CHECK(out.height == 6);
}

namespace {

struct PerturbFixture {
  TempDir td{"perturb"};
  std::vector<std::string> pool;

  PerturbFixture() {
    for (int i = 0; i < 3; ++i) {
      auto p = td.path / ("d" + std::to_string(i) + ".png");
      save_png(testutil::noise_image(1 + i, 1 + i, 500 + i), p);
      pool.push_back(p.string());
    }
  }
};

}  // namespace

TEST_CASE("random_perturb: seeded determinism and spec replay") {
  PerturbFixture fx;
  Image img = testutil::noise_image(6, 6, 9);
  auto [out1, spec1] = random_perturb(img, fx.pool, 31337);
  auto [out2, spec2] = random_perturb(img, fx.pool, 31337);
  CHECK(out1 == out2);
  CHECK(spec1.to_meta_string() == spec2.to_meta_string());
  // replay from the recorded spec reproduces the image bit-for-bit
  CHECK(apply_perturb(img, spec1) == out1);
  // meta round trip preserves every parameter (alpha is hexfloat)
  PerturbSpec round = PerturbSpec::from_meta_string(spec1.to_meta_string());
  CHECK(round.to_meta_string() == spec1.to_meta_string());
}

TEST_CASE("random_perturb: empty pool is an error") {
  Image img(2, 2);
  CHECK_THROWS_AS(random_perturb(img, {}, 1), UsageError);
}

TEST_CASE("random_perturb: kind frequencies over 30K draws are within 2% of 1/3") {
  PerturbFixture fx;
  Image img(1, 1, 128);
  int counts[3] = {0, 0, 0};
  const int draws = 30000;
  for (int i = 0; i < draws; ++i) {
    auto [out, spec] = random_perturb(img, fx.pool, derive_seed(99, "freq", i));
    counts[static_cast<int>(spec.kind)]++;
    if (spec.kind == PerturbKind::rotation) {
      CHECK(is_valid_rotation_angle(*spec.angle_degrees));
    } else if (spec.kind == PerturbKind::mixup) {
      CHECK(*spec.alpha >= 0.8);
      CHECK(*spec.alpha < 1.0);
    }
  }
  for (int k = 0; k < 3; ++k) {
    double freq = static_cast<double>(counts[k]) / draws;
    CHECK(std::fabs(freq - 1.0 / 3.0) < 0.02);
  }
}

TEST_CASE("render_text_rich: fixed seed matches the stored golden checksum") {
  Image base(24, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 24; ++x) {
      auto* p = base.at(x, y);
      p[0] = static_cast<std::uint8_t>(x * 10);
      p[1] = static_cast<std::uint8_t>(y * 12);
      p[2] = 128;
    }
  }
  Image out = render_text_rich(base, "How many squares are visible in the figure?", 424242);
  CHECK(out.width == 328);
  CHECK(out.height == 106);
  std::uint64_t h = fnv1a64(
      std::string_view(reinterpret_cast<const char*>(out.pixels.data()), out.pixels.size()));
  CHECK(h == 13045301696079568902ULL);
}

TEST_CASE("render_text_rich: deterministic, and styles vary with the seed") {
  Image base = testutil::gradient_image(30, 20);
  Image a = render_text_rich(base, "What fraction of the plot is shaded?", 7);
  Image b = render_text_rich(base, "What fraction of the plot is shaded?", 7);
  CHECK(a == b);
  bool any_diff = false;
  for (std::uint64_t s = 0; s < 8 && !any_diff; ++s) {
    Image c = render_text_rich(base, "What fraction of the plot is shaded?", s);
    any_diff = !(c == a);
  }
  CHECK(any_diff);
}

TEST_CASE("render_text_rich: errors on empty and oversized questions") {
  Image base(8, 8);
  CHECK_THROWS_AS(render_text_rich(base, "", 1), DataError);
  CHECK_THROWS_AS(render_text_rich(base, "   \n ", 1), DataError);
  CHECK_THROWS_AS(render_text_rich(base, std::string(10001, 'x'), 1), DataError);
}

TEST_CASE("render_text_rich: every usable text color clears the 3:1 contrast floor") {
  for (const auto& bg : TextRichStyle::background_palette()) {
    int usable = 0;
    for (const auto& fg : TextRichStyle::text_palette()) {
      if (contrast_ratio(fg, bg) >= 3.0) ++usable;
    }
    CHECK(usable > 0);  // a fill color exists for every background
  }
  CHECK(contrast_ratio({0, 0, 0}, {255, 255, 255}) == doctest::Approx(21.0));
  CHECK(contrast_ratio({255, 255, 255}, {0, 0, 0}) == doctest::Approx(21.0));
}
