#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "reference.hpp"
#include "testutil.hpp"
#include "vlcot/dedup.hpp"
#include "vlcot/error.hpp"

using namespace vlcot;
using namespace vlcot::dedup;
using testutil::TempDir;

TEST_CASE("phash: deterministic for identical pixel content") {
  Image a = testutil::noise_image(40, 30, 123);
  Image b = a;
  CHECK(phash(a) == phash(b));
  CHECK(hamming(phash(a), phash(b)) == 0);
}

TEST_CASE("phash: lossless re-encode keeps distance 0") {
  TempDir td("dedup");
  Image a = testutil::gradient_image(37, 23);
  auto p = td.path / "a.png";
  save_png(a, p);
  Image reloaded = load_image(p);
  CHECK(reloaded == a);  // PNG round-trip is pixel-exact
  CHECK(hamming(phash(a), phash(reloaded)) == 0);
}

TEST_CASE("phash: checkerboard vs inverse differ; both match the independent DCT oracle") {
  Image board = testutil::checkerboard(16, 16, 4, false);
  Image inverse = testutil::checkerboard(16, 16, 4, true);
  PerceptualHash hb = phash(board);
  PerceptualHash hi = phash(inverse);
  CHECK(hb.bits == ref::phash_reference(board));
  CHECK(hi.bits == ref::phash_reference(inverse));
  CHECK(hb.bits != hi.bits);
}

TEST_CASE("phash: agrees with the step-by-step oracle on varied rasters") {
  std::vector<Image> images = {
      testutil::noise_image(64, 64, 1),  testutil::noise_image(33, 71, 2),
      testutil::gradient_image(128, 32), testutil::gradient_image(7, 90),
      testutil::checkerboard(20, 20, 3), Image(1, 1, 200),
      Image(3, 2, 0),
  };
  for (const auto& img : images) {
    CHECK(phash(img).bits == ref::phash_reference(img));
  }
}

TEST_CASE("phash: empty image is an error") {
  Image empty;
  CHECK_THROWS_AS(phash(empty), DataError);
}

TEST_CASE("hamming: identities and the bit-loop oracle") {
  PerceptualHash h = phash(testutil::noise_image(16, 16, 5));
  PerceptualHash inv = h;
  inv.bits = ~inv.bits;
  CHECK(hamming(h, h) == 0);
  CHECK(hamming(h, inv) == 64);

  Rng rng(77);
  for (int i = 0; i < 500; ++i) {
    PerceptualHash a, b;
    a.bits = rng.next_u64();
    b.bits = rng.next_u64();
    CHECK(hamming(a, b) == ref::hamming_loop(a.bits, b.bits));
  }
}

TEST_CASE("hamming: version mismatch is an error") {
  PerceptualHash a, b;
  b.algorithm_version = "dct-v2";
  CHECK_THROWS_AS(hamming(a, b), DataError);
}

namespace {

struct DecontFixture {
  TempDir td{"decont"};
  Dataset d;
  std::vector<std::filesystem::path> eval;

  DecontFixture() {
    // 20 training images, 5 of which are pixel-identical to eval images
    std::filesystem::create_directories(td.path / "train");
    std::filesystem::create_directories(td.path / "eval");
    for (int i = 0; i < 20; ++i) {
      Image img = testutil::noise_image(24, 24, 1000 + i);
      auto p = td.path / "train" / ("t" + std::to_string(i) + ".png");
      save_png(img, p);
      CurationRecord r = testutil::make_record("rec" + std::to_string(i / 10) +
                                                   std::to_string(i % 10),
                                               "q" + std::to_string(i));
      r.image_ref = p.string();
      d.records.push_back(std::move(r));
      if (i % 4 == 0) {  // plant 5 duplicates: i = 0, 4, 8, 12, 16
        auto e = td.path / "eval" / ("e" + std::to_string(i) + ".png");
        save_png(img, e);
        eval.push_back(e);
      }
    }
  }
};

}  // namespace

TEST_CASE("decontaminate: planted duplicates are removed exactly") {
  DecontFixture fx;
  DecontaminationReport rep;
  Dataset out = decontaminate(fx.d, fx.eval, {}, &rep);
  CHECK(out.records.size() == 15);
  CHECK(rep.removed_ids ==
        std::vector<std::string>{"rec00", "rec04", "rec08", "rec12", "rec16"});
  CHECK(rep.matches.size() == 5);
  CHECK(rep.undecodable_ids.empty());
  CHECK(out.manifest.stages.back().parameters.at("removed") == "5");

  SUBCASE("idempotent on rerun") {
    Dataset again = decontaminate(out, fx.eval);
    CHECK(again.records == out.records);
  }

  SUBCASE("order-independent") {
    Dataset reversed = fx.d;
    std::reverse(reversed.records.begin(), reversed.records.end());
    Dataset out2 = decontaminate(reversed, fx.eval);
    CHECK(out2.records == out.records);
  }

  SUBCASE("count accounting matches the naive double-loop oracle") {
    auto survivors = ref::decontaminate_naive(fx.d, fx.eval, {});
    std::vector<std::string> got;
    for (const auto& r : out.records) got.push_back(r.id);
    CHECK(got == survivors);
  }
}

TEST_CASE("decontaminate: disjoint image sets are identity") {
  DecontFixture fx;
  Image unrelated = testutil::gradient_image(31, 17);
  auto e = fx.td.path / "eval" / "unrelated.png";
  save_png(unrelated, e);
  Dataset out = decontaminate(fx.d, {e});
  CHECK(out.records.size() == fx.d.records.size());
}

TEST_CASE("decontaminate: text-only records pass through untouched") {
  DecontFixture fx;
  CurationRecord text = testutil::make_record("text1", "text question");
  fx.d.records.push_back(text);
  sort_and_check_ids(fx.d);
  Dataset out = decontaminate(fx.d, fx.eval);
  bool found = false;
  for (const auto& r : out.records) found |= r.id == "text1";
  CHECK(found);
}

TEST_CASE("decontaminate: undecodable training images are removed into their own category") {
  DecontFixture fx;
  auto bogus = fx.td.path / "train" / "broken.png";
  {
    std::ofstream out(bogus, std::ios::binary);
    out << "this is not a png";
  }
  CurationRecord r = testutil::make_record("broken", "q");
  r.image_ref = bogus.string();
  fx.d.records.push_back(r);
  sort_and_check_ids(fx.d);
  DecontaminationReport rep;
  Dataset out = decontaminate(fx.d, fx.eval, {}, &rep);
  CHECK(rep.undecodable_ids == std::vector<std::string>{"broken"});
  for (const auto& rec : out.records) CHECK(rec.id != "broken");
}

TEST_CASE("decontaminate: report serializes to JSON") {
  DecontFixture fx;
  DecontaminationReport rep;
  decontaminate(fx.d, fx.eval, {}, &rep);
  std::string json = rep.to_json();
  CHECK(json.find("rec00") != std::string::npos);
  CHECK(json.find("removed_ids") != std::string::npos);
  CHECK(json.find("matches") != std::string::npos);
}

TEST_CASE("decontaminate: --max-distance widens the match") {
  TempDir td("neardup");
  Image a = testutil::noise_image(32, 32, 9);
  Image b = a;
  b.at(0, 0)[0] ^= 0xFF;  // tiny change: nearby but (likely) not identical hash
  auto pa = td.path / "a.png";
  auto pe = td.path / "e.png";
  save_png(a, pa);
  save_png(b, pe);
  Dataset d;
  CurationRecord r = testutil::make_record("near", "q");
  r.image_ref = pa.string();
  d.records.push_back(r);
  int dist = hamming(phash(a), phash(b));
  DecontaminateOptions wide;
  wide.max_distance = 64;  // everything matches at the widest setting
  Dataset removed = decontaminate(d, {pe}, wide);
  CHECK(removed.records.empty());
  DecontaminateOptions exact;
  Dataset kept = decontaminate(d, {pe}, exact);
  CHECK(kept.records.size() == (dist == 0 ? 0 : 1));
}
