#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "reference.hpp"
#include "testutil.hpp"
#include "vlcot/answer.hpp"
#include "vlcot/error.hpp"

using namespace vlcot;
using namespace vlcot::verify;

TEST_CASE("extract_boxed: basic forms") {
  CHECK(extract_boxed("steps...\n</think>\n$$\\boxed{B}$$") == "B");
  CHECK(extract_boxed("\\boxed{\\frac{1}{2}}") == "\\frac{1}{2}");
  CHECK(extract_boxed("\\boxed{1} then \\boxed{15}") == "15");  // last box wins
  CHECK(extract_boxed("$\\boxed{x^2}$") == "x^2");
  CHECK(extract_boxed("\\boxed{a{b{c}d}e}") == "a{b{c}d}e");
}

TEST_CASE("extract_boxed: errors") {
  CHECK_THROWS_AS(extract_boxed("no box here"), DataError);
  CHECK_THROWS_AS(extract_boxed("\\boxed{unclosed"), DataError);
  CHECK(!try_extract_boxed("nothing").has_value());
  CHECK(try_extract_boxed("\\boxed{ok}").value() == "ok");
}

TEST_CASE("extract_boxed: escaped braces are not structure") {
  CHECK(extract_boxed("\\boxed{\\{1, 2\\}}") == "\\{1, 2\\}");
}

namespace {

// independent rational oracle for \frac{a}{b} strings
double frac_oracle(const std::string& s) {
  long long a = 0, b = 1;
  REQUIRE(std::sscanf(s.c_str(), "\\frac{%lld}{%lld}", &a, &b) == 2);
  return static_cast<double>(a) / static_cast<double>(b);
}

}  // namespace

TEST_CASE("normalize_answer: kinds and values") {
  auto b = normalize_answer("(B)");
  CHECK(b.kind == CanonicalAnswer::Kind::choice_letter);
  CHECK(b.value == "B");

  auto n = normalize_answer("15.0");
  CHECK(n.kind == CanonicalAnswer::Kind::number);
  CHECK(n.value == "15");
  CHECK(n.numeric->num == 15);
  CHECK(n.numeric->den == 1);

  for (const char* s : {"\\frac{1}{2}", "\\frac{3}{4}", "\\frac{-7}{2}", "\\frac{10}{4}"}) {
    auto f = normalize_answer(s);
    REQUIRE(f.kind == CanonicalAnswer::Kind::number);
    CHECK(f.numeric->to_double() == doctest::Approx(frac_oracle(s)).epsilon(1e-12));
  }

  auto t = normalize_answer("  Two   DOGS  ");
  CHECK(t.kind == CanonicalAnswer::Kind::text);
  CHECK(t.value == "two dogs");

  CHECK(normalize_answer("50%").numeric->num == 50);
  CHECK(normalize_answer("1,234").numeric->num == 1234);
  CHECK(normalize_answer("-3").numeric->num == -3);
  CHECK(normalize_answer("$42$").kind == CanonicalAnswer::Kind::number);
  CHECK(normalize_answer("b").value == "B");
  CHECK(normalize_answer("").kind == CanonicalAnswer::Kind::text);
}

TEST_CASE("answers_equivalent: spec cases") {
  CHECK(answers_equivalent("15", "15.0"));
  CHECK(answers_equivalent("b", "(B)"));
  CHECK(!answers_equivalent("12", "13"));
  CHECK(answers_equivalent("\\frac{1}{2}", "0.5"));
  CHECK(answers_equivalent("0.333333333", "\\frac{1}{3}"));  // 1e-9 relative fallback
  CHECK(!answers_equivalent("0.33", "\\frac{1}{3}"));
  CHECK(!answers_equivalent("B", "8"));  // kind mismatch
  CHECK(answers_equivalent("two dogs", " TWO  dogs "));
}

TEST_CASE("answers_equivalent: reflexive, symmetric, transitive over a generated pool") {
  std::vector<std::string> pool = {
      "A",    "(a)",  "b",         "B",      "15",    "15.0", "15.000", "0.5",
      "\\frac{1}{2}", "\\frac{2}{4}", "50%",  "50",    "1,000", "1000", "-2",  "(-2)",
      "cat",  "Cat ", "two dogs",  "two  dogs", "",   "4+",   "x",     "X",
  };
  std::size_t n = pool.size();
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(answers_equivalent(pool[i], pool[i]));
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(answers_equivalent(pool[i], pool[j]) == answers_equivalent(pool[j], pool[i]));
      for (std::size_t k = 0; k < n; ++k) {
        if (answers_equivalent(pool[i], pool[j]) && answers_equivalent(pool[j], pool[k])) {
          CHECK(answers_equivalent(pool[i], pool[k]));
        }
      }
    }
  }
}

TEST_CASE("majority_vote: spec examples") {
  CHECK(majority_vote({"A", "A", "A", "B"}, 3).value() == "A");
  CHECK(!majority_vote({"A", "A", "B", "B"}, 3).has_value());
  CHECK_THROWS_AS(majority_vote({}, 3), DataError);
  // two classes at the threshold is an error
  CHECK_THROWS_AS(majority_vote({"A", "A", "A", "B", "B", "B"}, 3), DataError);
  // votes group by equivalence, not string equality
  CHECK(majority_vote({"(b)", "B", "b", "C"}, 3).has_value());
}

TEST_CASE("majority_vote: exhaustive 3^4 on {A,B,C} matches the brute-force counter") {
  const char* alphabet[] = {"A", "B", "C"};
  for (int mask = 0; mask < 81; ++mask) {
    int m = mask;
    std::vector<std::string> answers;
    for (int i = 0; i < 4; ++i) {
      answers.push_back(alphabet[m % 3]);
      m /= 3;
    }
    auto got = majority_vote(answers, 3);
    std::string want = ref::majority_count_naive(answers, 3);
    if (want.empty()) {
      CHECK(!got.has_value());
    } else {
      REQUIRE(got.has_value());
      CHECK(answers_equivalent(*got, want));
    }
  }
}

TEST_CASE("majority_vote: threshold > n/2 never errors with ambiguity (n <= 6)") {
  for (int n = 1; n <= 6; ++n) {
    std::size_t combos = 1;
    for (int i = 0; i < n; ++i) combos *= 6;
    for (std::size_t mask = 0; mask < combos; ++mask) {
      std::size_t m = mask;
      std::vector<std::string> answers;
      for (int i = 0; i < n; ++i) {
        answers.push_back(std::string(1, static_cast<char>('A' + m % 6)));
        m /= 6;
      }
      std::size_t t = static_cast<std::size_t>(n) / 2 + 1;
      CHECK_NOTHROW(majority_vote(answers, t));
    }
  }
}

TEST_CASE("plurality_vote: first-occurrence tie-break, always answers") {
  CHECK(plurality_vote({"X", "Y", "Y"}).value() == "Y");
  CHECK(plurality_vote({"X", "Y"}).value() == "X");  // tie: first seen
  CHECK(plurality_vote({"q"}).value() == "q");
  CHECK(!plurality_vote({}).has_value());
}

namespace {

Dataset correctness_fixture() {
  using testutil::make_record;
  using testutil::with_cot;
  Dataset d;
  // hand-labeled: 6 of 10 have predicted equivalent to ground truth
  d.records = {
      with_cot(make_record("f01", "q", "15"), "s", "15.0"),       // match
      with_cot(make_record("f02", "q", "B"), "s", "(b)"),         // match
      with_cot(make_record("f03", "q", "0.5"), "s", "\\frac{1}{2}"),  // match
      with_cot(make_record("f04", "q", "7"), "s", "7"),           // match
      with_cot(make_record("f05", "q", "cat"), "s", " CAT"),      // match
      with_cot(make_record("f06", "q", "100"), "s", "100"),       // match
      with_cot(make_record("f07", "q", "3"), "s", "4"),           // wrong
      with_cot(make_record("f08", "q", "A"), "s", "B"),           // wrong
      with_cot(make_record("f09", "q", "12"), "s", "thirteen"),   // wrong kind
      with_cot(make_record("f10", "q", "9"), "s"),                // no prediction
  };
  return d;
}

}  // namespace

TEST_CASE("correctness_filter: fixture keeps exactly the 6 matching records") {
  Dataset d = correctness_fixture();
  Dataset out = correctness_filter(d);
  CHECK(out.records.size() == 6);
  for (const auto& r : out.records) {
    CHECK(r.meta.at("verified") == "true");
    CHECK(answers_equivalent(*r.cot->predicted, *r.ground_truth));
  }
  auto& e = out.manifest.stages.back();
  CHECK(e.count_in == 10);
  CHECK(e.count_out == 6);
  CHECK(e.parameters.at("dropped_incorrect") == "3");
  CHECK(e.parameters.at("dropped_no_prediction") == "1");
}

TEST_CASE("correctness_filter: all-correct input is identity-sized and idempotent") {
  Dataset d;
  for (int i = 0; i < 5; ++i) {
    d.records.push_back(testutil::with_cot(
        testutil::make_record("a" + std::to_string(i), "q", "5"), "s", "5"));
  }
  Dataset once = correctness_filter(d);
  CHECK(once.records.size() == 5);
  Dataset twice = correctness_filter(once);
  CHECK(twice.records == once.records);
}

TEST_CASE("correctness_filter: keep-unverifiable flag") {
  Dataset d;
  d.records.push_back(testutil::with_cot(testutil::make_record("k1", "q"), "s", "9"));
  d.records.push_back(testutil::with_cot(testutil::make_record("k2", "q", "9"), "s", "9"));
  Dataset dropped = correctness_filter(d);
  CHECK(dropped.records.size() == 1);
  CHECK(dropped.manifest.stages.back().parameters.at("dropped_no_ground_truth") == "1");
  CorrectnessOptions keep;
  keep.keep_unverifiable = true;
  Dataset kept = correctness_filter(d, keep);
  CHECK(kept.records.size() == 2);
  // the unverifiable record passes through untouched (no verified tag)
  CHECK(kept.records[0].meta.count("verified") == 0);
}
