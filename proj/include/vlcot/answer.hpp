#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vlcot/record.hpp"

namespace vlcot::verify {

// Exact rational value for number-kind answers. Always reduced, den > 0.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

struct CanonicalAnswer {
  enum class Kind { number, choice_letter, text };
  Kind kind = Kind::text;
  std::string value;                 // normalized form: "15", "1/2", "B", "two dogs"
  std::optional<Rational> numeric;   // present iff kind == number

  bool operator==(const CanonicalAnswer&) const = default;
};

// Contents of the LAST \boxed{...} in `text`, with nested-brace matching
// (\{ and \} do not count as structure). Surrounding $ / $$ are irrelevant to
// the scan. Throws DataError when no boxed expression exists or the braces of
// the last one never balance.
std::string extract_boxed(const std::string& text);

// Same, but returns nullopt instead of throwing on a missing box. Unbalanced
// braces still throw.
std::optional<std::string> try_extract_boxed(const std::string& text);

// Total normalization: trim, strip one layer of wrapping parentheses, strip
// surrounding $, case-fold single letters to choice kind, parse plain
// decimals / "\frac{a}{b}" / values with thousands commas or a trailing %
// into exact rationals, otherwise lowercase whitespace-collapsed text.
CanonicalAnswer normalize_answer(const std::string& raw);

// Equal kinds and equal values; numbers compare exactly as reduced rationals
// with a 1e-9 relative fallback for decimal forms.
bool answers_equivalent(const std::string& a, const std::string& b);
bool answers_equivalent(const CanonicalAnswer& a, const CanonicalAnswer& b);

// Groups by answers_equivalent classes; returns a representative (first seen)
// of the unique class with size >= threshold, or nullopt when none reaches
// it. Throws DataError on empty input or when two classes reach the
// threshold (impossible for threshold > n/2).
std::optional<std::string> majority_vote(const std::vector<std::string>& answers,
                                         std::size_t threshold);

// Plurality with first-occurrence tie-break; always returns an answer for
// non-empty input. This is the test-time-scaling vote, distinct from the
// thresholded proxy vote above.
std::optional<std::string> plurality_vote(const std::vector<std::string>& answers);

struct CorrectnessOptions {
  bool keep_unverifiable = false;  // pass through records lacking ground truth
};

// Keeps exactly the records whose cot->predicted is equivalent to
// ground_truth, tagging them meta["verified"]="true". Records without ground
// truth are dropped (counted separately) unless keep_unverifiable is set.
Dataset correctness_filter(const Dataset& d, const CorrectnessOptions& opts = {},
                           std::uint64_t seed = 0);

}  // namespace vlcot::verify
