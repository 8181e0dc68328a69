#include "vlcot/answer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "vlcot/error.hpp"
#include "vlcot/text.hpp"

namespace vlcot::verify {

namespace {

// Position of the last "\boxed{" whose backslash is not itself escaped.
std::size_t find_last_boxed(const std::string& text) {
  const std::string needle = "\\boxed{";
  std::size_t best = std::string::npos;
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    best = pos;
    pos += 1;
  }
  return best;
}

}  // namespace

std::optional<std::string> try_extract_boxed(const std::string& text) {
  std::size_t start = find_last_boxed(text);
  if (start == std::string::npos) return std::nullopt;
  std::size_t i = start + 7;  // past "\boxed{"
  int depth = 1;
  std::string out;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\\' && i + 1 < text.size() && (text[i + 1] == '{' || text[i + 1] == '}')) {
      out.push_back(c);
      out.push_back(text[i + 1]);
      i += 2;
      continue;
    }
    if (c == '{') {
      ++depth;
    } else if (c == '}') {
      --depth;
      if (depth == 0) return out;
    }
    out.push_back(c);
    ++i;
  }
  throw DataError("unbalanced braces in boxed expression");
}

std::string extract_boxed(const std::string& text) {
  auto r = try_extract_boxed(text);
  if (!r) throw DataError("no \\boxed{...} expression found");
  return *r;
}

namespace {

std::int64_t igcd(std::int64_t a, std::int64_t b) {
  a = std::llabs(a);
  b = std::llabs(b);
  while (b != 0) {
    std::int64_t t = a % b;
    a = b;
    b = t;
  }
  return a == 0 ? 1 : a;
}

Rational reduce(std::int64_t num, std::int64_t den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = igcd(num, den);
  return Rational{num / g, den / g};
}

// Parses [+-]?digits(with , separators)[.digits][%]. Fails (nullopt) on
// anything else or on overflow.
std::optional<Rational> parse_decimal(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::size_t i = 0;
  bool neg = false;
  if (s[i] == '+' || s[i] == '-') {
    neg = s[i] == '-';
    ++i;
  }
  if (i < s.size() && s.back() == '%') s.remove_suffix(1);
  if (i >= s.size()) return std::nullopt;

  std::int64_t num = 0;
  std::int64_t den = 1;
  bool any_digit = false;
  bool seen_point = false;
  bool last_was_digit = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c >= '0' && c <= '9') {
      if (num > (INT64_MAX - 9) / 10) return std::nullopt;  // overflow, give up
      num = num * 10 + (c - '0');
      any_digit = true;
      last_was_digit = true;
      if (seen_point) {
        if (den > INT64_MAX / 10) return std::nullopt;
        den *= 10;
      }
    } else if (c == ',' && !seen_point && last_was_digit) {
      last_was_digit = false;  // thousands separator, digits must follow
    } else if (c == '.' && !seen_point) {
      seen_point = true;
      last_was_digit = false;
    } else {
      return std::nullopt;
    }
  }
  if (!any_digit) return std::nullopt;
  return reduce(neg ? -num : num, den);
}

// \frac{a}{b} or \dfrac{a}{b} with integer a, b; optional leading sign.
std::optional<Rational> parse_latex_fraction(std::string_view s) {
  bool neg = false;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  for (std::string_view prefix : {"\\frac", "\\dfrac", "\\tfrac"}) {
    if (starts_with(s, prefix)) {
      s.remove_prefix(prefix.size());
      break;
    }
  }
  if (s.empty() || s[0] != '{') return std::nullopt;
  auto read_group = [&s]() -> std::optional<std::string_view> {
    if (s.empty() || s[0] != '{') return std::nullopt;
    std::size_t close = s.find('}');
    if (close == std::string_view::npos) return std::nullopt;
    std::string_view inner = s.substr(1, close - 1);
    s.remove_prefix(close + 1);
    return inner;
  };
  auto a = read_group();
  if (!a) return std::nullopt;
  auto b = read_group();
  if (!b || !s.empty()) return std::nullopt;
  auto pa = parse_decimal(*a);
  auto pb = parse_decimal(*b);
  if (!pa || !pb || pb->num == 0) return std::nullopt;
  // (pa.num/pa.den) / (pb.num/pb.den)
  using w = __int128;
  w num = static_cast<w>(pa->num) * pb->den;
  w den = static_cast<w>(pa->den) * pb->num;
  if (num > INT64_MAX || num < INT64_MIN || den > INT64_MAX || den < INT64_MIN)
    return std::nullopt;
  Rational r = reduce(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
  if (neg) r.num = -r.num;
  return r;
}

std::string rational_to_string(const Rational& r) {
  if (r.den == 1) return std::to_string(r.num);
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

std::string_view strip_dollars(std::string_view s) {
  while (s.size() >= 2 && s.front() == '$' && s.back() == '$') {
    s.remove_prefix(1);
    s.remove_suffix(1);
    s = trim(s);
  }
  return s;
}

}  // namespace

CanonicalAnswer normalize_answer(const std::string& raw) {
  std::string_view s = trim(raw);
  s = strip_dollars(s);
  // one layer of wrapping parentheses
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
    std::string_view inner = trim(s.substr(1, s.size() - 2));
    // only strip when the parens actually wrap the whole value
    if (inner.find('(') == std::string_view::npos &&
        inner.find(')') == std::string_view::npos) {
      s = inner;
    }
  }

  CanonicalAnswer a;
  if (s.size() == 1 && std::isalpha(static_cast<unsigned char>(s[0]))) {
    a.kind = CanonicalAnswer::Kind::choice_letter;
    a.value = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(s[0]))));
    return a;
  }

  if (auto r = parse_decimal(s)) {
    a.kind = CanonicalAnswer::Kind::number;
    a.numeric = *r;
    a.value = rational_to_string(*r);
    return a;
  }
  if (auto r = parse_latex_fraction(s)) {
    a.kind = CanonicalAnswer::Kind::number;
    a.numeric = *r;
    a.value = rational_to_string(*r);
    return a;
  }

  a.kind = CanonicalAnswer::Kind::text;
  a.value = collapse_lower(s);
  return a;
}

bool answers_equivalent(const CanonicalAnswer& a, const CanonicalAnswer& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == CanonicalAnswer::Kind::number) {
    const Rational& x = *a.numeric;
    const Rational& y = *b.numeric;
    if (static_cast<__int128>(x.num) * y.den == static_cast<__int128>(y.num) * x.den)
      return true;
    double dx = x.to_double(), dy = y.to_double();
    return std::fabs(dx - dy) <= 1e-9 * std::max(std::fabs(dx), std::fabs(dy));
  }
  return a.value == b.value;
}

bool answers_equivalent(const std::string& a, const std::string& b) {
  return answers_equivalent(normalize_answer(a), normalize_answer(b));
}

namespace {

struct VoteClass {
  CanonicalAnswer canon;
  std::string representative;  // first-seen raw answer
  std::size_t count = 0;
  std::size_t first_index = 0;
};

std::vector<VoteClass> group_answers(const std::vector<std::string>& answers) {
  std::vector<VoteClass> classes;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    CanonicalAnswer c = normalize_answer(answers[i]);
    bool found = false;
    for (auto& cls : classes) {
      if (answers_equivalent(cls.canon, c)) {
        ++cls.count;
        found = true;
        break;
      }
    }
    if (!found) classes.push_back({std::move(c), answers[i], 1, i});
  }
  return classes;
}

}  // namespace

std::optional<std::string> majority_vote(const std::vector<std::string>& answers,
                                         std::size_t threshold) {
  if (answers.empty()) throw DataError("majority_vote on empty answer list");
  if (threshold < 1) throw UsageError("majority_vote threshold must be >= 1");
  auto classes = group_answers(answers);
  const VoteClass* winner = nullptr;
  for (const auto& cls : classes) {
    if (cls.count >= threshold) {
      if (winner) throw DataError("ambiguous majority: two classes reach the threshold");
      winner = &cls;
    }
  }
  if (!winner) return std::nullopt;
  return winner->representative;
}

std::optional<std::string> plurality_vote(const std::vector<std::string>& answers) {
  if (answers.empty()) return std::nullopt;
  auto classes = group_answers(answers);
  const VoteClass* best = &classes.front();
  for (const auto& cls : classes) {
    if (cls.count > best->count ||
        (cls.count == best->count && cls.first_index < best->first_index)) {
      best = &cls;
    }
  }
  return best->representative;
}

Dataset correctness_filter(const Dataset& d, const CorrectnessOptions& opts,
                           std::uint64_t seed) {
  Dataset out;
  out.manifest = d.manifest;
  std::size_t dropped_incorrect = 0;
  std::size_t dropped_no_ground_truth = 0;
  std::size_t dropped_no_prediction = 0;
  std::size_t passed_unverifiable = 0;

  for (const auto& r : d.records) {
    if (!r.ground_truth) {
      if (opts.keep_unverifiable) {
        out.records.push_back(r);
        ++passed_unverifiable;
      } else {
        ++dropped_no_ground_truth;
      }
      continue;
    }
    if (!r.cot || !r.cot->predicted) {
      ++dropped_no_prediction;
      continue;
    }
    if (answers_equivalent(*r.cot->predicted, *r.ground_truth)) {
      CurationRecord kept = r;
      kept.meta["verified"] = "true";
      out.records.push_back(std::move(kept));
    } else {
      ++dropped_incorrect;
    }
  }

  StageEntry e;
  e.name = "filter-correct";
  e.parameters["keep_unverifiable"] = opts.keep_unverifiable ? "true" : "false";
  e.parameters["dropped_incorrect"] = std::to_string(dropped_incorrect);
  e.parameters["dropped_no_ground_truth"] = std::to_string(dropped_no_ground_truth);
  e.parameters["dropped_no_prediction"] = std::to_string(dropped_no_prediction);
  e.parameters["passed_unverifiable"] = std::to_string(passed_unverifiable);
  e.global_seed = seed;
  e.count_in = d.records.size();
  e.count_out = out.records.size();
  e.timestamp = now_iso8601();
  out.manifest.add_stage(std::move(e));
  return out;
}

}  // namespace vlcot::verify
