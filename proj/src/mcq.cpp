#include "vlcot/mcq.hpp"

#include <algorithm>

#include "vlcot/text.hpp"

namespace vlcot::mcq {

namespace {

struct Marker {
  char letter;
  std::size_t label_start;  // position of the letter (or '(')
  std::size_t text_start;   // position just past the label
};

// An option label is "X)", "X.", "X:" or "(X)" with X in A..J, at the start
// of a line or preceded by whitespace, followed by a space or line end.
std::vector<Marker> find_markers(const std::string& q) {
  std::vector<Marker> out;
  for (std::size_t i = 0; i < q.size(); ++i) {
    bool at_boundary = i == 0 || is_space(q[i - 1]);
    if (!at_boundary) continue;
    char c = q[i];
    std::size_t letter_pos = i;
    bool paren = false;
    if (c == '(' && i + 2 < q.size()) {
      paren = true;
      letter_pos = i + 1;
      c = q[letter_pos];
    }
    if (c < 'A' || c > 'J') continue;
    std::size_t delim_pos = letter_pos + 1;
    if (delim_pos >= q.size()) continue;
    char d = q[delim_pos];
    std::size_t after;
    if (paren) {
      if (d != ')') continue;
      after = delim_pos + 1;
    } else {
      if (d != ')' && d != '.' && d != ':') continue;
      after = delim_pos + 1;
    }
    if (after < q.size() && !is_space(q[after])) continue;
    out.push_back({c, i, after});
  }
  return out;
}

}  // namespace

std::vector<Option> detect_options(const std::string& question) {
  std::vector<Marker> markers = find_markers(question);
  // longest run of consecutive letters starting at 'A'
  std::vector<Option> best;
  for (std::size_t start = 0; start < markers.size(); ++start) {
    if (markers[start].letter != 'A') continue;
    std::vector<const Marker*> run = {&markers[start]};
    char expect = 'B';
    for (std::size_t j = start + 1; j < markers.size() && expect <= 'J'; ++j) {
      if (markers[j].letter == expect) {
        run.push_back(&markers[j]);
        ++expect;
      }
    }
    if (run.size() >= 2 && run.size() > best.size()) {
      std::vector<Option> opts;
      for (std::size_t j = 0; j < run.size(); ++j) {
        std::size_t text_begin = run[j]->text_start;
        std::size_t text_end =
            j + 1 < run.size() ? run[j + 1]->label_start : question.size();
        opts.push_back({run[j]->letter,
                        std::string(trim(std::string_view(question)
                                             .substr(text_begin, text_end - text_begin)))});
      }
      best = std::move(opts);
    }
  }
  return best;
}

bool is_multiple_choice(const std::string& question) { return !detect_options(question).empty(); }

std::string question_stem(const std::string& question) {
  std::vector<Option> opts = detect_options(question);
  if (opts.empty()) return question;
  std::vector<Marker> markers = find_markers(question);
  for (const auto& m : markers) {
    if (m.letter == 'A') {
      return std::string(trim(std::string_view(question).substr(0, m.label_start)));
    }
  }
  return question;
}

std::string format_question(const std::string& stem, const std::vector<Option>& options) {
  std::string out = stem;
  for (const auto& o : options) {
    out += "\n";
    out.push_back(o.letter);
    out += ") ";
    out += o.text;
  }
  return out;
}

std::optional<std::string> option_text_for(const std::vector<Option>& options, char letter) {
  for (const auto& o : options) {
    if (o.letter == letter) return o.text;
  }
  return std::nullopt;
}

std::optional<char> letter_for_text(const std::vector<Option>& options, const std::string& text) {
  std::string want = collapse_lower(text);
  for (const auto& o : options) {
    if (collapse_lower(o.text) == want) return o.letter;
  }
  return std::nullopt;
}

}  // namespace vlcot::mcq
