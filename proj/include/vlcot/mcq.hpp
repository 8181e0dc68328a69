#pragma once

#include <optional>
#include <string>
#include <vector>

namespace vlcot::mcq {

struct Option {
  char letter = 'A';
  std::string text;
};

// Detects labeled options "A) ...", "A. ...", "(A) ...", "A: ..." for letters
// A..J. Options must start at A and be consecutive; fewer than two means the
// question is not multiple-choice and an empty vector comes back.
std::vector<Option> detect_options(const std::string& question);

bool is_multiple_choice(const std::string& question);

// Question stem (text before the first option label).
std::string question_stem(const std::string& question);

// Stem + "\n" + one "X) text" line per option.
std::string format_question(const std::string& stem, const std::vector<Option>& options);

std::optional<std::string> option_text_for(const std::vector<Option>& options, char letter);
std::optional<char> letter_for_text(const std::vector<Option>& options, const std::string& text);

}  // namespace vlcot::mcq
