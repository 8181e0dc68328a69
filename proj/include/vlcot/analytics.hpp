#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "vlcot/record.hpp"

namespace vlcot::analytics {

struct KeywordStat {
  std::string category;
  std::size_t count = 0;  // CoTs containing >= 1 whole-word occurrence
};

struct StatsReport {
  std::size_t total = 0;
  std::size_t vl_count = 0;
  std::size_t text_count = 0;
  std::size_t unique_images = 0;     // by perceptual hash
  std::size_t unique_questions = 0;  // by normalized text
  double avg_question_words = 0.0;   // over all records
  double avg_cot_words = 0.0;        // over records with a CoT (caption + solution)
  std::map<std::string, KeywordStat> keyword_counts;

  std::string to_json() const;
  std::string to_table() const;  // aligned text table
  std::string to_csv() const;
};

using Lexicon = std::map<std::string, std::string>;  // keyword -> category

// {Identify, Recall}: Perception; Provided: Comprehension; First: Planning;
// Wait: Reflection.
const Lexicon& default_lexicon();

// Counting is per-CoT containment (not total occurrences), case-insensitive,
// whole words only.
std::map<std::string, KeywordStat> keyword_analysis(const Dataset& d, const Lexicon& lexicon);

StatsReport dataset_stats(const Dataset& d, const std::filesystem::path& image_root = {},
                          const Lexicon& lexicon = default_lexicon());

}  // namespace vlcot::analytics
