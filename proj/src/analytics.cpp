#include "vlcot/analytics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vlcot/parallel.hpp"
#include "vlcot/phash.hpp"
#include "vlcot/text.hpp"

namespace vlcot::analytics {

const Lexicon& default_lexicon() {
  static const Lexicon lex = {
      {"Identify", "Perception"}, {"Recall", "Perception"}, {"Provided", "Comprehension"},
      {"First", "Planning"},      {"Wait", "Reflection"},
  };
  return lex;
}

namespace {

bool contains_whole_word(const std::string& haystack_lower, const std::string& needle_lower) {
  std::size_t pos = 0;
  while ((pos = haystack_lower.find(needle_lower, pos)) != std::string::npos) {
    bool left_ok = pos == 0 || !is_word_char(haystack_lower[pos - 1]);
    std::size_t end = pos + needle_lower.size();
    bool right_ok = end >= haystack_lower.size() || !is_word_char(haystack_lower[end]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

std::string cot_text(const CurationRecord& r) {
  std::string t;
  if (r.cot) {
    if (r.cot->caption) {
      t += *r.cot->caption;
      t += "\n";
    }
    t += r.cot->solution;
  }
  return t;
}

}  // namespace

std::map<std::string, KeywordStat> keyword_analysis(const Dataset& d, const Lexicon& lexicon) {
  std::map<std::string, KeywordStat> out;
  std::vector<std::pair<std::string, std::string>> needles;  // lowered keyword, keyword
  for (const auto& [kw, cat] : lexicon) {
    out[kw] = {cat, 0};
    needles.emplace_back(to_lower(kw), kw);
  }
  std::vector<std::map<std::string, std::size_t>> partial(d.records.size());
  parallel_for(d.records.size(), [&](std::size_t i) {
    const auto& r = d.records[i];
    if (!r.cot) return;
    std::string text = to_lower(cot_text(r));
    for (const auto& [lowered, kw] : needles) {
      if (contains_whole_word(text, lowered)) partial[i][kw] = 1;
    }
  });
  for (const auto& p : partial) {
    for (const auto& [kw, n] : p) out[kw].count += n;
  }
  return out;
}

StatsReport dataset_stats(const Dataset& d, const std::filesystem::path& image_root,
                          const Lexicon& lexicon) {
  StatsReport rep;
  rep.total = d.records.size();

  std::set<std::string> refs;
  for (const auto& r : d.records) {
    if (r.image_ref) {
      ++rep.vl_count;
      refs.insert(*r.image_ref);
    } else {
      ++rep.text_count;
    }
  }

  // image uniqueness by perceptual hash; an undecodable ref counts as its own
  // singleton image
  std::vector<std::string> ref_list(refs.begin(), refs.end());
  std::vector<std::optional<std::uint64_t>> hashes(ref_list.size());
  parallel_for(ref_list.size(), [&](std::size_t i) {
    try {
      std::filesystem::path p(ref_list[i]);
      if (p.is_relative() && !image_root.empty()) p = image_root / p;
      hashes[i] = dedup::phash(load_image(p)).bits;
    } catch (const std::exception&) {
      hashes[i] = std::nullopt;
    }
  });
  std::set<std::uint64_t> unique_hashes;
  std::size_t undecodable = 0;
  for (const auto& h : hashes) {
    if (h) {
      unique_hashes.insert(*h);
    } else {
      ++undecodable;
    }
  }
  rep.unique_images = unique_hashes.size() + undecodable;

  std::set<std::string> questions;
  std::size_t question_words = 0;
  std::size_t cot_words = 0, cot_n = 0;
  for (const auto& r : d.records) {
    questions.insert(collapse_lower(r.question));
    question_words += whitespace_token_count(r.question);
    if (r.cot) {
      cot_words += whitespace_token_count(cot_text(r));
      ++cot_n;
    }
  }
  rep.unique_questions = questions.size();
  rep.avg_question_words =
      rep.total == 0 ? 0.0 : static_cast<double>(question_words) / static_cast<double>(rep.total);
  rep.avg_cot_words =
      cot_n == 0 ? 0.0 : static_cast<double>(cot_words) / static_cast<double>(cot_n);

  rep.keyword_counts = keyword_analysis(d, lexicon);
  return rep;
}

std::string StatsReport::to_json() const {
  nlohmann::ordered_json j;
  j["total"] = total;
  j["vl_count"] = vl_count;
  j["text_count"] = text_count;
  j["unique_images"] = unique_images;
  j["unique_questions"] = unique_questions;
  j["avg_question_words"] = avg_question_words;
  j["avg_cot_words"] = avg_cot_words;
  j["keyword_counts"] = nlohmann::ordered_json::object();
  for (const auto& [kw, stat] : keyword_counts) {
    j["keyword_counts"][kw] = {{"category", stat.category}, {"count", stat.count}};
  }
  j["counting"] = "per-CoT containment, case-insensitive whole words";
  return j.dump(2);
}

std::string StatsReport::to_table() const {
  std::ostringstream os;
  char line[128];
  auto row = [&](const char* k, const std::string& v) {
    std::snprintf(line, sizeof(line), "%-22s %s\n", k, v.c_str());
    os << line;
  };
  auto num = [](double v) {
    char b[32];
    std::snprintf(b, sizeof(b), "%.2f", v);
    return std::string(b);
  };
  row("total", std::to_string(total));
  row("vl_count", std::to_string(vl_count));
  row("text_count", std::to_string(text_count));
  row("unique_images", std::to_string(unique_images));
  row("unique_questions", std::to_string(unique_questions));
  row("avg_question_words", num(avg_question_words));
  row("avg_cot_words", num(avg_cot_words));
  os << "keywords (per-CoT containment, case-insensitive whole words):\n";
  for (const auto& [kw, stat] : keyword_counts) {
    std::snprintf(line, sizeof(line), "  %-12s %-14s %zu\n", kw.c_str(), stat.category.c_str(),
                  stat.count);
    os << line;
  }
  return os.str();
}

std::string StatsReport::to_csv() const {
  std::ostringstream os;
  os << "metric,value\n";
  os << "total," << total << "\n";
  os << "vl_count," << vl_count << "\n";
  os << "text_count," << text_count << "\n";
  os << "unique_images," << unique_images << "\n";
  os << "unique_questions," << unique_questions << "\n";
  os << "avg_question_words," << avg_question_words << "\n";
  os << "avg_cot_words," << avg_cot_words << "\n";
  for (const auto& [kw, stat] : keyword_counts) {
    os << "keyword_" << kw << "," << stat.count << "\n";
  }
  return os.str();
}

}  // namespace vlcot::analytics
