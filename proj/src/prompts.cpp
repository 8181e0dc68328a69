#include "vlcot/prompts.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "vlcot/error.hpp"

namespace vlcot::gen {

namespace {

// The three slot names a template may declare. Any other {...} sequence is
// literal text (e.g. \boxed{}).
bool is_slot_name(const std::string& name) {
  return name == "question" || name == "caption" || name == "k";
}

std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw UsageError("cannot read template file: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    char c = tmpl[i];
    if (c != '{') {
      out.push_back(c);
      ++i;
      continue;
    }
    std::size_t close = tmpl.find('}', i);
    if (close == std::string::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    std::string name = tmpl.substr(i + 1, close - i - 1);
    if (is_slot_name(name)) {
      auto it = slots.find(name);
      if (it == slots.end()) {
        throw UsageError("template slot {" + name + "} has no binding");
      }
      out += it->second;
    } else {
      out.append(tmpl, i, close - i + 1);  // literal braces
    }
    i = close + 1;
  }
  return out;
}

PromptTemplateSet PromptTemplateSet::defaults() {
  // Project-authored defaults; no upstream source. Override with --templates.
  PromptTemplateSet t;
  t.cot_gen =
      "You are given an image and a question about it. Think through the problem step by "
      "step, explaining your reasoning, then give the final answer.\n\n"
      "Question: {question}\n\n"
      "Your final answer MUST BE put in \\boxed{}.";
  t.caption_gen =
      "Describe this image in detail. Cover the layout, any text or numbers it contains, "
      "and the relationships between the elements, so that a reader could answer questions "
      "about the image from your description alone.";
  t.question_gen =
      "Here is an image and an example question about it.\n\n"
      "Example question: {question}\n\n"
      "Write exactly {k} new questions about the same image. Each question must be "
      "reasonable, solvable from the image alone, and of similar difficulty to the example. "
      "Reply with a numbered list, one question per line, and nothing else.";
  t.distractor_rewrite =
      "Rewrite the multiple-choice question between the --- markers so it has exactly ten "
      "options labeled A) through J). Keep the text of the original correct answer as one of "
      "the options, then give a short step-by-step solution ending with the correct option "
      "letter.\n\n"
      "---\n{question}\n---\n\n"
      "Format your reply exactly as:\n"
      "<question>\n...stem and ten options, one per line...\n</question>\n"
      "<think>\n...solution steps...\n</think>\n"
      "\\boxed{letter}";
  t.difficulty_rate =
      "Rate the difficulty of the following problem on the competition scale: 1 (beginner), "
      "1.5, 2, 3 (AMC), 4 (intermediate, AIME), 4+ (Olympiad). Reply with \"Level X\" and "
      "nothing else.\n\n"
      "Problem: {question}";
  t.blind_solve =
      "Answer the following question without any image, relying only on the question text "
      "and your general knowledge. Think step by step.\n\n"
      "Question: {question}\n\n"
      "Your final answer MUST BE put in \\boxed{}.";
  t.caption_only_solve =
      "An image is described below. Using only this description and the question, think "
      "step by step and answer.\n\n"
      "Image description: {caption}\n\n"
      "Question: {question}\n\n"
      "Your final answer MUST BE put in \\boxed{}.";
  return t;
}

PromptTemplateSet PromptTemplateSet::load_from_dir(const std::filesystem::path& dir) {
  PromptTemplateSet t = defaults();
  struct Entry {
    const char* name;
    std::string* field;
  };
  Entry entries[] = {
      {"cot_gen", &t.cot_gen},
      {"caption_gen", &t.caption_gen},
      {"question_gen", &t.question_gen},
      {"distractor_rewrite", &t.distractor_rewrite},
      {"difficulty_rate", &t.difficulty_rate},
      {"blind_solve", &t.blind_solve},
      {"caption_only_solve", &t.caption_only_solve},
  };
  for (auto& e : entries) {
    auto p = dir / (std::string(e.name) + ".txt");
    if (std::filesystem::exists(p)) *e.field = read_text_file(p);
  }
  return t;
}

const std::string& PromptTemplateSet::by_id(const std::string& template_id) const {
  if (template_id == "cot_gen") return cot_gen;
  if (template_id == "caption_gen") return caption_gen;
  if (template_id == "question_gen") return question_gen;
  if (template_id == "distractor_rewrite") return distractor_rewrite;
  if (template_id == "difficulty_rate") return difficulty_rate;
  if (template_id == "blind_solve") return blind_solve;
  if (template_id == "caption_only_solve") return caption_only_solve;
  throw UsageError("unknown template id: " + template_id);
}

}  // namespace vlcot::gen
