#include "vlcot/genclient.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "vlcot/answer.hpp"
#include "vlcot/error.hpp"
#include "vlcot/mcq.hpp"
#include "vlcot/rng.hpp"
#include "vlcot/text.hpp"
#include "vlcot/training_text.hpp"

namespace vlcot::gen {

std::string GenerationRequest::prompt_text() const {
  std::string out;
  for (const auto& p : parts) {
    if (const auto* t = std::get_if<TextPart>(&p)) {
      if (!out.empty()) out += "\n";
      out += t->text;
    }
  }
  return out;
}

std::uint64_t GenerationRequest::content_hash() const {
  std::uint64_t h = fnv1a64(template_id);
  for (const auto& p : parts) {
    if (const auto* t = std::get_if<TextPart>(&p)) {
      h = fnv1a64("T:", h);
      h = fnv1a64(t->text, h);
    } else if (const auto* im = std::get_if<ImagePart>(&p)) {
      h = fnv1a64("I:", h);
      // hash the bytes, not the path, so a moved file still caches correctly
      std::ifstream in(im->path, std::ios::binary);
      if (in) {
        char buf[8192];
        while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
          h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
          if (in.gcount() == 0) break;
        }
      } else {
        h = fnv1a64(im->path, h);
      }
    }
  }
  if (assistant_prefill) {
    h = fnv1a64("P:", h);
    h = fnv1a64(*assistant_prefill, h);
  }
  char tbuf[40];
  std::snprintf(tbuf, sizeof(tbuf), "t=%a;m=%d", temperature, max_new_tokens);
  h = fnv1a64(tbuf, h);
  return h;
}

// --- MockBackend -------------------------------------------------------------

void MockBackend::on_template(const std::string& template_id, Handler h) {
  handlers_[template_id] = std::move(h);
}

void MockBackend::set_fallback(Handler h) { fallback_ = std::move(h); }

void MockBackend::fail_next(int n) { failures_to_inject_.store(n); }

void MockBackend::set_latency_jitter(std::uint64_t seed, int max_millis) {
  jitter_ = max_millis > 0;
  jitter_seed_ = seed;
  jitter_max_ms_ = max_millis;
}

GenerationResponse MockBackend::complete(const GenerationRequest& req) {
  if (req.assistant_prefill && !prefill_) {
    throw BackendError("backend 'mock' lacks the assistant-prefill capability");
  }
  int remaining = failures_to_inject_.load();
  while (remaining > 0) {
    if (failures_to_inject_.compare_exchange_weak(remaining, remaining - 1)) {
      throw TransientBackendFailure("injected transient failure");
    }
  }
  if (jitter_) {
    std::uint64_t ms = Rng(jitter_seed_ ^ req.content_hash()).uniform_index(
        static_cast<std::size_t>(jitter_max_ms_) + 1);
    std::this_thread::sleep_for(std::chrono::milliseconds(ms));
  }
  auto it = handlers_.find(req.template_id);
  if (it != handlers_.end()) return it->second(req);
  if (fallback_) return fallback_(req);
  return synthesize(req);
}

namespace {

GenerationResponse make_text_response(const GenerationRequest& req, std::string text) {
  GenerationResponse r;
  r.text = std::move(text);
  r.prompt_tokens = whitespace_token_count(req.prompt_text());
  r.completion_tokens = whitespace_token_count(r.text);
  r.finish_reason = FinishReason::stop;
  return r;
}

// Deterministic answer pool for the builtin mock: option letters when the
// prompt embeds a multiple-choice question, small integers otherwise.
std::string pick_mock_answer(const GenerationRequest& req, std::uint64_t salt) {
  std::string prompt = req.prompt_text();
  std::uint64_t h = req.content_hash() ^ salt;
  if (req.seed) h ^= *req.seed * 0x9e3779b97f4a7c15ULL;
  if (req.temperature == 0.0) h ^= 0x5bf03635ULL;
  Rng rng(h);
  auto options = mcq::detect_options(prompt);
  if (!options.empty()) {
    return std::string(1, options[rng.uniform_index(options.size())].letter);
  }
  return std::to_string(1 + rng.uniform_index(3));
}

std::string between_markers(const std::string& s, const std::string& open,
                            const std::string& close) {
  auto b = s.find(open);
  if (b == std::string::npos) return {};
  b += open.size();
  auto e = s.find(close, b);
  if (e == std::string::npos) return {};
  return s.substr(b, e - b);
}

}  // namespace

GenerationResponse MockBackend::synthesize(const GenerationRequest& req) {
  const std::string& tid = req.template_id;
  std::uint64_t h = req.content_hash();
  if (req.seed) h ^= *req.seed * 0xd1342543de82ef95ULL;

  if (tid == "caption_gen") {
    std::ostringstream os;
    os << "The image shows a synthetic figure with marker " << (h % 1000)
       << " and several labeled values arranged left to right.";
    return make_text_response(req, os.str());
  }
  if (tid == "question_gen") {
    // our question_gen template phrases the count as "Write exactly {k} ..."
    std::string prompt = req.prompt_text();
    int k = 1;
    auto pos = prompt.find("Write exactly ");
    if (pos != std::string::npos) {
      k = std::atoi(prompt.c_str() + pos + 14);
      if (k < 1) k = 1;
    }
    std::ostringstream os;
    for (int i = 1; i <= k; ++i) {
      if (i > 1) os << "\n";
      os << i << ". What is the value of item " << i << " in the image (series " << (h % 97)
         << ")?";
    }
    return make_text_response(req, os.str());
  }
  if (tid == "difficulty_rate") {
    static const char* levels[] = {"1", "1.5", "2", "3", "4", "4+"};
    return make_text_response(req, std::string("Level ") + levels[h % 6]);
  }
  if (tid == "distractor_rewrite") {
    std::string prompt = req.prompt_text();
    std::string original = between_markers(prompt, "---\n", "\n---");
    auto options = mcq::detect_options(original);
    std::string stem = mcq::question_stem(original);
    auto correct = verify::try_extract_boxed(original);  // embedded original solution
    std::vector<mcq::Option> ten;
    for (std::size_t i = 0; i < options.size() && i < 10; ++i) {
      ten.push_back({static_cast<char>('A' + i), options[i].text});
    }
    for (std::size_t i = ten.size(); i < 10; ++i) {
      ten.push_back({static_cast<char>('A' + i),
                     "distractor value " + std::to_string((h >> (i % 32)) % 90 + 10)});
    }
    char letter = correct && correct->size() == 1 ? (*correct)[0] : 'A';
    std::ostringstream os;
    os << "<question>\n"
       << mcq::format_question(stem, ten) << "\n</question>\n<think>\n"
       << "Re-checking the options, the original answer text is unchanged.\n"
       << "</think>\n\\boxed{" << letter << "}";
    return make_text_response(req, os.str());
  }

  // cot_gen / blind_solve / caption_only_solve and anything unknown: a
  // boxed-answer completion. cot_gen output follows the caption-then-solve
  // shape unless the request continues a prefilled caption.
  std::uint64_t salt = fnv1a64(tid);
  std::string answer = pick_mock_answer(req, salt);
  std::ostringstream os;
  if (tid == "cot_gen" && !req.assistant_prefill) {
    os << "<caption> The image shows a synthetic figure with marker " << (h % 1000)
       << ". </caption>\n";
  }
  os << "<think>\nStep 1: restate the question.\nStep 2: read the relevant values.\n"
     << "Step 3: conclude.\n</think>\n\\boxed{" << answer << "}";
  return make_text_response(req, os.str());
}

// --- ResponseCache -----------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string ResponseCache::key_for(const GenerationRequest& req) {
  char buf[64];
  std::uint64_t h = req.content_hash();
  std::uint64_t seed = req.seed.value_or(0);
  std::snprintf(buf, sizeof(buf), "%016llx-%016llx", static_cast<unsigned long long>(h),
                static_cast<unsigned long long>(seed));
  std::string tid = req.template_id.empty() ? "raw" : req.template_id;
  return tid + "-" + buf;
}

std::optional<GenerationResponse> ResponseCache::lookup(const GenerationRequest& req) {
  std::string key = key_for(req);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = memory_.find(key);
    if (it != memory_.end()) return it->second;
  }
  auto path = dir_ / (key + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    nlohmann::json j;
    in >> j;
    GenerationResponse r;
    r.text = j.at("text").get<std::string>();
    r.prompt_tokens = j.at("prompt_tokens").get<std::size_t>();
    r.completion_tokens = j.at("completion_tokens").get<std::size_t>();
    std::string fr = j.value("finish_reason", "stop");
    r.finish_reason = fr == "length"  ? FinishReason::length
                      : fr == "error" ? FinishReason::error
                                      : FinishReason::stop;
    std::lock_guard<std::mutex> lock(mutex_);
    memory_[key] = r;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;  // corrupt entry: treat as miss
  }
}

void ResponseCache::store(const GenerationRequest& req, const GenerationResponse& resp) {
  std::string key = key_for(req);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    memory_[key] = resp;
  }
  nlohmann::json j;
  j["text"] = resp.text;
  j["prompt_tokens"] = resp.prompt_tokens;
  j["completion_tokens"] = resp.completion_tokens;
  j["finish_reason"] = resp.finish_reason == FinishReason::length  ? "length"
                       : resp.finish_reason == FinishReason::error ? "error"
                                                                   : "stop";
  auto tmp = dir_ / (key + ".tmp");
  auto final_path = dir_ / (key + ".json");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << j.dump();
  }
  std::error_code ec;
  std::filesystem::rename(tmp, final_path, ec);  // atomic on POSIX
}

// --- Client ------------------------------------------------------------------

std::string to_string(DifficultyLevel level) {
  switch (level) {
    case DifficultyLevel::l1: return "1";
    case DifficultyLevel::l1_5: return "1.5";
    case DifficultyLevel::l2: return "2";
    case DifficultyLevel::l3: return "3";
    case DifficultyLevel::l4: return "4";
    case DifficultyLevel::l4_plus: return "4+";
    case DifficultyLevel::unknown: return "unknown";
  }
  return "unknown";
}

Client::Client(std::shared_ptr<Backend> backend, ClientConfig cfg, PromptTemplateSet templates)
    : backend_(std::move(backend)), cfg_(cfg), templates_(std::move(templates)) {
  if (cfg_.max_in_flight < 1) throw UsageError("max_in_flight must be >= 1");
  if (cfg_.cache_dir) cache_ = std::make_unique<ResponseCache>(*cfg_.cache_dir);
}

GenerationResponse Client::dispatch_one(const GenerationRequest& req) {
  {
    std::lock_guard<std::mutex> lock(counter_mutex_);
    ++issued_[req.template_id];
  }
  if (cache_) {
    if (auto hit = cache_->lookup(req)) return *hit;
  }
  int attempt = 0;
  for (;;) {
    try {
      ++backend_calls_;
      GenerationResponse r = backend_->complete(req);
      if (cache_) cache_->store(req, r);
      return r;
    } catch (const TransientBackendFailure& e) {
      if (attempt >= cfg_.max_retries) {
        throw BackendError(std::string("backend failed after ") +
                           std::to_string(cfg_.max_retries) + " retries: " + e.what());
      }
      auto delay = cfg_.backoff_base * (1LL << attempt);
      std::this_thread::sleep_for(delay);
      ++attempt;
      ++retries_;
    }
  }
}

GenerationResponse Client::generate(const GenerationRequest& req) { return dispatch_one(req); }

std::vector<GenerationResponse> Client::generate_batch(
    const std::vector<GenerationRequest>& reqs) {
  std::vector<GenerationResponse> results(reqs.size());
  std::vector<std::exception_ptr> errors(reqs.size());
  std::atomic<std::size_t> next{0};
  const int workers =
      static_cast<int>(std::min<std::size_t>(cfg_.max_in_flight, reqs.size()));
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= reqs.size()) return;
      try {
        results[i] = dispatch_one(reqs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  // submission-order result delivery: results[i] belongs to reqs[i]; the
  // first (by index) failure is what callers see
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
  }
  return results;
}

std::vector<std::optional<GenerationResponse>> Client::try_generate_batch(
    const std::vector<GenerationRequest>& reqs) {
  std::vector<std::optional<GenerationResponse>> results(reqs.size());
  std::atomic<std::size_t> next{0};
  const int workers =
      static_cast<int>(std::min<std::size_t>(cfg_.max_in_flight, reqs.size()));
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= reqs.size()) return;
      try {
        results[i] = dispatch_one(reqs[i]);
      } catch (const std::exception&) {
        // nullopt marks the failed item
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return results;
}

GenerationRequest Client::make_request(const std::string& template_id,
                                       const std::map<std::string, std::string>& slots,
                                       const std::optional<std::string>& image_path,
                                       double temperature,
                                       std::optional<std::uint64_t> seed) const {
  GenerationRequest req;
  req.template_id = template_id;
  req.parts.push_back(TextPart{render_template(templates_.by_id(template_id), slots)});
  if (image_path) req.parts.push_back(ImagePart{*image_path});
  req.temperature = temperature;
  req.max_new_tokens = cfg_.max_new_tokens;
  req.seed = seed;
  return req;
}

ChainOfThought Client::generate_cot(const std::optional<std::string>& image_path,
                                    const std::string& question, double temperature,
                                    std::optional<std::uint64_t> seed) {
  GenerationRequest req =
      make_request("cot_gen", {{"question", question}}, image_path, temperature, seed);
  GenerationResponse resp = generate(req);
  ChainOfThought cot;
  // caption-then-solve completions get their caption stripped here; the
  // curation pipeline sources captions from caption_gen instead
  if (auto parsed = parse_training_text(resp.text)) {
    cot.solution = parsed->solution;
    cot.predicted = parsed->predicted;
  } else {
    cot.solution = resp.text;
    cot.predicted = verify::try_extract_boxed(resp.text);
  }
  return cot;
}

std::vector<ChainOfThought> Client::generate_cots(const std::optional<std::string>& image_path,
                                                  const std::string& question, int n,
                                                  double temperature,
                                                  std::uint64_t seed_base) {
  std::vector<GenerationRequest> reqs;
  reqs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    reqs.push_back(make_request("cot_gen", {{"question", question}}, image_path, temperature,
                                derive_seed(seed_base, question, static_cast<std::uint64_t>(i))));
  }
  std::vector<GenerationResponse> resps = generate_batch(reqs);
  std::vector<ChainOfThought> cots;
  cots.reserve(resps.size());
  for (const auto& r : resps) {
    ChainOfThought cot;
    if (auto parsed = parse_training_text(r.text)) {
      cot.solution = parsed->solution;
      cot.predicted = parsed->predicted;
    } else {
      cot.solution = r.text;
      cot.predicted = verify::try_extract_boxed(r.text);
    }
    cots.push_back(std::move(cot));
  }
  return cots;
}

std::string Client::generate_caption(const std::string& image_path) {
  GenerationRequest req =
      make_request("caption_gen", {}, image_path, cfg_.probe_temperature, std::nullopt);
  GenerationResponse resp = generate(req);
  std::string caption(trim(resp.text));
  if (caption.empty()) throw BackendError("caption generation returned an empty completion");
  return caption;
}

std::vector<std::string> parse_numbered_questions(const std::string& completion) {
  std::vector<std::string> out;
  std::istringstream is(completion);
  std::string line;
  while (std::getline(is, line)) {
    std::string_view s = trim(line);
    if (s.empty()) continue;
    if (s[0] == 'Q' || s[0] == 'q') s.remove_prefix(1);
    std::size_t d = 0;
    while (d < s.size() && std::isdigit(static_cast<unsigned char>(s[d]))) ++d;
    if (d == 0 || d >= s.size()) continue;
    if (s[d] != '.' && s[d] != ')' && s[d] != ':') continue;
    std::string_view q = trim(s.substr(d + 1));
    if (!q.empty()) out.emplace_back(q);
  }
  return out;
}

QuestionBatch Client::generate_questions(const std::string& image_path,
                                         const std::string& seed_question, int k,
                                         std::uint64_t seed) {
  if (k < 1) throw UsageError("generate_questions needs k >= 1");
  std::map<std::string, std::string> slots = {{"question", seed_question},
                                              {"k", std::to_string(k)}};
  auto attempt = [&](std::uint64_t s) {
    GenerationRequest req =
        make_request("question_gen", slots, image_path, cfg_.sampling_temperature, s);
    return parse_numbered_questions(generate(req).text);
  };
  std::vector<std::string> qs = attempt(seed);
  bool retried = false;
  if (static_cast<int>(qs.size()) < k) {
    retried = true;
    std::vector<std::string> qs2 = attempt(derive_seed(seed, seed_question, 1));
    if (qs2.size() > qs.size()) qs = std::move(qs2);
  }
  if (qs.empty()) throw BackendError("question generation produced zero parseable questions");
  if (static_cast<int>(qs.size()) > k) qs.resize(static_cast<std::size_t>(k));
  QuestionBatch batch;
  batch.partial = static_cast<int>(qs.size()) < k && retried;
  batch.questions = std::move(qs);
  return batch;
}

DifficultyLevel parse_difficulty(const std::string& completion) {
  auto classify = [](std::string_view tok) -> std::optional<DifficultyLevel> {
    // strip trailing punctuation that is not part of a level token
    while (!tok.empty() && (tok.back() == '.' || tok.back() == ',' || tok.back() == ';' ||
                            tok.back() == ':' || tok.back() == '!' || tok.back() == ')')) {
      if (tok == "1.5") break;
      tok.remove_suffix(1);
    }
    if (tok == "1") return DifficultyLevel::l1;
    if (tok == "1.5") return DifficultyLevel::l1_5;
    if (tok == "2") return DifficultyLevel::l2;
    if (tok == "3") return DifficultyLevel::l3;
    if (tok == "4") return DifficultyLevel::l4;
    if (tok == "4+") return DifficultyLevel::l4_plus;
    return std::nullopt;
  };
  auto tokens = split_whitespace(completion);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (to_lower(tokens[i]) == "level" && i + 1 < tokens.size()) {
      if (auto l = classify(tokens[i + 1])) return *l;
    }
  }
  for (const auto& t : tokens) {
    if (auto l = classify(t)) return *l;
  }
  return DifficultyLevel::unknown;
}

DifficultyLevel Client::rate_difficulty(const std::string& question) {
  GenerationRequest req = make_request("difficulty_rate", {{"question", question}},
                                       std::nullopt, cfg_.probe_temperature, std::nullopt);
  return parse_difficulty(generate(req).text);
}

std::optional<Client::Rewrite> Client::rewrite_distractors(const std::string& question,
                                                           const ChainOfThought& cot,
                                                           std::uint64_t seed) {
  auto original_options = mcq::detect_options(question);
  if (original_options.empty()) {
    throw DataError("rewrite_distractors requires a multiple-choice question");
  }
  if (!cot.predicted || cot.predicted->size() != 1) {
    return std::nullopt;  // no usable correct letter to validate against
  }
  char orig_letter = static_cast<char>(std::toupper(static_cast<unsigned char>((*cot.predicted)[0])));
  auto correct_text = mcq::option_text_for(original_options, orig_letter);
  if (!correct_text) return std::nullopt;

  std::string question_block =
      question + "\n\nOriginal solution:\n" + cot.solution + "\n\\boxed{" + *cot.predicted + "}";
  GenerationRequest req =
      make_request("distractor_rewrite", {{"question", question_block}}, std::nullopt,
                   cfg_.sampling_temperature, seed);
  GenerationResponse resp;
  try {
    resp = generate(req);
  } catch (const BackendError&) {
    return std::nullopt;
  }

  // validation: <question> block with exactly A..J options, the original
  // correct option text still present, and the boxed letter pointing at it
  auto qb = resp.text.find("<question>");
  auto qe = resp.text.find("</question>");
  if (qb == std::string::npos || qe == std::string::npos || qe < qb) return std::nullopt;
  std::string new_question(
      trim(std::string_view(resp.text).substr(qb + 10, qe - qb - 10)));
  auto new_options = mcq::detect_options(new_question);
  if (new_options.size() != 10) return std::nullopt;
  auto new_letter = mcq::letter_for_text(new_options, *correct_text);
  if (!new_letter) return std::nullopt;

  auto parsed = parse_training_text(resp.text.substr(qe));
  if (!parsed || !parsed->predicted || parsed->predicted->size() != 1) return std::nullopt;
  char boxed = static_cast<char>(std::toupper(static_cast<unsigned char>((*parsed->predicted)[0])));
  if (boxed != *new_letter) return std::nullopt;

  Rewrite rw;
  rw.question = std::move(new_question);
  rw.cot.solution = parsed->solution;
  rw.cot.predicted = std::string(1, *new_letter);
  return rw;
}

std::size_t Client::requests_issued(const std::string& template_id) const {
  std::lock_guard<std::mutex> lock(counter_mutex_);
  auto it = issued_.find(template_id);
  return it == issued_.end() ? 0 : it->second;
}

void Client::reset_counters() {
  std::lock_guard<std::mutex> lock(counter_mutex_);
  issued_.clear();
  backend_calls_ = 0;
  retries_ = 0;
}

}  // namespace vlcot::gen
