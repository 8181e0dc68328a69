#include "vlcot/tts.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vlcot/answer.hpp"
#include "vlcot/error.hpp"
#include "vlcot/rng.hpp"
#include "vlcot/text.hpp"
#include "vlcot/training_text.hpp"

namespace vlcot::tts {

Mode mode_from_string(const std::string& s) {
  if (s == "naive") return Mode::naive;
  if (s == "shared") return Mode::shared;
  throw UsageError("unknown tts mode '" + s + "' (expected naive or shared)");
}

std::string to_string(Mode m) { return m == Mode::naive ? "naive" : "shared"; }

namespace {

std::optional<std::string> answer_of(const std::string& completion) {
  try {
    return verify::try_extract_boxed(completion);
  } catch (const DataError&) {
    return std::nullopt;  // unbalanced braces count as no answer
  }
}

}  // namespace

QuestionRun naive_tts(gen::Client& client, const std::optional<std::string>& image_path,
                      const std::string& question, int n, double temperature,
                      std::uint64_t seed) {
  if (n < 1) throw UsageError("tts needs n >= 1");
  std::vector<gen::GenerationRequest> reqs;
  reqs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    reqs.push_back(client.make_request("cot_gen", {{"question", question}}, image_path,
                                       temperature,
                                       derive_seed(seed, question, static_cast<std::uint64_t>(i))));
  }
  auto resps = client.try_generate_batch(reqs);
  QuestionRun run;
  for (int i = 0; i < n; ++i) {
    AttemptLog log;
    log.attempt_index = i + 1;
    if (const auto& resp = resps[static_cast<std::size_t>(i)]) {
      log.solution_tokens = resp->completion_tokens;
      log.answer = answer_of(resp->text);
    }
    // a failed attempt stays in the log with answer absent
    run.attempts.push_back(std::move(log));
  }
  return run;
}

QuestionRun shared_caption_tts(gen::Client& client, const std::optional<std::string>& image_path,
                               const std::string& question, int n, double temperature,
                               std::uint64_t seed) {
  if (n < 1) throw UsageError("tts needs n >= 1");
  if (!client.supports_prefill()) {
    throw BackendError(
        "shared-caption decoding requires the assistant-prefill capability, which this "
        "backend does not support");
  }

  QuestionRun run;
  gen::GenerationRequest first = client.make_request(
      "cot_gen", {{"question", question}}, image_path, temperature,
      derive_seed(seed, question, 0));
  std::optional<std::string> caption;
  {
    AttemptLog log;
    log.attempt_index = 1;
    try {
      gen::GenerationResponse resp = client.generate(first);
      log.answer = answer_of(resp.text);
      if (auto parsed = parse_training_text(resp.text); parsed && parsed->caption) {
        caption = parsed->caption;
        // the backend reports one combined count; attribute the caption
        // segment (tags included) by whitespace tokens and leave the rest to
        // the solution
        std::size_t cap_seg =
            whitespace_token_count("<caption> " + *caption + " </caption>");
        log.caption_tokens = std::min(cap_seg, resp.completion_tokens);
        log.solution_tokens = resp.completion_tokens - log.caption_tokens;
      } else {
        log.solution_tokens = resp.completion_tokens;  // no caption emitted
      }
    } catch (const std::exception&) {
      // failed first attempt: nothing to share, later attempts are not issued
    }
    run.attempts.push_back(std::move(log));
  }

  if (!caption) {
    for (int i = 2; i <= n; ++i) run.attempts.push_back({i, 0, 0, std::nullopt});
    return run;
  }

  std::vector<gen::GenerationRequest> rest;
  rest.reserve(static_cast<std::size_t>(n - 1));
  for (int i = 1; i < n; ++i) {
    gen::GenerationRequest req = client.make_request(
        "cot_gen", {{"question", question}}, image_path, temperature,
        derive_seed(seed, question, static_cast<std::uint64_t>(i)));
    req.assistant_prefill = "<caption> " + *caption + " </caption>\n";
    rest.push_back(std::move(req));
  }
  auto resps = client.try_generate_batch(rest);
  for (int i = 0; i < n - 1; ++i) {
    AttemptLog log;
    log.attempt_index = i + 2;
    if (const auto& resp = resps[static_cast<std::size_t>(i)]) {
      log.solution_tokens = resp->completion_tokens;
      log.answer = answer_of(resp->text);
    }
    run.attempts.push_back(std::move(log));
  }
  return run;
}

std::vector<std::size_t> token_totals(const std::vector<AttemptLog>& logs, Mode mode) {
  std::vector<std::size_t> totals;
  totals.reserve(logs.size());
  std::size_t acc = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    if (mode == Mode::naive) {
      acc += logs[i].caption_tokens + logs[i].solution_tokens;
    } else {
      if (i == 0) acc += logs[i].caption_tokens;  // caption paid once
      acc += logs[i].solution_tokens;
    }
    totals.push_back(acc);
  }
  return totals;
}

double token_reduction(std::size_t naive_total, std::size_t shared_total) {
  if (naive_total == 0) return 0.0;
  return 1.0 - static_cast<double>(shared_total) / static_cast<double>(naive_total);
}

TTSReport tts_curve(const Dataset& eval_set, gen::Client& client, const CurveOptions& opts) {
  for (const auto& r : eval_set.records) {
    if (!r.ground_truth)
      throw DataError("tts-eval: record " + r.id + " lacks ground_truth");
  }

  TTSReport report;
  report.mode = opts.mode;
  // questions sequential, attempts within a question go through the client's
  // bounded pool
  for (const auto& r : eval_set.records) {
    std::optional<std::string> image;
    if (r.image_ref) {
      std::filesystem::path p(*r.image_ref);
      if (p.is_relative() && !opts.image_root.empty()) p = opts.image_root / p;
      image = p.string();
    }
    std::uint64_t seed = derive_seed(opts.seed, r.id);
    QuestionRun run = opts.mode == Mode::naive
                          ? naive_tts(client, image, r.question, opts.n, opts.temperature, seed)
                          : shared_caption_tts(client, image, r.question, opts.n,
                                               opts.temperature, seed);
    run.id = r.id;
    run.ground_truth = r.ground_truth;
    report.runs.push_back(std::move(run));
  }

  for (int k = 1; k <= opts.n; ++k) {
    CurvePoint pt;
    pt.k = k;
    std::size_t correct = 0;
    for (const auto& run : report.runs) {
      auto totals = token_totals(run.attempts, opts.mode);
      pt.tokens += totals[static_cast<std::size_t>(k - 1)];
      std::vector<std::string> answers;
      for (int i = 0; i < k; ++i) {
        const auto& a = run.attempts[static_cast<std::size_t>(i)].answer;
        if (a) answers.push_back(*a);
      }
      auto vote = verify::plurality_vote(answers);
      if (vote && run.ground_truth && verify::answers_equivalent(*vote, *run.ground_truth)) {
        ++correct;
      }
    }
    pt.accuracy = report.runs.empty()
                      ? 0.0
                      : static_cast<double>(correct) / static_cast<double>(report.runs.size());
    report.curve.push_back(pt);
  }
  return report;
}

std::string TTSReport::to_csv() const {
  std::ostringstream os;
  os << "k,tokens,accuracy\n";
  for (const auto& pt : curve) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%d,%zu,%.6f\n", pt.k, pt.tokens, pt.accuracy);
    os << buf;
  }
  return os.str();
}

std::string TTSReport::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = tts::to_string(mode);
  j["questions"] = runs.size();
  j["attempts_per_question"] = curve.empty() ? 0 : curve.back().k;
  if (!curve.empty()) {
    j["final_tokens"] = curve.back().tokens;
    j["final_accuracy"] = curve.back().accuracy;
  }
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  for (const auto& pt : curve) {
    pts.push_back({{"k", pt.k}, {"tokens", pt.tokens}, {"accuracy", pt.accuracy}});
  }
  j["curve"] = std::move(pts);
  return j.dump(2);
}

}  // namespace vlcot::tts
