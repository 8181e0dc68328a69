#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vlcot/genclient.hpp"
#include "vlcot/record.hpp"

namespace vlcot::tts {

enum class Mode { naive, shared };
Mode mode_from_string(const std::string& s);
std::string to_string(Mode m);

struct AttemptLog {
  int attempt_index = 0;              // 1-based
  std::size_t caption_tokens = 0;     // 0 whenever the caption is reused
  std::size_t solution_tokens = 0;
  std::optional<std::string> answer;  // absent on generation failure / no box
};

struct QuestionRun {
  std::string id;
  std::optional<std::string> ground_truth;
  std::vector<AttemptLog> attempts;
};

struct CurvePoint {
  int k = 0;
  std::size_t tokens = 0;   // summed over all questions
  double accuracy = 0.0;    // majority answer vs ground truth
};

struct TTSReport {
  Mode mode = Mode::naive;
  std::vector<QuestionRun> runs;
  std::vector<CurvePoint> curve;

  std::string to_csv() const;   // k,tokens,accuracy
  std::string to_json() const;  // summary
};

// n independent full-CoT samples. The whole completion counts as solution
// tokens (there is no caption to reuse in this mode).
QuestionRun naive_tts(gen::Client& client, const std::optional<std::string>& image_path,
                      const std::string& question, int n, double temperature,
                      std::uint64_t seed);

// Attempt 1 generates caption+solution in one completion; its token count is
// split between the parsed parts pro rata by whitespace tokens. Attempts
// 2..n prefill "<caption> {caption} </caption>\n" so the backend generates
// only the solution. Requires a backend with assistant-prefill support.
QuestionRun shared_caption_tts(gen::Client& client, const std::optional<std::string>& image_path,
                               const std::string& question, int n, double temperature,
                               std::uint64_t seed);

// Cumulative token totals per attempt count k (1-based; totals[k-1] is the
// cost of the first k attempts). naive: sum of caption+solution per attempt;
// shared: caption of attempt 1 plus solutions.
std::vector<std::size_t> token_totals(const std::vector<AttemptLog>& logs, Mode mode);

// 1 - shared/naive at a given k.
double token_reduction(std::size_t naive_total, std::size_t shared_total);

struct CurveOptions {
  int n = 64;
  double temperature = 0.7;
  Mode mode = Mode::naive;
  std::uint64_t seed = 0;
  std::filesystem::path image_root;
};

// Per k in 1..n: plurality vote over the first k answers of each question,
// accuracy against ground truth, cumulative tokens. Questions run in
// parallel.
TTSReport tts_curve(const Dataset& eval_set, gen::Client& client, const CurveOptions& opts);

}  // namespace vlcot::tts
