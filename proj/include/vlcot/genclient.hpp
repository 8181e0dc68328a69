#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vlcot/prompts.hpp"
#include "vlcot/record.hpp"

namespace vlcot::gen {

struct TextPart {
  std::string text;
};
struct ImagePart {
  std::string path;  // resolved on dispatch; encoded as a base64 data URI on the wire
};
using Part = std::variant<TextPart, ImagePart>;

struct GenerationRequest {
  std::vector<Part> parts;  // at most one ImagePart (single-image scope)
  double temperature = 0.0;
  int max_new_tokens = 2048;
  std::optional<std::uint64_t> seed;
  std::string template_id;
  // When set, the backend must continue this assistant-message prefix
  // (shared-caption decoding). Backends without the capability hard-error.
  std::optional<std::string> assistant_prefill;

  std::string prompt_text() const;  // concatenated text parts
  std::uint64_t content_hash() const;
};

enum class FinishReason { stop, length, error };

struct GenerationResponse {
  std::string text;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  FinishReason finish_reason = FinishReason::stop;
};

class Backend {
 public:
  virtual ~Backend() = default;
  // One completion; transient failures throw TransientBackendFailure (the
  // client retries), permanent ones throw BackendError.
  virtual GenerationResponse complete(const GenerationRequest& req) = 0;
  virtual bool supports_prefill() const = 0;
  virtual std::string name() const = 0;
};

struct TransientBackendFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scriptable deterministic backend. Handlers are matched by template_id
// first; the fallback handler (if any) sees everything else; without any
// handler the builtin synthesizer answers (deterministic in the request's
// content hash, seed and temperature). Token counts equal whitespace token
// counts of the produced text.
class MockBackend : public Backend {
 public:
  using Handler = std::function<GenerationResponse(const GenerationRequest&)>;

  MockBackend() = default;

  void on_template(const std::string& template_id, Handler h);
  void set_fallback(Handler h);
  void fail_next(int n_transient_failures);  // inject transient errors
  void set_latency_jitter(std::uint64_t seed, int max_millis);  // sleep 0..max per call
  void set_prefill_support(bool on) { prefill_ = on; }

  GenerationResponse complete(const GenerationRequest& req) override;
  bool supports_prefill() const override { return prefill_; }
  std::string name() const override { return "mock"; }

  // Deterministic canned completion used when no handler matches.
  static GenerationResponse synthesize(const GenerationRequest& req);

 private:
  std::map<std::string, Handler> handlers_;
  Handler fallback_;
  std::atomic<int> failures_to_inject_{0};
  bool prefill_ = true;
  bool jitter_ = false;
  std::uint64_t jitter_seed_ = 0;
  int jitter_max_ms_ = 0;
};

struct HttpBackendConfig {
  std::string base_url;          // e.g. http://localhost:8000
  std::string path = "/v1/chat/completions";
  std::string model = "default";
  std::string auth_env;          // env var holding the bearer token; empty = none
  bool assume_prefill = false;   // server supports continuing the final assistant msg
  int connect_timeout_s = 10;
  int read_timeout_s = 300;
};

// Chat-completion client over HTTP. Images ride as base64 PNG data URIs in
// the user message content array; prefill is an assistant message plus
// "continue_final_message": true.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig cfg);
  ~HttpBackend() override;

  GenerationResponse complete(const GenerationRequest& req) override;
  bool supports_prefill() const override { return cfg_.assume_prefill; }
  std::string name() const override { return "http:" + cfg_.base_url; }

 private:
  HttpBackendConfig cfg_;
};

// On-disk response cache keyed by (template_id, content hash, temperature,
// seed). Writes go through a temp file + rename so concurrent readers never
// see partial entries.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<GenerationResponse> lookup(const GenerationRequest& req);
  void store(const GenerationRequest& req, const GenerationResponse& resp);

  static std::string key_for(const GenerationRequest& req);

 private:
  std::filesystem::path dir_;
  std::mutex mutex_;
  std::map<std::string, GenerationResponse> memory_;
};

struct ClientConfig {
  int max_in_flight = 4;       // M
  int max_retries = 3;         // transient-failure retries per request
  std::chrono::milliseconds backoff_base{100};
  std::optional<std::filesystem::path> cache_dir;
  double probe_temperature = 0.0;     // blind / caption-only solve
  double sampling_temperature = 0.7;  // multi-sample CoT generation
  int max_new_tokens = 2048;
};

struct QuestionBatch {
  std::vector<std::string> questions;
  bool partial = false;  // fewer than requested parsed even after one retry
};

enum class DifficultyLevel { l1, l1_5, l2, l3, l4, l4_plus, unknown };
std::string to_string(DifficultyLevel level);

// Bounded-concurrency, retry-and-cache front end over a Backend, plus the
// task-level operations (CoT / caption / question / difficulty / distractor
// generation). Shareable across threads; batch results always come back in
// submission order.
class Client {
 public:
  Client(std::shared_ptr<Backend> backend, ClientConfig cfg = {},
         PromptTemplateSet templates = PromptTemplateSet::defaults());

  GenerationResponse generate(const GenerationRequest& req);
  std::vector<GenerationResponse> generate_batch(const std::vector<GenerationRequest>& reqs);
  // Per-item failure tolerance: failed requests come back as nullopt instead
  // of aborting the batch.
  std::vector<std::optional<GenerationResponse>> try_generate_batch(
      const std::vector<GenerationRequest>& reqs);

  // solution + predicted (absent, with no-box flagged by the caller, when the
  // completion carries no \boxed{}).
  ChainOfThought generate_cot(const std::optional<std::string>& image_path,
                              const std::string& question, double temperature,
                              std::optional<std::uint64_t> seed);
  std::vector<ChainOfThought> generate_cots(const std::optional<std::string>& image_path,
                                            const std::string& question, int n,
                                            double temperature, std::uint64_t seed_base);

  std::string generate_caption(const std::string& image_path);

  // k questions parsed from a numbered list; retries once on a short parse,
  // then returns what parsed with partial=true. Zero parseable questions
  // throws BackendError.
  QuestionBatch generate_questions(const std::string& image_path,
                                   const std::string& seed_question, int k,
                                   std::uint64_t seed);

  DifficultyLevel rate_difficulty(const std::string& question);

  struct Rewrite {
    std::string question;
    ChainOfThought cot;
  };
  // Ten-option rewrite with validation (exactly A..J options, ground-truth
  // option text preserved, CoT re-boxed to the relabeled letter). Returns
  // nullopt when the completion fails validation.
  std::optional<Rewrite> rewrite_distractors(const std::string& question,
                                             const ChainOfThought& cot,
                                             std::uint64_t seed);

  GenerationRequest make_request(const std::string& template_id,
                                 const std::map<std::string, std::string>& slots,
                                 const std::optional<std::string>& image_path,
                                 double temperature,
                                 std::optional<std::uint64_t> seed) const;

  // Requests issued per template (cache hits included); reset per stage to
  // assert exact call-count expectations.
  std::size_t requests_issued(const std::string& template_id) const;
  std::size_t backend_calls() const { return backend_calls_.load(); }
  std::size_t retries_total() const { return retries_.load(); }
  void reset_counters();

  const ClientConfig& config() const { return cfg_; }
  const PromptTemplateSet& templates() const { return templates_; }
  bool supports_prefill() const { return backend_->supports_prefill(); }

 private:
  GenerationResponse dispatch_one(const GenerationRequest& req);

  std::shared_ptr<Backend> backend_;
  ClientConfig cfg_;
  PromptTemplateSet templates_;
  std::unique_ptr<ResponseCache> cache_;
  mutable std::mutex counter_mutex_;
  std::map<std::string, std::size_t> issued_;
  std::atomic<std::size_t> backend_calls_{0};
  std::atomic<std::size_t> retries_{0};
};

// Parses "1. ...\n2. ..." (also "1)" / "Q1:") into clean question strings.
std::vector<std::string> parse_numbered_questions(const std::string& completion);

DifficultyLevel parse_difficulty(const std::string& completion);

}  // namespace vlcot::gen
