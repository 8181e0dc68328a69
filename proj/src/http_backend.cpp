// Chat-completion wire protocol. Kept in its own TU because httplib pulls in
// a lot of platform headers.

#include <cstdlib>
#include <fstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "vlcot/error.hpp"
#include "vlcot/genclient.hpp"

namespace vlcot::gen {

namespace {

std::string base64_encode(const std::string& bytes) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < bytes.size()) {
    std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                      (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                      static_cast<unsigned char>(bytes[i + 2]);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
    i += 3;
  }
  if (i + 1 == bytes.size()) {
    std::uint32_t v = static_cast<unsigned char>(bytes[i]) << 16;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == bytes.size()) {
    std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                      (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out += "=";
  }
  return out;
}

std::string mime_for(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == "jpg" || ext == "jpeg") return "image/jpeg";
  if (ext == "webp") return "image/webp";
  return "image/png";
}

std::string data_uri_for(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read image for upload: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return "data:" + mime_for(path) + ";base64," + base64_encode(bytes);
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.base_url.empty()) throw UsageError("http backend needs a base URL");
}

HttpBackend::~HttpBackend() = default;

GenerationResponse HttpBackend::complete(const GenerationRequest& req) {
  if (req.assistant_prefill && !cfg_.assume_prefill) {
    throw BackendError("backend '" + name() + "' lacks the assistant-prefill capability");
  }

  nlohmann::json content = nlohmann::json::array();
  for (const auto& p : req.parts) {
    if (const auto* t = std::get_if<TextPart>(&p)) {
      content.push_back({{"type", "text"}, {"text", t->text}});
    } else if (const auto* im = std::get_if<ImagePart>(&p)) {
      content.push_back(
          {{"type", "image_url"}, {"image_url", {{"url", data_uri_for(im->path)}}}});
    }
  }
  nlohmann::json body;
  body["model"] = cfg_.model;
  body["messages"] = nlohmann::json::array();
  body["messages"].push_back({{"role", "user"}, {"content", content}});
  if (req.assistant_prefill) {
    body["messages"].push_back({{"role", "assistant"}, {"content", *req.assistant_prefill}});
    body["continue_final_message"] = true;
    body["add_generation_prompt"] = false;
  }
  body["temperature"] = req.temperature;
  body["max_tokens"] = req.max_new_tokens;
  if (req.seed) body["seed"] = *req.seed;

  httplib::Client cli(cfg_.base_url);
  cli.set_connection_timeout(cfg_.connect_timeout_s, 0);
  cli.set_read_timeout(cfg_.read_timeout_s, 0);
  httplib::Headers headers;
  if (!cfg_.auth_env.empty()) {
    const char* token = std::getenv(cfg_.auth_env.c_str());
    if (token && *token) headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  auto res = cli.Post(cfg_.path, headers, body.dump(), "application/json");
  if (!res) {
    throw TransientBackendFailure("connection failure to " + cfg_.base_url);
  }
  if (res->status >= 500 || res->status == 429) {
    throw TransientBackendFailure("server returned status " + std::to_string(res->status));
  }
  if (res->status != 200) {
    std::string detail = res->body.substr(0, 300);
    if (detail.find("context") != std::string::npos &&
        detail.find("length") != std::string::npos) {
      throw BackendError("context-length rejection: " + detail);
    }
    throw BackendError("server returned status " + std::to_string(res->status) + ": " + detail);
  }

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(res->body);
  } catch (const std::exception& e) {
    throw BackendError(std::string("unparseable completion response: ") + e.what());
  }
  GenerationResponse out;
  try {
    const auto& choice = j.at("choices").at(0);
    out.text = choice.at("message").at("content").get<std::string>();
    std::string fr = choice.value("finish_reason", "stop");
    out.finish_reason = fr == "length" ? FinishReason::length : FinishReason::stop;
    if (j.contains("usage")) {
      out.prompt_tokens = j["usage"].value("prompt_tokens", 0ULL);
      out.completion_tokens = j["usage"].value("completion_tokens", 0ULL);
    }
  } catch (const std::exception& e) {
    throw BackendError(std::string("unexpected completion response shape: ") + e.what());
  }
  return out;
}

}  // namespace vlcot::gen
