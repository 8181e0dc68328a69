#include "vlcot/training_text.hpp"

#include <string>

#include "vlcot/answer.hpp"
#include "vlcot/error.hpp"
#include "vlcot/text.hpp"

namespace vlcot {

std::string render_training_text(const CurationRecord& r) {
  if (!r.cot) throw DataError("record " + r.id + " has no cot to render");
  if (!r.cot->predicted)
    throw DataError("record " + r.id + " has no predicted answer to render");
  std::string out;
  if (r.cot->caption) {
    out += "<caption> ";
    out += *r.cot->caption;
    out += " </caption>\n";
  }
  out += "<think>\n";
  out += r.cot->solution;
  out += "\n</think>\n";
  out += "\\boxed{";
  out += *r.cot->predicted;
  out += "}";
  return out;
}

std::optional<ChainOfThought> parse_training_text(const std::string& text) {
  const std::string cap_open = "<caption>";
  const std::string cap_close = "</caption>";
  const std::string think_open = "<think>";
  const std::string think_close = "</think>";

  ChainOfThought cot;
  std::size_t cursor = 0;

  std::size_t co = text.find(cap_open);
  std::size_t to = text.find(think_open);
  if (co != std::string::npos && (to == std::string::npos || co < to)) {
    std::size_t cc = text.find(cap_close, co + cap_open.size());
    if (cc == std::string::npos) return std::nullopt;
    cot.caption = std::string(
        trim(std::string_view(text).substr(co + cap_open.size(), cc - co - cap_open.size())));
    cursor = cc + cap_close.size();
    to = text.find(think_open, cursor);
  }

  if (to == std::string::npos) return std::nullopt;
  std::size_t tc = text.find(think_close, to + think_open.size());
  if (tc == std::string::npos) return std::nullopt;
  std::string_view body =
      std::string_view(text).substr(to + think_open.size(), tc - to - think_open.size());
  // strip the single framing newlines the renderer adds
  if (!body.empty() && body.front() == '\n') body.remove_prefix(1);
  if (!body.empty() && body.back() == '\n') body.remove_suffix(1);
  cot.solution = std::string(body);

  cot.predicted = verify::try_extract_boxed(text.substr(tc));
  return cot;
}

}  // namespace vlcot
