#pragma once

#include <optional>
#include <string>

#include "vlcot/record.hpp"

namespace vlcot {

// Renders the exact training text for a record. Template (frozen; golden
// files depend on it):
//
//   <caption> {caption} </caption>      (only when caption present)
//   <think>
//   {solution}
//   </think>
//   \boxed{predicted}
//
// Blocks are joined by exactly one '\n'; the boxed answer is the final line;
// no trailing newline. Throws DataError when cot or cot->predicted is absent.
std::string render_training_text(const CurationRecord& r);

// Inverse of render_training_text: splits a rendered CoT back into
// (caption, solution, predicted). Tolerates surrounding whitespace and a
// "$$"-wrapped box. Returns nullopt when there is no <think> block.
std::optional<ChainOfThought> parse_training_text(const std::string& text);

}  // namespace vlcot
