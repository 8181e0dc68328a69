#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vlcot {

// Structured chain-of-thought: optional caption segment, solution body and
// the answer extracted from the final boxed expression (absent when the
// generation carried no box).
struct ChainOfThought {
  std::optional<std::string> caption;
  std::string solution;
  std::optional<std::string> predicted;

  bool operator==(const ChainOfThought&) const = default;
};

// One (image, question, answer, CoT, provenance) instance. image_ref absent
// marks a text-only record; such records never enter image-dependent stages.
struct CurationRecord {
  std::string id;
  std::optional<std::string> image_ref;
  std::string question;
  std::optional<std::string> ground_truth;
  std::optional<ChainOfThought> cot;
  std::string source;
  std::map<std::string, std::string> meta;

  bool is_text_only() const { return !image_ref.has_value(); }

  bool operator==(const CurationRecord&) const = default;
};

struct StageEntry {
  std::string name;
  std::map<std::string, std::string> parameters;
  std::uint64_t global_seed = 0;
  std::size_t count_in = 0;
  std::size_t count_out = 0;
  std::string timestamp;  // ISO-8601 UTC; empty in deterministic test runs

  bool operator==(const StageEntry&) const = default;
};

// Ordered log of every stage a dataset went through: parameters, seeds and
// in/out counts. Saved as a sidecar JSON next to the JSONL file.
struct PipelineManifest {
  std::vector<StageEntry> stages;

  void add_stage(StageEntry e) { stages.push_back(std::move(e)); }

  bool operator==(const PipelineManifest&) const = default;
};

struct Dataset {
  std::vector<CurationRecord> records;
  PipelineManifest manifest;

  std::size_t size() const { return records.size(); }

  bool operator==(const Dataset&) const = default;
};

// Stable content-derived record id: <source>-<16 hex digits of fnv1a64>.
std::string make_record_id(const std::string& source, std::size_t original_index);

// Sorts records by id and verifies uniqueness (throws DataError on duplicates).
void sort_and_check_ids(Dataset& d);

// Current UTC time as ISO-8601, or "" when VLCOT_FIXED_TIME is set (used to
// keep manifests byte-stable in tests).
std::string now_iso8601();

}  // namespace vlcot
