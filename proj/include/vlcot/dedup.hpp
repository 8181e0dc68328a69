#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vlcot/phash.hpp"
#include "vlcot/record.hpp"

namespace vlcot::dedup {

struct DecontaminationReport {
  std::vector<std::string> removed_ids;       // hash matched an eval image
  std::vector<std::string> undecodable_ids;   // training image failed to decode
  // removed id -> eval image it collided with
  std::vector<std::pair<std::string, std::string>> matches;

  std::string to_json() const;
};

struct DecontaminateOptions {
  int max_distance = 0;  // 0 = exact-hash removal, per the frozen default
  // Base directory against which relative image_refs resolve.
  std::filesystem::path image_root;
};

// Removes every VL record whose image hash is within max_distance of any
// eval-image hash. Text-only records pass through untouched; undecodable
// training images are removed and reported in their own category. Hashing is
// a parallel map over unique image refs; output order is by id, so the
// result is independent of record order and idempotent.
Dataset decontaminate(const Dataset& d,
                      const std::vector<std::filesystem::path>& eval_images,
                      const DecontaminateOptions& opts = {},
                      DecontaminationReport* report = nullptr);

}  // namespace vlcot::dedup
