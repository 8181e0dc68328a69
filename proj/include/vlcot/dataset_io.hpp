#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vlcot/record.hpp"

namespace vlcot {

enum class Schema { vl, text_only };

Schema schema_from_string(const std::string& s);
std::string to_string(Schema s);

struct LoadIssue {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::size_t line_no = 0;  // 1-based; 0 for file-level issues
  std::string message;
};

struct LoadReport {
  std::vector<LoadIssue> issues;

  std::size_t error_count() const;
  std::size_t warning_count() const;
};

// Reads one JSON record per line. Malformed lines are collected into the
// report (and excluded from the result); when no report sink is given, any
// error-severity issue throws instead. Missing image files are warnings and
// end up counted in the manifest's "load" stage.
Dataset load_dataset(const std::filesystem::path& path, Schema schema,
                     LoadReport* report = nullptr);

// Deterministic bytes: records sorted by id, fixed field order, UTF-8, one
// '\n' per record. Also writes the sidecar manifest to
// "<path>.manifest.json".
void save_dataset(const Dataset& d, const std::filesystem::path& path);

// Single-record (de)serialization used by both the file format and tests.
std::string record_to_json_line(const CurationRecord& r);
CurationRecord record_from_json_line(const std::string& line);

std::filesystem::path manifest_path_for(const std::filesystem::path& dataset_path);
void save_manifest(const PipelineManifest& m, const std::filesystem::path& path);
PipelineManifest load_manifest(const std::filesystem::path& path);

}  // namespace vlcot
