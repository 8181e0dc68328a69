#include "vlcot/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vlcot/error.hpp"

namespace vlcot {

using ordered_json = nlohmann::ordered_json;

Schema schema_from_string(const std::string& s) {
  if (s == "vl") return Schema::vl;
  if (s == "text-only") return Schema::text_only;
  throw UsageError("unknown schema '" + s + "' (expected vl or text-only)");
}

std::string to_string(Schema s) { return s == Schema::vl ? "vl" : "text-only"; }

std::size_t LoadReport::error_count() const {
  return static_cast<std::size_t>(
      std::count_if(issues.begin(), issues.end(), [](const LoadIssue& i) {
        return i.severity == LoadIssue::Severity::error;
      }));
}

std::size_t LoadReport::warning_count() const { return issues.size() - error_count(); }

namespace {

// Field order is part of the file format; keep in sync with
// record_from_json_line and the README schema table.
ordered_json record_to_json(const CurationRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  if (r.image_ref) j["image_ref"] = *r.image_ref;
  j["question"] = r.question;
  if (r.ground_truth) j["ground_truth"] = *r.ground_truth;
  if (r.cot) {
    ordered_json c;
    if (r.cot->caption) c["caption"] = *r.cot->caption;
    c["solution"] = r.cot->solution;
    if (r.cot->predicted) c["predicted"] = *r.cot->predicted;
    j["cot"] = std::move(c);
  }
  j["source"] = r.source;
  if (!r.meta.empty()) j["meta"] = r.meta;  // std::map iterates sorted
  return j;
}

CurationRecord record_from_json(const ordered_json& j) {
  if (!j.is_object()) throw DataError("record is not a JSON object");
  CurationRecord r;
  if (!j.contains("id") || !j["id"].is_string()) throw DataError("record missing id");
  r.id = j["id"].get<std::string>();
  if (j.contains("image_ref")) r.image_ref = j["image_ref"].get<std::string>();
  if (!j.contains("question") || !j["question"].is_string())
    throw DataError("record " + r.id + " missing question");
  r.question = j["question"].get<std::string>();
  if (j.contains("ground_truth")) r.ground_truth = j["ground_truth"].get<std::string>();
  if (j.contains("cot")) {
    const auto& c = j["cot"];
    ChainOfThought cot;
    if (c.contains("caption")) cot.caption = c["caption"].get<std::string>();
    if (!c.contains("solution")) throw DataError("record " + r.id + " cot missing solution");
    cot.solution = c["solution"].get<std::string>();
    if (c.contains("predicted")) cot.predicted = c["predicted"].get<std::string>();
    r.cot = std::move(cot);
  }
  if (j.contains("source")) r.source = j["source"].get<std::string>();
  if (j.contains("meta")) {
    for (const auto& [k, v] : j["meta"].items()) r.meta[k] = v.get<std::string>();
  }
  return r;
}

ordered_json manifest_to_json(const PipelineManifest& m) {
  ordered_json j;
  j["stages"] = ordered_json::array();
  for (const auto& s : m.stages) {
    ordered_json e;
    e["name"] = s.name;
    e["parameters"] = s.parameters;
    e["global_seed"] = s.global_seed;
    e["count_in"] = s.count_in;
    e["count_out"] = s.count_out;
    e["timestamp"] = s.timestamp;
    j["stages"].push_back(std::move(e));
  }
  return j;
}

}  // namespace

std::string record_to_json_line(const CurationRecord& r) { return record_to_json(r).dump(); }

CurationRecord record_from_json_line(const std::string& line) {
  ordered_json j = ordered_json::parse(line);
  return record_from_json(j);
}

Dataset load_dataset(const std::filesystem::path& path, Schema schema, LoadReport* report) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;

  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path.string());

  Dataset d;
  std::set<std::string> seen_ids;
  std::size_t line_no = 0;
  std::size_t missing_images = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    CurationRecord r;
    try {
      r = record_from_json_line(line);
    } catch (const std::exception& e) {
      rep.issues.push_back({LoadIssue::Severity::error, line_no,
                            std::string("malformed record: ") + e.what()});
      continue;
    }
    if (schema == Schema::text_only && r.image_ref) {
      rep.issues.push_back({LoadIssue::Severity::error, line_no,
                            "record " + r.id + " carries image_ref in a text-only dataset"});
      continue;
    }
    if (!seen_ids.insert(r.id).second) {
      rep.issues.push_back(
          {LoadIssue::Severity::error, line_no, "duplicate record id: " + r.id});
      continue;
    }
    if (r.image_ref) {
      std::filesystem::path img(*r.image_ref);
      if (img.is_relative()) img = path.parent_path() / img;
      if (!std::filesystem::exists(img)) {
        ++missing_images;
        rep.issues.push_back({LoadIssue::Severity::warning, line_no,
                              "image_ref does not exist: " + *r.image_ref});
      }
    }
    d.records.push_back(std::move(r));
  }

  if (!report && rep.error_count() > 0) {
    std::ostringstream msg;
    msg << rep.error_count() << " malformed record(s) in " << path.string();
    for (const auto& i : rep.issues) {
      if (i.severity == LoadIssue::Severity::error)
        msg << "\n  line " << i.line_no << ": " << i.message;
    }
    throw DataError(msg.str());
  }

  sort_and_check_ids(d);

  StageEntry load;
  load.name = "load";
  load.parameters["path"] = path.filename().string();
  load.parameters["schema"] = to_string(schema);
  load.parameters["malformed_lines"] = std::to_string(rep.error_count());
  load.parameters["missing_images"] = std::to_string(missing_images);
  load.count_in = line_no;
  load.count_out = d.records.size();
  load.timestamp = now_iso8601();
  d.manifest.add_stage(std::move(load));
  return d;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  auto parent = path.parent_path();
  if (!parent.empty() && !std::filesystem::exists(parent)) {
    throw DataError("parent directory does not exist: " + parent.string());
  }

  std::vector<const CurationRecord*> order;
  order.reserve(d.records.size());
  for (const auto& r : d.records) order.push_back(&r);
  std::sort(order.begin(), order.end(),
            [](const CurationRecord* a, const CurationRecord* b) { return a->id < b->id; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i]->id == order[i - 1]->id)
      throw DataError("duplicate record id: " + order[i]->id);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write dataset file: " + path.string());
  for (const CurationRecord* r : order) {
    out << record_to_json_line(*r) << '\n';
  }
  out.flush();
  if (!out) throw DataError("I/O failure writing " + path.string());

  save_manifest(d.manifest, manifest_path_for(path));
}

std::filesystem::path manifest_path_for(const std::filesystem::path& dataset_path) {
  return dataset_path.string() + ".manifest.json";
}

void save_manifest(const PipelineManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write manifest: " + path.string());
  out << manifest_to_json(m).dump(2) << '\n';
}

PipelineManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path.string());
  ordered_json j;
  in >> j;
  PipelineManifest m;
  for (const auto& e : j.at("stages")) {
    StageEntry s;
    s.name = e.at("name").get<std::string>();
    if (e.contains("parameters")) {
      for (const auto& [k, v] : e["parameters"].items()) s.parameters[k] = v.get<std::string>();
    }
    s.global_seed = e.value("global_seed", 0ULL);
    s.count_in = e.value("count_in", 0ULL);
    s.count_out = e.value("count_out", 0ULL);
    s.timestamp = e.value("timestamp", std::string{});
    m.stages.push_back(std::move(s));
  }
  return m;
}

}  // namespace vlcot
