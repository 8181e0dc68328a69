#include "vlcot/dedup.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "vlcot/error.hpp"
#include "vlcot/parallel.hpp"

namespace vlcot::dedup {

std::string DecontaminationReport::to_json() const {
  nlohmann::ordered_json j;
  j["removed_ids"] = removed_ids;
  j["undecodable_ids"] = undecodable_ids;
  j["matches"] = nlohmann::ordered_json::array();
  for (const auto& [id, eval_ref] : matches) {
    j["matches"].push_back({{"id", id}, {"eval_ref", eval_ref}});
  }
  return j.dump(2);
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& root, const std::string& ref) {
  std::filesystem::path p(ref);
  if (p.is_relative() && !root.empty()) return root / p;
  return p;
}

}  // namespace

Dataset decontaminate(const Dataset& d, const std::vector<std::filesystem::path>& eval_images,
                      const DecontaminateOptions& opts, DecontaminationReport* report) {
  // eval hashes; any undecodable eval image is a hard error (pre-condition)
  std::vector<PerceptualHash> eval_hashes(eval_images.size());
  parallel_for(eval_images.size(),
               [&](std::size_t i) { eval_hashes[i] = phash(load_image(eval_images[i])); });
  std::multimap<std::uint64_t, std::size_t> eval_by_bits;
  for (std::size_t i = 0; i < eval_hashes.size(); ++i) {
    eval_by_bits.emplace(eval_hashes[i].bits, i);
  }

  // hash each unique training image once
  std::set<std::string> ref_set;
  for (const auto& r : d.records) {
    if (r.image_ref) ref_set.insert(*r.image_ref);
  }
  std::vector<std::string> refs(ref_set.begin(), ref_set.end());
  struct RefHash {
    bool decodable = false;
    PerceptualHash hash;
  };
  std::vector<RefHash> ref_hashes(refs.size());
  parallel_for(refs.size(), [&](std::size_t i) {
    try {
      ref_hashes[i] = {true, phash(load_image(resolve(opts.image_root, refs[i])))};
    } catch (const DataError&) {
      ref_hashes[i].decodable = false;
    }
  });
  std::map<std::string, RefHash> by_ref;
  for (std::size_t i = 0; i < refs.size(); ++i) by_ref[refs[i]] = ref_hashes[i];

  auto match_eval = [&](const PerceptualHash& h) -> std::optional<std::size_t> {
    if (opts.max_distance == 0) {
      auto it = eval_by_bits.find(h.bits);
      if (it != eval_by_bits.end()) return it->second;
      return std::nullopt;
    }
    for (std::size_t i = 0; i < eval_hashes.size(); ++i) {
      if (hamming(h, eval_hashes[i]) <= opts.max_distance) return i;
    }
    return std::nullopt;
  };

  DecontaminationReport local;
  DecontaminationReport& rep = report ? *report : local;
  Dataset out;
  out.manifest = d.manifest;
  for (const auto& r : d.records) {
    if (!r.image_ref) {
      out.records.push_back(r);
      continue;
    }
    const RefHash& rh = by_ref.at(*r.image_ref);
    if (!rh.decodable) {
      rep.undecodable_ids.push_back(r.id);
      continue;
    }
    if (auto hit = match_eval(rh.hash)) {
      rep.removed_ids.push_back(r.id);
      rep.matches.emplace_back(r.id, eval_images[*hit].string());
      continue;
    }
    out.records.push_back(r);
  }
  sort_and_check_ids(out);
  std::sort(rep.removed_ids.begin(), rep.removed_ids.end());
  std::sort(rep.undecodable_ids.begin(), rep.undecodable_ids.end());
  std::sort(rep.matches.begin(), rep.matches.end());

  StageEntry e;
  e.name = "decontaminate";
  e.parameters["eval_images"] = std::to_string(eval_images.size());
  e.parameters["max_distance"] = std::to_string(opts.max_distance);
  e.parameters["removed"] = std::to_string(rep.removed_ids.size());
  e.parameters["undecodable"] = std::to_string(rep.undecodable_ids.size());
  {
    std::string ids;
    for (const auto& id : rep.removed_ids) {
      if (!ids.empty()) ids += ",";
      ids += id;
    }
    e.parameters["removed_ids"] = ids;
  }
  e.count_in = d.records.size();
  e.count_out = out.records.size();
  e.timestamp = now_iso8601();
  out.manifest.add_stage(std::move(e));
  return out;
}

}  // namespace vlcot::dedup
