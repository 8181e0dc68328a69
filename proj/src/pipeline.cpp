#include "vlcot/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "vlcot/answer.hpp"
#include "vlcot/error.hpp"
#include "vlcot/imageops.hpp"
#include "vlcot/mcq.hpp"
#include "vlcot/parallel.hpp"
#include "vlcot/rng.hpp"
#include "vlcot/text.hpp"
#include "vlcot/training_text.hpp"

namespace vlcot::pipeline {

namespace {

StageEntry make_entry(const std::string& name, std::size_t in, std::size_t out,
                      std::uint64_t seed) {
  StageEntry e;
  e.name = name;
  e.count_in = in;
  e.count_out = out;
  e.global_seed = seed;
  e.timestamp = now_iso8601();
  return e;
}

std::string resolve_ref(const std::filesystem::path& root, const std::string& ref) {
  std::filesystem::path p(ref);
  if (p.is_relative() && !root.empty()) return (root / p).string();
  return ref;
}

// Seeded selection of exactly floor(n/2) ids out of the (sorted) id list.
std::set<std::string> pick_half(std::vector<std::string> ids, std::uint64_t seed) {
  std::sort(ids.begin(), ids.end());
  Rng rng(seed);
  rng.shuffle(ids);
  ids.resize(ids.size() / 2);
  return {ids.begin(), ids.end()};
}

std::vector<std::string> unique_image_refs(const Dataset& d) {
  std::set<std::string> refs;
  for (const auto& r : d.records) {
    if (r.image_ref) refs.insert(*r.image_ref);
  }
  return {refs.begin(), refs.end()};
}

}  // namespace

void ensure_captions(const Dataset& d, gen::Client& client, CaptionMap& captions,
                     const std::filesystem::path& image_root) {
  std::vector<std::string> missing;
  for (const auto& ref : unique_image_refs(d)) {
    if (!captions.count(ref)) missing.push_back(ref);
  }
  if (missing.empty()) return;
  std::vector<gen::GenerationRequest> reqs;
  reqs.reserve(missing.size());
  for (const auto& ref : missing) {
    reqs.push_back(client.make_request("caption_gen", {}, resolve_ref(image_root, ref),
                                       client.config().probe_temperature, std::nullopt));
  }
  std::vector<gen::GenerationResponse> resps = client.generate_batch(reqs);
  for (std::size_t i = 0; i < missing.size(); ++i) {
    std::string caption(trim(resps[i].text));
    if (caption.empty())
      throw BackendError("empty caption generated for image " + missing[i]);
    captions[missing[i]] = std::move(caption);
  }
}

CaptionMap load_captions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open captions file: " + path.string());
  nlohmann::json j;
  in >> j;
  CaptionMap m;
  for (const auto& [k, v] : j.items()) m[k] = v.get<std::string>();
  return m;
}

void save_captions(const CaptionMap& captions, const std::filesystem::path& path) {
  nlohmann::json j(captions);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write captions file: " + path.string());
  out << j.dump(2) << '\n';
}

Dataset mix_sources(const std::vector<Dataset>& datasets, std::size_t target_size,
                    std::uint64_t seed) {
  std::size_t total = 0;
  for (const auto& d : datasets) total += d.records.size();
  if (datasets.empty() || total < target_size) {
    throw DataError("mix_sources: insufficient data (" + std::to_string(total) +
                    " available, " + std::to_string(target_size) + " requested)");
  }

  const std::size_t k = datasets.size();
  std::vector<std::size_t> share(k, target_size / k);
  for (std::size_t i = 0; i < target_size % k; ++i) ++share[i];  // remainder round-robin

  // shuffle each source once; shortfalls spill to later sources in order
  std::vector<std::vector<const CurationRecord*>> shuffled(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<const CurationRecord*> recs;
    recs.reserve(datasets[i].records.size());
    for (const auto& r : datasets[i].records) recs.push_back(&r);
    std::sort(recs.begin(), recs.end(),
              [](const CurationRecord* a, const CurationRecord* b) { return a->id < b->id; });
    Rng rng(derive_seed(seed, "mix", i));
    rng.shuffle(recs);
    shuffled[i] = std::move(recs);
  }
  std::vector<std::size_t> take(k);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    take[i] = std::min(share[i], shuffled[i].size());
    assigned += take[i];
  }
  for (std::size_t i = 0; i < k && assigned < target_size; ++i) {
    std::size_t extra = std::min(shuffled[i].size() - take[i], target_size - assigned);
    take[i] += extra;
    assigned += extra;
  }

  Dataset out;
  if (!datasets.empty()) out.manifest = datasets.front().manifest;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < take[i]; ++j) out.records.push_back(*shuffled[i][j]);
  }
  sort_and_check_ids(out);

  StageEntry e = make_entry("mix-sources", total, out.records.size(), seed);
  e.parameters["sources"] = std::to_string(k);
  e.parameters["target_size"] = std::to_string(target_size);
  for (std::size_t i = 0; i < k; ++i) {
    e.parameters["take_" + std::to_string(i)] = std::to_string(take[i]);
  }
  out.manifest.add_stage(std::move(e));
  return out;
}

Dataset sample_subset(const Dataset& d, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw UsageError("sample_subset fraction must lie in (0, 1]");
  }
  std::vector<std::string> ids;
  ids.reserve(d.records.size());
  for (const auto& r : d.records) ids.push_back(r.id);
  std::sort(ids.begin(), ids.end());
  // one permutation per seed; prefixes of it give nested subsets across fractions
  Rng rng(seed);
  rng.shuffle(ids);
  std::size_t keep_n = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(d.records.size())));
  std::set<std::string> keep(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(keep_n));

  Dataset out;
  out.manifest = d.manifest;
  for (const auto& r : d.records) {
    if (keep.count(r.id)) out.records.push_back(r);
  }
  sort_and_check_ids(out);
  StageEntry e = make_entry("sample-subset", d.records.size(), out.records.size(), seed);
  e.parameters["fraction"] = std::to_string(fraction);
  out.manifest.add_stage(std::move(e));
  return out;
}

namespace {

// Shared skeleton of the two probe filters: issue one temperature-0 solve per
// VL record, drop records whose probe answer matches the ground truth.
Dataset probe_filter(const Dataset& d, gen::Client& client, const std::string& stage_name,
                     const std::string& template_id, const CaptionMap* captions) {
  for (const auto& r : d.records) {
    if (!r.image_ref) continue;
    if (!r.ground_truth)
      throw DataError(stage_name + ": record " + r.id + " lacks ground_truth");
    if (captions && !captions->count(*r.image_ref))
      throw DataError(stage_name + ": no caption for image " + *r.image_ref +
                      " (record " + r.id + ")");
  }

  std::vector<std::size_t> probe_idx;
  std::vector<gen::GenerationRequest> reqs;
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const auto& r = d.records[i];
    if (!r.image_ref) continue;  // text-only records pass through untouched
    std::map<std::string, std::string> slots = {{"question", r.question}};
    if (captions) slots["caption"] = captions->at(*r.image_ref);
    reqs.push_back(client.make_request(template_id, slots, std::nullopt,
                                       client.config().probe_temperature, std::nullopt));
    probe_idx.push_back(i);
  }

  // per-record failure tolerance: probe errors keep the record, flagged
  std::vector<std::optional<gen::GenerationResponse>> resps = client.try_generate_batch(reqs);

  Dataset out;
  out.manifest = d.manifest;
  std::size_t removed = 0, probe_failed = 0;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const auto& r = d.records[i];
    if (cursor >= probe_idx.size() || probe_idx[cursor] != i) {
      out.records.push_back(r);
      continue;
    }
    std::size_t pi = cursor++;
    if (!resps[pi]) {
      CurationRecord kept = r;
      kept.meta["probe-failed"] = "true";
      out.records.push_back(std::move(kept));
      ++probe_failed;
      continue;
    }
    auto predicted = verify::try_extract_boxed(resps[pi]->text);
    if (predicted && verify::answers_equivalent(*predicted, *r.ground_truth)) {
      ++removed;  // solvable without (full) image access: drop
    } else {
      out.records.push_back(r);
    }
  }
  sort_and_check_ids(out);

  StageEntry e = make_entry(stage_name, d.records.size(), out.records.size(), 0);
  e.parameters["removed"] = std::to_string(removed);
  e.parameters["probe_failed"] = std::to_string(probe_failed);
  double frac = d.records.empty()
                    ? 0.0
                    : static_cast<double>(removed) / static_cast<double>(d.records.size());
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", frac);
  e.parameters["removed_fraction"] = buf;
  out.manifest.add_stage(std::move(e));
  return out;
}

}  // namespace

Dataset perceptual_redundancy_filter(const Dataset& d, gen::Client& client) {
  return probe_filter(d, client, "perceptual-redundancy", "blind_solve", nullptr);
}

Dataset shallow_perception_filter(const Dataset& d, gen::Client& client,
                                  const CaptionMap& captions) {
  return probe_filter(d, client, "shallow-perception", "caption_only_solve", &captions);
}

Dataset caption_and_solve(const Dataset& d, const CaptionMap& captions) {
  Dataset out;
  out.manifest = d.manifest;
  for (const auto& r : d.records) {
    if (!r.image_ref) {
      out.records.push_back(r);
      continue;
    }
    if (!r.cot) throw DataError("caption-and-solve: record " + r.id + " has no cot");
    auto it = captions.find(*r.image_ref);
    if (it == captions.end())
      throw DataError("caption-and-solve: no caption for image " + *r.image_ref);
    CurationRecord rec = r;
    rec.cot->caption = it->second;  // replaces any previous caption (idempotent)
    out.records.push_back(std::move(rec));
  }
  StageEntry e = make_entry("caption-and-solve", d.records.size(), out.records.size(), 0);
  out.manifest.add_stage(std::move(e));
  return out;
}

Dataset augment_text_only(const Dataset& vl, const Dataset& text) {
  for (const auto& r : text.records) {
    if (r.image_ref)
      throw DataError("augment-text-only: text record " + r.id + " carries image_ref");
  }
  Dataset out;
  out.manifest = vl.manifest;
  out.records = vl.records;
  out.records.insert(out.records.end(), text.records.begin(), text.records.end());
  sort_and_check_ids(out);  // throws on id collision

  std::size_t vl_count = 0, text_count = 0;
  for (const auto& r : out.records) (r.image_ref ? vl_count : text_count)++;
  StageEntry e = make_entry("augment-text-only", vl.records.size(), out.records.size(), 0);
  e.parameters["vl_records"] = std::to_string(vl_count);
  e.parameters["text_records"] = std::to_string(text_count);
  out.manifest.add_stage(std::move(e));
  return out;
}

namespace {

std::size_t cot_length(const CurationRecord& r) {
  if (!r.cot) return 0;
  std::size_t n = whitespace_token_count(r.cot->solution);
  if (r.cot->caption) n += whitespace_token_count(*r.cot->caption);
  return n;
}

}  // namespace

Dataset length_filter(const Dataset& d) {
  for (const auto& r : d.records) {
    if (!r.cot) throw DataError("length filter: record " + r.id + " has no cot");
  }
  struct Keyed {
    std::size_t len;
    const CurationRecord* rec;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(d.records.size());
  for (const auto& r : d.records) keyed.push_back({cot_length(r), &r});
  // longest first; median ties resolved by ascending id so the cut is exact
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.len != b.len) return a.len > b.len;
    return a.rec->id < b.rec->id;
  });
  std::size_t keep_n = (d.records.size() + 1) / 2;

  Dataset out;
  out.manifest = d.manifest;
  for (std::size_t i = 0; i < keep_n; ++i) out.records.push_back(*keyed[i].rec);
  sort_and_check_ids(out);

  StageEntry e = make_entry("length-filter", d.records.size(), out.records.size(), 0);
  if (!keyed.empty()) {
    std::vector<std::size_t> lens;
    lens.reserve(keyed.size());
    for (const auto& k : keyed) lens.push_back(k.len);
    std::sort(lens.begin(), lens.end());
    std::size_t mid = lens.size() / 2;
    double median = lens.size() % 2 ? static_cast<double>(lens[mid])
                                    : 0.5 * static_cast<double>(lens[mid - 1] + lens[mid]);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", median);
    e.parameters["median_length"] = buf;
  }
  out.manifest.add_stage(std::move(e));
  return out;
}

Dataset rate_difficulty_stage(const Dataset& d, gen::Client& client) {
  std::vector<gen::GenerationRequest> reqs;
  reqs.reserve(d.records.size());
  for (const auto& r : d.records) {
    reqs.push_back(client.make_request("difficulty_rate", {{"question", r.question}},
                                       std::nullopt, client.config().probe_temperature,
                                       std::nullopt));
  }
  std::vector<gen::GenerationResponse> resps = client.generate_batch(reqs);
  Dataset out;
  out.manifest = d.manifest;
  out.records = d.records;
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    out.records[i].meta["difficulty"] = to_string(gen::parse_difficulty(resps[i].text));
  }
  StageEntry e = make_entry("rate-difficulty", d.records.size(), out.records.size(), 0);
  out.manifest.add_stage(std::move(e));
  return out;
}

Dataset difficulty_balance(const Dataset& d, std::size_t per_level_cap, std::uint64_t seed) {
  std::map<std::string, std::vector<std::string>> by_level;
  for (const auto& r : d.records) {
    auto it = r.meta.find("difficulty");
    std::string level = it == r.meta.end() ? "unknown" : it->second;
    if (level == "unknown") continue;  // excluded from balancing
    by_level[level].push_back(r.id);
  }
  std::set<std::string> keep;
  std::map<std::string, std::size_t> kept_per_level;
  for (auto& [level, ids] : by_level) {
    std::sort(ids.begin(), ids.end());
    Rng rng(derive_seed(seed, "difficulty:" + level));
    rng.shuffle(ids);
    std::size_t n = std::min(per_level_cap, ids.size());
    kept_per_level[level] = n;
    keep.insert(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n));
  }

  Dataset out;
  out.manifest = d.manifest;
  for (const auto& r : d.records) {
    if (keep.count(r.id)) out.records.push_back(r);
  }
  sort_and_check_ids(out);
  StageEntry e = make_entry("difficulty-balance", d.records.size(), out.records.size(), seed);
  e.parameters["per_level_cap"] = std::to_string(per_level_cap);
  for (const auto& [level, n] : kept_per_level) {
    e.parameters["kept_level_" + level] = std::to_string(n);
  }
  out.manifest.add_stage(std::move(e));
  return out;
}

// --- image interventions -----------------------------------------------------

namespace {

std::string sanitize_id(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return out;
}

}  // namespace

Dataset visual_perturb(const Dataset& d, const VisualPerturbOptions& opts, std::uint64_t seed) {
  if (opts.distractor_pool.empty())
    throw UsageError("visual-perturb needs a non-empty distractor pool");
  std::filesystem::create_directories(opts.output_dir);

  std::vector<std::string> vl_ids;
  for (const auto& r : d.records) {
    if (r.image_ref) vl_ids.push_back(r.id);
  }
  std::set<std::string> targets;
  if (opts.mode == ApplyMode::replace50) {
    targets = pick_half(vl_ids, derive_seed(seed, "visual-perturb"));
  } else {
    targets.insert(vl_ids.begin(), vl_ids.end());
  }

  std::vector<const CurationRecord*> work;
  for (const auto& r : d.records) {
    if (r.image_ref && targets.count(r.id)) work.push_back(&r);
  }
  struct Result {
    std::string new_ref;
    std::string spec;
  };
  std::vector<Result> results(work.size());
  std::vector<std::string> pool;
  for (const auto& ref : opts.distractor_pool) {
    pool.push_back(resolve_ref(opts.image_root, ref));
  }
  parallel_for(work.size(), [&](std::size_t i) {
    const CurationRecord& r = *work[i];
    Image img = load_image(resolve_ref(opts.image_root, *r.image_ref));
    auto [perturbed, spec] = imageops::random_perturb(img, pool, derive_seed(seed, r.id));
    std::filesystem::path out_path = opts.output_dir / (sanitize_id(r.id) + ".vp.png");
    save_png(perturbed, out_path);
    results[i] = {out_path.string(), spec.to_meta_string()};
  });

  Dataset out;
  out.manifest = d.manifest;
  std::size_t wi = 0;
  for (const auto& r : d.records) {
    if (!r.image_ref || !targets.count(r.id)) {
      out.records.push_back(r);
      continue;
    }
    const Result& res = results[wi++];
    if (opts.mode == ApplyMode::replace50) {
      CurationRecord rec = r;
      rec.image_ref = res.new_ref;
      rec.meta["perturb"] = res.spec;
      out.records.push_back(std::move(rec));
    } else {
      out.records.push_back(r);
      CurationRecord copy = r;
      copy.id += ".vp";
      copy.image_ref = res.new_ref;
      copy.meta["perturb"] = res.spec;
      out.records.push_back(std::move(copy));
    }
  }
  sort_and_check_ids(out);
  StageEntry e = make_entry("visual-perturb", d.records.size(), out.records.size(), seed);
  e.parameters["mode"] = opts.mode == ApplyMode::replace50 ? "replace50" : "augment";
  e.parameters["perturbed"] = std::to_string(work.size());
  out.manifest.add_stage(std::move(e));
  return out;
}

Dataset text_rich(const Dataset& d, const TextRichOptions& opts, std::uint64_t seed) {
  std::filesystem::create_directories(opts.output_dir);
  std::vector<std::string> vl_ids;
  for (const auto& r : d.records) {
    if (r.image_ref) vl_ids.push_back(r.id);
  }
  std::set<std::string> targets;
  if (opts.mode == ApplyMode::replace50) {
    targets = pick_half(vl_ids, derive_seed(seed, "text-rich"));
  } else {
    targets.insert(vl_ids.begin(), vl_ids.end());
  }

  std::vector<const CurationRecord*> work;
  for (const auto& r : d.records) {
    if (r.image_ref && targets.count(r.id)) work.push_back(&r);
  }
  std::vector<std::string> new_refs(work.size());
  parallel_for(work.size(), [&](std::size_t i) {
    const CurationRecord& r = *work[i];
    Image img = load_image(resolve_ref(opts.image_root, *r.image_ref));
    Image rendered = imageops::render_text_rich(img, r.question, derive_seed(seed, r.id));
    std::filesystem::path out_path = opts.output_dir / (sanitize_id(r.id) + ".tr.png");
    save_png(rendered, out_path);
    new_refs[i] = out_path.string();
  });

  Dataset out;
  out.manifest = d.manifest;
  std::size_t wi = 0;
  for (const auto& r : d.records) {
    if (!r.image_ref || !targets.count(r.id)) {
      out.records.push_back(r);
      continue;
    }
    const std::string& new_ref = new_refs[wi++];
    if (opts.mode == ApplyMode::replace50) {
      CurationRecord rec = r;
      rec.image_ref = new_ref;
      rec.meta["text-rich"] = "true";
      out.records.push_back(std::move(rec));
    } else {
      out.records.push_back(r);
      CurationRecord copy = r;
      copy.id += ".tr";
      copy.image_ref = new_ref;
      copy.meta["text-rich"] = "true";
      out.records.push_back(std::move(copy));
    }
  }
  sort_and_check_ids(out);
  StageEntry e = make_entry("text-rich", d.records.size(), out.records.size(), seed);
  e.parameters["mode"] = opts.mode == ApplyMode::replace50 ? "replace50" : "augment";
  e.parameters["rendered"] = std::to_string(work.size());
  out.manifest.add_stage(std::move(e));
  return out;
}

Dataset apply_distractors(const Dataset& d, gen::Client& client, ApplyMode mode,
                          std::uint64_t seed) {
  std::vector<std::string> mc_ids;
  for (const auto& r : d.records) {
    if (mcq::is_multiple_choice(r.question)) mc_ids.push_back(r.id);
  }
  std::set<std::string> targets;
  if (mode == ApplyMode::replace50) {
    targets = pick_half(mc_ids, derive_seed(seed, "distractors"));
  } else {
    targets.insert(mc_ids.begin(), mc_ids.end());
  }

  Dataset out;
  out.manifest = d.manifest;
  std::size_t rewritten = 0, failed = 0;
  for (const auto& r : d.records) {
    if (!targets.count(r.id)) {
      out.records.push_back(r);
      continue;
    }
    // correct letter: ground truth when it is a letter, else the prediction
    std::optional<char> letter;
    auto try_letter = [&](const std::optional<std::string>& s) {
      if (letter || !s) return;
      auto canon = verify::normalize_answer(*s);
      if (canon.kind == verify::CanonicalAnswer::Kind::choice_letter) letter = canon.value[0];
    };
    try_letter(r.ground_truth);
    if (r.cot) try_letter(r.cot->predicted);

    std::optional<gen::Client::Rewrite> rw;
    if (letter && r.cot) {
      ChainOfThought probe = *r.cot;
      probe.predicted = std::string(1, *letter);
      rw = client.rewrite_distractors(r.question, probe, derive_seed(seed, r.id));
    }
    if (!rw) {
      ++failed;
      CurationRecord kept = r;
      kept.meta["rewrite-failed"] = "true";
      out.records.push_back(std::move(kept));
      continue;
    }
    ++rewritten;
    if (mode == ApplyMode::replace50) {
      CurationRecord rec = r;
      rec.question = rw->question;
      rec.cot = rw->cot;
      rec.ground_truth = rw->cot.predicted;
      rec.meta["distractors"] = "10";
      out.records.push_back(std::move(rec));
    } else {
      out.records.push_back(r);
      CurationRecord copy = r;
      copy.id += ".dx";
      copy.question = rw->question;
      copy.cot = rw->cot;
      copy.ground_truth = rw->cot.predicted;
      copy.meta["distractors"] = "10";
      out.records.push_back(std::move(copy));
    }
  }
  sort_and_check_ids(out);
  StageEntry e = make_entry("distractors", d.records.size(), out.records.size(), seed);
  e.parameters["mode"] = mode == ApplyMode::replace50 ? "replace50" : "augment";
  e.parameters["rewritten"] = std::to_string(rewritten);
  e.parameters["rewrite_failed"] = std::to_string(failed);
  out.manifest.add_stage(std::move(e));
  return out;
}

// --- scaling -----------------------------------------------------------------

Dataset scale_cots(const Dataset& d, int n_c, gen::Client& client, std::uint64_t seed,
                   const std::filesystem::path& image_root) {
  if (n_c < 1) throw UsageError("scale-cots needs n_c >= 1");
  for (const auto& r : d.records) {
    if (!r.ground_truth)
      throw DataError("scale-cots: record " + r.id + " lacks ground_truth");
  }

  std::vector<gen::GenerationRequest> reqs;
  reqs.reserve(d.records.size() * static_cast<std::size_t>(n_c));
  for (const auto& r : d.records) {
    std::optional<std::string> image;
    if (r.image_ref) image = resolve_ref(image_root, *r.image_ref);
    for (int i = 0; i < n_c; ++i) {
      reqs.push_back(client.make_request(
          "cot_gen", {{"question", r.question}}, image, client.config().sampling_temperature,
          derive_seed(seed, r.id, static_cast<std::uint64_t>(i))));
    }
  }
  std::vector<gen::GenerationResponse> resps = client.generate_batch(reqs);

  Dataset out;
  out.manifest = d.manifest;
  std::size_t sampled = resps.size(), kept = 0, no_box = 0;
  for (std::size_t ri = 0; ri < d.records.size(); ++ri) {
    const auto& r = d.records[ri];
    for (int i = 0; i < n_c; ++i) {
      const auto& resp = resps[ri * static_cast<std::size_t>(n_c) + i];
      ChainOfThought cot;
      if (auto parsed = parse_training_text(resp.text)) {
        cot.solution = parsed->solution;
        cot.predicted = parsed->predicted;
      } else {
        cot.solution = resp.text;
        cot.predicted = verify::try_extract_boxed(resp.text);
      }
      if (!cot.predicted) {
        ++no_box;
        continue;
      }
      if (!verify::answers_equivalent(*cot.predicted, *r.ground_truth)) continue;
      CurationRecord rec = r;
      rec.id = r.id + ".c" + std::to_string(i + 1);
      rec.cot = std::move(cot);
      rec.meta["verified"] = "true";
      out.records.push_back(std::move(rec));
      ++kept;
    }
  }
  sort_and_check_ids(out);
  StageEntry e = make_entry("scale-cots", d.records.size(), out.records.size(), seed);
  e.parameters["n_c"] = std::to_string(n_c);
  e.parameters["sampled"] = std::to_string(sampled);
  e.parameters["kept"] = std::to_string(kept);
  e.parameters["no_box"] = std::to_string(no_box);
  out.manifest.add_stage(std::move(e));
  return out;
}

Dataset scale_questions(const Dataset& d, const ScaleQuestionsOptions& opts,
                        gen::Client& client, std::uint64_t seed) {
  if (opts.n_q < 2) throw UsageError("scale-questions needs n_q >= 2");
  if (opts.mv_threshold > opts.mv_samples)
    throw UsageError("mv_threshold must not exceed mv_samples");

  const int new_q = opts.n_q - 1;
  struct PerRecord {
    std::vector<std::string> questions;
    bool partial = false;
  };
  std::vector<PerRecord> synth(d.records.size());
  {
    // same semantics as Client::generate_questions, batched so the client's
    // in-flight cap governs concurrency: one request per record, then one
    // retry round for short parses
    auto question_request = [&](const CurationRecord& r, std::uint64_t s) {
      std::optional<std::string> image;
      if (r.image_ref) image = resolve_ref(opts.image_root, *r.image_ref);
      return client.make_request(
          "question_gen", {{"question", r.question}, {"k", std::to_string(new_q)}}, image,
          client.config().sampling_temperature, s);
    };
    std::vector<gen::GenerationRequest> reqs;
    reqs.reserve(d.records.size());
    for (const auto& r : d.records) reqs.push_back(question_request(r, derive_seed(seed, r.id)));
    std::vector<gen::GenerationResponse> resps = client.generate_batch(reqs);
    std::vector<std::size_t> retry_idx;
    for (std::size_t i = 0; i < resps.size(); ++i) {
      synth[i].questions = gen::parse_numbered_questions(resps[i].text);
      if (static_cast<int>(synth[i].questions.size()) < new_q) retry_idx.push_back(i);
    }
    if (!retry_idx.empty()) {
      std::vector<gen::GenerationRequest> retries;
      retries.reserve(retry_idx.size());
      for (std::size_t i : retry_idx) {
        retries.push_back(
            question_request(d.records[i], derive_seed(seed, d.records[i].question, 1)));
      }
      std::vector<gen::GenerationResponse> retry_resps = client.generate_batch(retries);
      for (std::size_t j = 0; j < retry_idx.size(); ++j) {
        auto qs = gen::parse_numbered_questions(retry_resps[j].text);
        std::size_t i = retry_idx[j];
        if (qs.size() > synth[i].questions.size()) synth[i].questions = std::move(qs);
        if (static_cast<int>(synth[i].questions.size()) < new_q) synth[i].partial = true;
        if (synth[i].questions.empty())
          throw BackendError("question generation produced zero parseable questions for " +
                             d.records[i].id);
      }
    }
    for (auto& pr : synth) {
      if (static_cast<int>(pr.questions.size()) > new_q)
        pr.questions.resize(static_cast<std::size_t>(new_q));
    }
  }

  // flatten: mv_samples CoT requests per synthesized question
  struct QuestionRef {
    std::size_t record;
    std::size_t q_index;  // 1-based suffix
    std::string question;
  };
  std::vector<QuestionRef> qrefs;
  std::vector<gen::GenerationRequest> reqs;
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const auto& r = d.records[i];
    std::optional<std::string> image;
    if (r.image_ref) image = resolve_ref(opts.image_root, *r.image_ref);
    for (std::size_t j = 0; j < synth[i].questions.size(); ++j) {
      qrefs.push_back({i, j + 1, synth[i].questions[j]});
      for (int s = 0; s < opts.mv_samples; ++s) {
        reqs.push_back(client.make_request(
            "cot_gen", {{"question", synth[i].questions[j]}}, image,
            client.config().sampling_temperature,
            derive_seed(seed, r.id + ".q" + std::to_string(j + 1),
                        static_cast<std::uint64_t>(s))));
      }
    }
  }
  std::vector<gen::GenerationResponse> resps = client.generate_batch(reqs);

  Dataset out;
  out.manifest = d.manifest;
  std::size_t questions_kept = 0, questions_dropped = 0, partial_parses = 0;
  for (const auto& pr : synth) {
    if (pr.partial) ++partial_parses;
  }
  for (std::size_t qi = 0; qi < qrefs.size(); ++qi) {
    const QuestionRef& qr = qrefs[qi];
    const CurationRecord& parent = d.records[qr.record];
    std::vector<ChainOfThought> cots(static_cast<std::size_t>(opts.mv_samples));
    std::vector<std::string> answers;
    for (int s = 0; s < opts.mv_samples; ++s) {
      const auto& resp = resps[qi * static_cast<std::size_t>(opts.mv_samples) + s];
      ChainOfThought cot;
      if (auto parsed = parse_training_text(resp.text)) {
        cot.solution = parsed->solution;
        cot.predicted = parsed->predicted;
      } else {
        cot.solution = resp.text;
        cot.predicted = verify::try_extract_boxed(resp.text);
      }
      if (cot.predicted) answers.push_back(*cot.predicted);
      cots[static_cast<std::size_t>(s)] = std::move(cot);
    }
    std::optional<std::string> proxy;
    if (!answers.empty()) {
      try {
        proxy = verify::majority_vote(answers, static_cast<std::size_t>(opts.mv_threshold));
      } catch (const DataError&) {
        proxy = std::nullopt;  // ambiguous vote: drop the question
      }
    }
    if (!proxy) {
      ++questions_dropped;
      continue;
    }
    ++questions_kept;
    for (int s = 0; s < opts.mv_samples; ++s) {
      const auto& cot = cots[static_cast<std::size_t>(s)];
      if (!cot.predicted || !verify::answers_equivalent(*cot.predicted, *proxy)) continue;
      CurationRecord rec;
      rec.id = parent.id + ".q" + std::to_string(qr.q_index) + ".c" + std::to_string(s + 1);
      rec.image_ref = parent.image_ref;
      rec.question = qr.question;
      rec.ground_truth = proxy;
      rec.cot = cot;
      rec.source = parent.source;
      rec.meta["answer"] = "mv-proxy";
      rec.meta["verified"] = "true";
      rec.meta["parent"] = parent.id;
      out.records.push_back(std::move(rec));
    }
  }
  sort_and_check_ids(out);
  StageEntry e = make_entry("scale-questions", d.records.size(), out.records.size(), seed);
  e.parameters["n_q"] = std::to_string(opts.n_q);
  e.parameters["mv_samples"] = std::to_string(opts.mv_samples);
  e.parameters["mv_threshold"] = std::to_string(opts.mv_threshold);
  e.parameters["questions_kept"] = std::to_string(questions_kept);
  e.parameters["questions_dropped"] = std::to_string(questions_dropped);
  e.parameters["partial_parses"] = std::to_string(partial_parses);
  out.manifest.add_stage(std::move(e));
  return out;
}

Dataset assemble(const Dataset& cot_scaled, const Dataset& q_scaled,
                 const CaptionMap& captions, const Dataset& text_only) {
  Dataset vl_a = caption_and_solve(cot_scaled, captions);
  Dataset vl_b = caption_and_solve(q_scaled, captions);

  Dataset out;
  out.manifest = cot_scaled.manifest;
  out.records = vl_a.records;
  out.records.insert(out.records.end(), vl_b.records.begin(), vl_b.records.end());
  out.records.insert(out.records.end(), text_only.records.begin(), text_only.records.end());
  sort_and_check_ids(out);  // inputs must be disjoint by id

  std::size_t vl_count = 0, text_count = 0;
  for (const auto& r : out.records) (r.image_ref ? vl_count : text_count)++;
  StageEntry e = make_entry("assemble", cot_scaled.records.size() + q_scaled.records.size() +
                                            text_only.records.size(),
                            out.records.size(), 0);
  e.parameters["cot_scaled"] = std::to_string(cot_scaled.records.size());
  e.parameters["q_scaled"] = std::to_string(q_scaled.records.size());
  e.parameters["text_only"] = std::to_string(text_only.records.size());
  e.parameters["vl_records"] = std::to_string(vl_count);
  e.parameters["text_records"] = std::to_string(text_count);
  out.manifest.add_stage(std::move(e));
  return out;
}

}  // namespace vlcot::pipeline
