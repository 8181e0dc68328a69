#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vlcot/genclient.hpp"
#include "vlcot/record.hpp"

namespace vlcot::pipeline {

// Caption store shared by the caption-dependent stages: image_ref -> caption.
using CaptionMap = std::map<std::string, std::string>;

// Generates captions for every unique image_ref in d (one generate_caption
// call per unique image, parallel) and merges them into `captions`.
void ensure_captions(const Dataset& d, gen::Client& client, CaptionMap& captions,
                     const std::filesystem::path& image_root = {});

CaptionMap load_captions(const std::filesystem::path& path);
void save_captions(const CaptionMap& captions, const std::filesystem::path& path);

// --- context curation ------------------------------------------------------

// Equal share per source (remainder round-robin by source order), seeded
// sampling without replacement. A short source's unfilled share spills to the
// remaining sources in order.
Dataset mix_sources(const std::vector<Dataset>& datasets, std::size_t target_size,
                    std::uint64_t seed);

// floor(fraction*N) records, seeded, without replacement. Subsets of the same
// seed nest: subset(1/8) is contained in subset(1/4) etc.
Dataset sample_subset(const Dataset& d, double fraction, std::uint64_t seed);

// --- interventions ----------------------------------------------------------

// Drops records the generator solves correctly without the image
// (temperature-0 blind probe). Probe failures keep the record with
// meta["probe-failed"]="true".
Dataset perceptual_redundancy_filter(const Dataset& d, gen::Client& client);

// Drops records the generator solves from question + caption alone.
Dataset shallow_perception_filter(const Dataset& d, gen::Client& client,
                                  const CaptionMap& captions);

// Sets cot->caption from the caption map (replacing any existing caption).
Dataset caption_and_solve(const Dataset& d, const CaptionMap& captions);

// Concatenation with id-collision check; text records must be image-free.
Dataset augment_text_only(const Dataset& vl, const Dataset& text);

// Keeps the ceil(N/2) records with the longest CoTs (whitespace tokens over
// caption + solution), median ties broken by ascending id.
Dataset length_filter(const Dataset& d);

// Runs rate_difficulty for every record and stores the level in
// meta["difficulty"].
Dataset rate_difficulty_stage(const Dataset& d, gen::Client& client);

// Per difficulty level, keeps min(cap, available) seeded-random records;
// level "unknown" is excluded entirely.
Dataset difficulty_balance(const Dataset& d, std::size_t per_level_cap, std::uint64_t seed);

enum class ApplyMode { replace50, augment };

struct VisualPerturbOptions {
  ApplyMode mode = ApplyMode::replace50;
  std::filesystem::path image_root;
  std::filesystem::path output_dir;          // perturbed PNGs land here
  std::vector<std::string> distractor_pool;  // image refs from the other dataset
};

// Applies a random perturbation to a seeded 50% of VL records (replace50) or
// appends perturbed ".vp" copies (augment). The spec used is stored in
// meta["perturb"].
Dataset visual_perturb(const Dataset& d, const VisualPerturbOptions& opts, std::uint64_t seed);

struct TextRichOptions {
  ApplyMode mode = ApplyMode::replace50;
  std::filesystem::path image_root;
  std::filesystem::path output_dir;
};

// Replaces images with rendered text-rich versions (".tr" copies in augment
// mode).
Dataset text_rich(const Dataset& d, const TextRichOptions& opts, std::uint64_t seed);

// Ten-option rewrite of multiple-choice records. replace50 rewrites a seeded
// half of the MC records in place; augment appends ".dx" copies. Rewrite
// failures keep the original, flagged meta["rewrite-failed"]="true".
Dataset apply_distractors(const Dataset& d, gen::Client& client, ApplyMode mode,
                          std::uint64_t seed);

// --- scaling ----------------------------------------------------------------

// n_c sampled CoTs per (image, question); each survivor of the correctness
// filter becomes its own ".c{i}" record.
Dataset scale_cots(const Dataset& d, int n_c, gen::Client& client, std::uint64_t seed,
                   const std::filesystem::path& image_root = {});

struct ScaleQuestionsOptions {
  int n_q = 15;          // total questions per image; n_q-1 are synthesized
  int mv_samples = 4;    // CoTs sampled per new question
  int mv_threshold = 3;  // majority size required for a proxy answer
  std::filesystem::path image_root;
};

// Synthesizes n_q-1 questions per record, samples mv_samples CoTs each, and
// keeps every CoT matching the majority-vote proxy answer (ground_truth :=
// proxy, meta["answer"]="mv-proxy"). Questions with no majority are dropped.
Dataset scale_questions(const Dataset& d, const ScaleQuestionsOptions& opts,
                        gen::Client& client, std::uint64_t seed);

// caption_and_solve on both VL streams, then union with text_only.
Dataset assemble(const Dataset& cot_scaled, const Dataset& q_scaled,
                 const CaptionMap& captions, const Dataset& text_only);

}  // namespace vlcot::pipeline
