#pragma once

// Serial reference implementations used as independent oracles by the test
// and acceptance suites, and as the baseline side of the benchmark target.
// Nothing here shares code with the production paths it checks.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vlcot/image.hpp"
#include "vlcot/record.hpp"

namespace vlcot::ref {

// Step-by-step DCT hash: own grayscale loop, own bilinear resample, direct
// double-sum DCT per coefficient, median by full sort.
std::uint64_t phash_reference(const Image& img);

// Bit-by-bit hamming distance.
int hamming_loop(std::uint64_t a, std::uint64_t b);

// Real-valued blend, no rounding.
double mixup_reference(double p1, double p2, double alpha);

// Index-permutation oracle for a quarter turn: dest(y, W-1-x) = src(x, y).
Image rotate90_loop(const Image& img);

// O(n^2) decontamination oracle: for every record, compare its reference
// hash against every eval hash; returns surviving record ids (sorted).
std::vector<std::string> decontaminate_naive(const Dataset& d,
                                             const std::vector<std::filesystem::path>& eval_images,
                                             const std::filesystem::path& image_root);

// Sort-based length-filter oracle: ids of the ceil(n/2) longest CoTs, median
// ties by ascending id.
std::vector<std::string> length_filter_ids(const std::vector<std::pair<std::string, std::size_t>>&
                                               id_lengths);

// Brute-force counting vote: unique answer (by exact string) reaching the
// threshold, empty string when none.
std::string majority_count_naive(const std::vector<std::string>& answers, std::size_t threshold);

// Serial whole-dataset keyword/statistics fold used by the benchmark.
std::size_t keyword_containment_serial(const std::vector<std::string>& texts,
                                       const std::string& keyword);

}  // namespace vlcot::ref
