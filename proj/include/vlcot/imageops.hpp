#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vlcot/image.hpp"
#include "vlcot/rng.hpp"

namespace vlcot::imageops {

// The 24 admissible rotation angles, in degrees.
inline constexpr std::array<int, 24> kRotationAngles = {
    0,   15,  30,  45,  60,  75,  90,  105, 120, 135, 150, 165,
    180, 195, 210, 225, 240, 255, 270, 285, 300, 315, 330, 345};

bool is_valid_rotation_angle(int degrees);

enum class PerturbKind { rotation, distractor_concat, mixup };

std::string to_string(PerturbKind k);

// Record of the exact transform applied, stored in record meta so any
// perturbation can be replayed bit-for-bit.
struct PerturbSpec {
  PerturbKind kind = PerturbKind::rotation;
  std::optional<int> angle_degrees;          // rotation
  std::optional<double> alpha;               // mixup, in [0.8, 1.0)
  std::optional<std::string> distractor_ref; // concat / mixup

  std::string to_meta_string() const;
  static PerturbSpec from_meta_string(const std::string& s);
};

// Counterclockwise rotation about the image center; canvas grows to fit and
// uncovered area is white. 0 is the identity; 90/180/270 are exact pixel
// permutations (90 maps source (x, y) to destination (y, W-1-x)); other
// angles sample bilinearly.
Image rotate(const Image& img, int angle_degrees);

// Side-by-side concat: width w1+w2, height max(h1,h2), the shorter image
// padded at the bottom with white. The left region always equals `img`.
Image concat_width(const Image& img, const Image& distractor);

// Per-channel round(alpha*p1 + (1-alpha)*p2) after bilinearly resizing the
// distractor to img's dimensions. alpha must be in [0.8, 1.0).
Image mixup(const Image& img, const Image& distractor, double alpha);

// Uniformly picks one of the three transforms and samples its parameters
// (angle from the 24-angle list, alpha from U[0.8,1.0), distractor uniformly
// from the pool). Returns the perturbed image and the spec used.
std::pair<Image, PerturbSpec> random_perturb(const Image& img,
                                             const std::vector<std::string>& distractor_pool,
                                             std::uint64_t rng_seed);

// Replays a recorded spec (distractor refs are loaded from disk).
Image apply_perturb(const Image& img, const PerturbSpec& spec);

struct TextRichStyle {
  // Fixed 8-color background palette (RGB).
  static const std::array<std::array<std::uint8_t, 3>, 8>& background_palette();
  // Candidate text colors; the sampler only keeps those with WCAG contrast
  // ratio >= 3 against the chosen background.
  static const std::array<std::array<std::uint8_t, 3>, 8>& text_palette();
};

// Renders the question (word-wrapped, sampled font/colors) above the original
// image on a colored canvas. Deterministic for a given (inputs, style_seed).
// Throws DataError on an empty question or one longer than 10,000 chars.
Image render_text_rich(const Image& img, const std::string& question,
                       std::uint64_t style_seed);

// WCAG relative-luminance contrast ratio, in [1, 21].
double contrast_ratio(const std::array<std::uint8_t, 3>& a,
                      const std::array<std::uint8_t, 3>& b);

}  // namespace vlcot::imageops
