#include "vlcot/imageops.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vlcot/error.hpp"

namespace vlcot::imageops {

bool is_valid_rotation_angle(int degrees) {
  return std::find(kRotationAngles.begin(), kRotationAngles.end(), degrees) !=
         kRotationAngles.end();
}

std::string to_string(PerturbKind k) {
  switch (k) {
    case PerturbKind::rotation: return "rotation";
    case PerturbKind::distractor_concat: return "distractor-concat";
    case PerturbKind::mixup: return "mixup";
  }
  return "?";
}

std::string PerturbSpec::to_meta_string() const {
  std::ostringstream os;
  os << to_string(kind);
  if (angle_degrees) os << ";angle=" << *angle_degrees;
  if (alpha) os << ";alpha=" << std::hexfloat << *alpha;
  if (distractor_ref) os << ";distractor=" << *distractor_ref;
  return os.str();
}

PerturbSpec PerturbSpec::from_meta_string(const std::string& s) {
  PerturbSpec spec;
  std::istringstream is(s);
  std::string field;
  bool first = true;
  while (std::getline(is, field, ';')) {
    if (first) {
      first = false;
      if (field == "rotation") spec.kind = PerturbKind::rotation;
      else if (field == "distractor-concat") spec.kind = PerturbKind::distractor_concat;
      else if (field == "mixup") spec.kind = PerturbKind::mixup;
      else throw DataError("unknown perturb kind: " + field);
      continue;
    }
    auto eq = field.find('=');
    if (eq == std::string::npos) throw DataError("malformed perturb spec: " + s);
    std::string key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "angle") spec.angle_degrees = std::stoi(val);
    else if (key == "alpha") spec.alpha = std::strtod(val.c_str(), nullptr);
    else if (key == "distractor") spec.distractor_ref = val;
  }
  return spec;
}

namespace {

Image rotate90(const Image& img) {
  // source (x, y) -> destination (y, W-1-x)
  Image out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::uint8_t* s = img.at(x, y);
      std::uint8_t* dst = out.at(y, img.width - 1 - x);
      dst[0] = s[0];
      dst[1] = s[1];
      dst[2] = s[2];
    }
  }
  return out;
}

Image rotate180(const Image& img) {
  Image out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::uint8_t* s = img.at(x, y);
      std::uint8_t* dst = out.at(img.width - 1 - x, img.height - 1 - y);
      dst[0] = s[0];
      dst[1] = s[1];
      dst[2] = s[2];
    }
  }
  return out;
}

}  // namespace

Image rotate(const Image& img, int angle_degrees) {
  if (!is_valid_rotation_angle(angle_degrees)) {
    throw UsageError("rotation angle " + std::to_string(angle_degrees) +
                     " is not in the admissible 24-angle list");
  }
  switch (angle_degrees) {
    case 0: return img;
    case 90: return rotate90(img);
    case 180: return rotate180(img);
    case 270: return rotate180(rotate90(img));
    default: break;
  }

  const double rad = angle_degrees * M_PI / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  const int new_w = static_cast<int>(
      std::ceil(img.width * std::fabs(c) + img.height * std::fabs(s) - 1e-9));
  const int new_h = static_cast<int>(
      std::ceil(img.width * std::fabs(s) + img.height * std::fabs(c) - 1e-9));
  const double cxs = (img.width - 1) / 2.0, cys = (img.height - 1) / 2.0;
  const double cxd = (new_w - 1) / 2.0, cyd = (new_h - 1) / 2.0;

  Image out(new_w, new_h, 255);  // white background
  for (int y = 0; y < new_h; ++y) {
    for (int x = 0; x < new_w; ++x) {
      // inverse of the visually-CCW map (y axis points down)
      double u = x - cxd, v = y - cyd;
      double sx = c * u - s * v + cxs;
      double sy = s * u + c * v + cys;
      if (sx < -0.5 || sy < -0.5 || sx > img.width - 0.5 || sy > img.height - 0.5) continue;
      int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
      double fx = sx - x0, fy = sy - y0;
      std::uint8_t* dst = out.at(x, y);
      for (int ch = 0; ch < 3; ++ch) {
        auto sample = [&](int xx, int yy) -> double {
          if (xx < 0 || yy < 0 || xx >= img.width || yy >= img.height) return 255.0;
          return img.at(xx, yy)[ch];
        };
        double top = sample(x0, y0) * (1 - fx) + sample(x0 + 1, y0) * fx;
        double bot = sample(x0, y0 + 1) * (1 - fx) + sample(x0 + 1, y0 + 1) * fx;
        double val = top * (1 - fy) + bot * fy;
        dst[ch] = static_cast<std::uint8_t>(std::lround(std::clamp(val, 0.0, 255.0)));
      }
    }
  }
  return out;
}

Image concat_width(const Image& img, const Image& distractor) {
  const int w = img.width + distractor.width;
  const int h = std::max(img.height, distractor.height);
  Image out(w, h, 255);
  for (int y = 0; y < img.height; ++y) {
    std::copy_n(img.at(0, y), static_cast<std::size_t>(img.width) * 3, out.at(0, y));
  }
  for (int y = 0; y < distractor.height; ++y) {
    std::copy_n(distractor.at(0, y), static_cast<std::size_t>(distractor.width) * 3,
                out.at(img.width, y));
  }
  return out;
}

Image mixup(const Image& img, const Image& distractor, double alpha) {
  if (!(alpha >= 0.8 && alpha < 1.0)) {
    throw UsageError("mixup alpha must lie in [0.8, 1.0)");
  }
  Image d = (distractor.width == img.width && distractor.height == img.height)
                ? distractor
                : resize_bilinear(distractor, img.width, img.height);
  Image out(img.width, img.height);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    double v = alpha * img.pixels[i] + (1.0 - alpha) * d.pixels[i];
    out.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
  }
  return out;
}

std::pair<Image, PerturbSpec> random_perturb(const Image& img,
                                             const std::vector<std::string>& distractor_pool,
                                             std::uint64_t rng_seed) {
  if (distractor_pool.empty()) throw UsageError("random_perturb needs a non-empty distractor pool");
  Rng rng(rng_seed);
  PerturbSpec spec;
  switch (rng.uniform_index(3)) {
    case 0: spec.kind = PerturbKind::rotation; break;
    case 1: spec.kind = PerturbKind::distractor_concat; break;
    default: spec.kind = PerturbKind::mixup; break;
  }
  switch (spec.kind) {
    case PerturbKind::rotation:
      spec.angle_degrees = kRotationAngles[rng.uniform_index(kRotationAngles.size())];
      break;
    case PerturbKind::distractor_concat:
      spec.distractor_ref = distractor_pool[rng.uniform_index(distractor_pool.size())];
      break;
    case PerturbKind::mixup:
      spec.distractor_ref = distractor_pool[rng.uniform_index(distractor_pool.size())];
      spec.alpha = rng.uniform_double(0.8, 1.0);
      break;
  }
  return {apply_perturb(img, spec), spec};
}

Image apply_perturb(const Image& img, const PerturbSpec& spec) {
  switch (spec.kind) {
    case PerturbKind::rotation:
      if (!spec.angle_degrees) throw UsageError("rotation spec without angle");
      return rotate(img, *spec.angle_degrees);
    case PerturbKind::distractor_concat:
      if (!spec.distractor_ref) throw UsageError("concat spec without distractor");
      return concat_width(img, load_image(*spec.distractor_ref));
    case PerturbKind::mixup:
      if (!spec.distractor_ref || !spec.alpha)
        throw UsageError("mixup spec without distractor/alpha");
      return mixup(img, load_image(*spec.distractor_ref), *spec.alpha);
  }
  throw UsageError("unreachable perturb kind");
}

double contrast_ratio(const std::array<std::uint8_t, 3>& a,
                      const std::array<std::uint8_t, 3>& b) {
  auto rel_luminance = [](const std::array<std::uint8_t, 3>& rgb) {
    auto lin = [](double v) {
      v /= 255.0;
      return v <= 0.03928 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
    };
    return 0.2126 * lin(rgb[0]) + 0.7152 * lin(rgb[1]) + 0.0722 * lin(rgb[2]);
  };
  double l1 = rel_luminance(a), l2 = rel_luminance(b);
  if (l1 < l2) std::swap(l1, l2);
  return (l1 + 0.05) / (l2 + 0.05);
}

}  // namespace vlcot::imageops
