#pragma once

// Procedural garment/person fixtures with analytically known DensePose
// fields and ground-truth warps.
//
// Each part is an axis-aligned rectangle in the garment frame carrying an
// affine UV chart. The person frame shows the same parts moved by an affine
// placement, with the chart pulled back through the placement, so the UV
// correspondence between the two frames is exact by construction.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "densewarp/random.hpp"
#include "densewarp/raster.hpp"
#include "densewarp/sampling.hpp"

namespace densewarp {

/// (x, y) -> (a x + b y + c, d x + e y + f)
struct Affine2 {
  double a = 1.0, b = 0.0, c = 0.0;
  double d = 0.0, e = 1.0, f = 0.0;

  Point2 apply(const Point2& p) const { return {a * p.x + b * p.y + c, d * p.x + e * p.y + f}; }

  double determinant() const { return a * e - b * d; }

  std::optional<Affine2> inverse() const {
    const double det = determinant();
    if (!(std::abs(det) > 1e-12)) return std::nullopt;
    if (is_identity()) return *this;
    Affine2 inv;
    inv.a = e / det;
    inv.b = -b / det;
    inv.d = -d / det;
    inv.e = a / det;
    inv.c = -(inv.a * c + inv.b * f);
    inv.f = -(inv.d * c + inv.e * f);
    return inv;
  }

  bool is_identity() const {
    return a == 1.0 && b == 0.0 && c == 0.0 && d == 0.0 && e == 1.0 && f == 0.0;
  }

  static Affine2 translation(double tx, double ty) { return {1.0, 0.0, tx, 0.0, 1.0, ty}; }

  /// Rotation by `degrees` (clockwise on screen, y pointing down) about a
  /// pivot.
  static Affine2 rotation_about(double degrees, const Point2& pivot) {
    const double t = degrees * std::numbers::pi / 180.0;
    const double cs = std::cos(t);
    const double sn = std::sin(t);
    return {cs, -sn, pivot.x - cs * pivot.x + sn * pivot.y,
            sn, cs,  pivot.y - sn * pivot.x - cs * pivot.y};
  }

  /// Chart mapping the pixel centers of a rectangle onto
  /// [u0, u0 + su] x [v0, v0 + sv] (half-texel inset at the edges).
  static Affine2 chart_for_rect(int x, int y, int w, int h, double u0 = 0.0, double v0 = 0.0,
                                double su = 1.0, double sv = 1.0) {
    return {su / w, 0.0, u0 + su * (0.5 - x) / w, 0.0, sv / h, v0 + sv * (0.5 - y) / h};
  }

  bool operator==(const Affine2&) const = default;
};

enum class TextureKind { Stripes, Checker, Gradient, Noise };

inline const char* texture_name(TextureKind kind) {
  switch (kind) {
    case TextureKind::Stripes: return "stripes";
    case TextureKind::Checker: return "checker";
    case TextureKind::Gradient: return "gradient";
    case TextureKind::Noise: return "noise";
  }
  return "stripes";
}

inline std::optional<TextureKind> texture_from_name(const std::string& name) {
  for (auto k : {TextureKind::Stripes, TextureKind::Checker, TextureKind::Gradient, TextureKind::Noise}) {
    if (name == texture_name(k)) return k;
  }
  return std::nullopt;
}

struct TextureSpec {
  TextureKind kind = TextureKind::Stripes;
  double period = 16.0;
};

struct SynthPart {
  int part_id = 1;
  /// Garment-frame rectangle, pixel units.
  int x = 0, y = 0, w = 1, h = 1;
  /// Garment-frame point -> (u, v).
  Affine2 uv;
  /// Garment-frame point -> person-frame point.
  Affine2 placement;
  /// Parts outside the garment appear only on the person (e.g. bare arms).
  bool in_garment = true;
};

struct SynthSpec {
  int width = 192;
  int height = 256;
  std::vector<SynthPart> parts;
  TextureSpec texture;
  double speckle_dropout = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (width <= 0 || height <= 0) throw InvalidArgument("SynthSpec: dimensions must be positive");
    if (!(texture.period > 0.0)) throw InvalidArgument("SynthSpec: texture period must be positive");
    if (!(speckle_dropout >= 0.0 && speckle_dropout <= 1.0)) {
      throw InvalidArgument("SynthSpec: speckle_dropout must lie in [0,1]");
    }
    std::set<int> seen;
    for (const auto& p : parts) {
      const std::string tag = "SynthSpec: part " + std::to_string(p.part_id);
      if (p.part_id < 1 || p.part_id > kPartCount) throw InvalidArgument(tag + " is outside 1..24");
      if (!seen.insert(p.part_id).second) throw InvalidArgument(tag + " is listed twice");
      if (p.w < 1 || p.h < 1 || p.x < 0 || p.y < 0 || p.x + p.w > width || p.y + p.h > height) {
        throw InvalidArgument(tag + ": rectangle leaves the frame");
      }
      const std::array<Point2, 4> corners = {
          Point2{double(p.x), double(p.y)}, Point2{double(p.x + p.w - 1), double(p.y)},
          Point2{double(p.x), double(p.y + p.h - 1)}, Point2{double(p.x + p.w - 1), double(p.y + p.h - 1)}};
      for (const auto& c : corners) {
        const Point2 uv = p.uv.apply(c);
        constexpr double tol = 1e-9;
        if (uv.x < -tol || uv.x > 1.0 + tol || uv.y < -tol || uv.y > 1.0 + tol) {
          throw InvalidArgument(tag + ": UV chart maps the rectangle outside [0,1]^2");
        }
      }
      if (!p.placement.inverse()) throw InvalidArgument(tag + ": placement is not invertible");
    }
  }
};

struct SynthPair {
  RgbImage garment;
  DensePoseMap garment_dp;
  BinaryMask garment_mask;
  DensePoseMap person_dp;
  /// Garment colors transported by the analytic warp; black outside gt_mask.
  RgbImage gt_warp;
  BinaryMask gt_mask;
};

namespace detail {

inline Vec3 part_base_color(int part) {
  // Fixed hue wheel so adjacent part ids contrast.
  const double hue = std::fmod(part * 0.381966, 1.0) * 6.0;
  const int sector = static_cast<int>(hue);
  const double f = hue - sector;
  const double lo = 0.25;
  const double hi = 0.85;
  const double up = lo + (hi - lo) * f;
  const double down = hi - (hi - lo) * f;
  switch (sector % 6) {
    case 0: return {hi, up, lo};
    case 1: return {down, hi, lo};
    case 2: return {lo, hi, up};
    case 3: return {lo, down, hi};
    case 4: return {up, lo, hi};
    default: return {hi, lo, down};
  }
}

inline double value_noise(double x, double y, double period, std::uint64_t seed) {
  const double gx = x / period;
  const double gy = y / period;
  const double fx0 = std::floor(gx);
  const double fy0 = std::floor(gy);
  const auto lattice = [&](double ix, double iy) {
    const auto kx = static_cast<std::uint64_t>(static_cast<std::int64_t>(ix));
    const auto ky = static_cast<std::uint64_t>(static_cast<std::int64_t>(iy));
    const std::uint64_t h = splitmix64(seed ^ splitmix64(kx ^ splitmix64(ky)));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
  };
  const auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
  const double tx = smooth(gx - fx0);
  const double ty = smooth(gy - fy0);
  const double top = lattice(fx0, fy0) * (1 - tx) + lattice(fx0 + 1, fy0) * tx;
  const double bottom = lattice(fx0, fy0 + 1) * (1 - tx) + lattice(fx0 + 1, fy0 + 1) * tx;
  return top * (1 - ty) + bottom * ty;
}

/// Pattern intensity in [0,1] at a garment pixel.
inline double texture_value(const TextureSpec& tex, int x, int y, std::uint64_t seed) {
  const double p = tex.period;
  switch (tex.kind) {
    case TextureKind::Stripes:
      return static_cast<double>(static_cast<long long>(std::floor((x + y) / p)) & 1LL);
    case TextureKind::Checker:
      return static_cast<double>(
          (static_cast<long long>(std::floor(x / p)) + static_cast<long long>(std::floor(y / p))) & 1LL);
    case TextureKind::Gradient:
      return 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * (x + 0.5 * y) / (4.0 * p));
    case TextureKind::Noise:
      return value_noise(x, y, p, seed);
  }
  return 0.0;
}

inline Rgb garment_color(const TextureSpec& tex, int part, int x, int y, std::uint64_t seed) {
  const Vec3 base = part_base_color(part);
  const Vec3 dark = base * 0.35 + Vec3{0.05, 0.05, 0.05};
  const double t = texture_value(tex, x, y, seed);
  return Rgb::from_vec(base * (1.0 - t) + dark * t);
}

inline bool inside_rect(const SynthPart& p, const Point2& s) {
  return s.x >= p.x - 0.5 && s.x < p.x + p.w - 0.5 && s.y >= p.y - 0.5 && s.y < p.y + p.h - 0.5;
}

}  // namespace detail

/// Rasterizes both frames of a fixture. Later parts are drawn over earlier
/// ones in both frames.
inline SynthPair generate(const SynthSpec& spec) {
  spec.validate();
  const int w = spec.width;
  const int h = spec.height;
  SynthPair pair{RgbImage(w, h, Rgb{1.0F, 1.0F, 1.0F}), DensePoseMap(w, h), BinaryMask(w, h),
                 DensePoseMap(w, h), RgbImage(w, h), BinaryMask(w, h)};

  for (const auto& part : spec.parts) {
    if (!part.in_garment) continue;
    for (int y = part.y; y < part.y + part.h; ++y) {
      for (int x = part.x; x < part.x + part.w; ++x) {
        const Point2 uv = part.uv.apply({double(x), double(y)});
        pair.garment_dp.set(x, y, part.part_id, static_cast<float>(uv.x), static_cast<float>(uv.y));
        pair.garment(x, y) = detail::garment_color(spec.texture, part.part_id, x, y, spec.seed);
        pair.garment_mask.set(x, y, true);
      }
    }
  }

  std::vector<Affine2> inverse;
  inverse.reserve(spec.parts.size());
  for (const auto& part : spec.parts) inverse.push_back(*part.placement.inverse());

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (std::size_t k = spec.parts.size(); k-- > 0;) {
        const SynthPart& part = spec.parts[k];
        const Point2 s = inverse[k].apply({double(x), double(y)});
        if (!detail::inside_rect(part, s)) continue;
        const Point2 uv = part.uv.apply(s);
        pair.person_dp.set(x, y, part.part_id, static_cast<float>(uv.x), static_cast<float>(uv.y));
        if (part.in_garment) {
          pair.gt_mask.set(x, y, true);
          const double sx = std::clamp(s.x, double(part.x), double(part.x + part.w - 1));
          const double sy = std::clamp(s.y, double(part.y), double(part.y + part.h - 1));
          pair.gt_warp(x, y) = sample_bilinear(pair.garment, sx, sy);
        }
        break;
      }
    }
  }

  if (spec.speckle_dropout > 0.0) {
    detail::UniformRng rng(detail::splitmix64(spec.seed ^ 0xD50F5EEDULL));
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (pair.garment_dp.label(x, y) == 0) continue;
        if (rng.unit() < spec.speckle_dropout) pair.garment_dp.clear(x, y);
      }
    }
  }
  return pair;
}

// ---------------------------------------------------------------------------
// Ready-made fixtures on a 192 x 256 canvas.

namespace presets {

inline constexpr int kWidth = 192;
inline constexpr int kHeight = 256;

/// Torso (part 2) with two horizontal sleeves (parts 15 and 16) hinged at
/// the shoulders; sleeves rotate about their hinge by the given angles.
inline SynthSpec torso_and_sleeves(double left_deg = 0.0, double right_deg = 0.0,
                                   TextureSpec texture = {}, double dropout = 0.0,
                                   std::uint64_t seed = 0) {
  SynthSpec spec;
  spec.width = kWidth;
  spec.height = kHeight;
  spec.texture = texture;
  spec.speckle_dropout = dropout;
  spec.seed = seed;

  SynthPart torso{2, 56, 80, 80, 130, Affine2::chart_for_rect(56, 80, 80, 130), {}, true};
  SynthPart left{15, 6, 80, 50, 36, Affine2::chart_for_rect(6, 80, 50, 36), {}, true};
  SynthPart right{16, 136, 80, 50, 36, Affine2::chart_for_rect(136, 80, 50, 36), {}, true};
  left.placement = Affine2::rotation_about(left_deg, {55.5, 98.0});
  right.placement = Affine2::rotation_about(-right_deg, {135.5, 98.0});
  spec.parts = {torso, left, right};
  return spec;
}

/// One sleeve rotated by `degrees`.
inline SynthSpec sleeve_rotation(double degrees, double dropout = 0.2,
                                 TextureSpec texture = {}, std::uint64_t seed = 1) {
  return torso_and_sleeves(degrees, 0.0, texture, dropout, seed);
}

/// Whole garment translated by (tx, ty).
inline SynthSpec translated(double tx, double ty, TextureSpec texture = {}) {
  SynthSpec spec = torso_and_sleeves(0.0, 0.0, texture);
  for (auto& p : spec.parts) p.placement = Affine2::translation(tx, ty);
  return spec;
}

/// Random identity-placement fixture whose charts stretch every pixel over
/// more than one texel at `resolution`, so no two garment pixels share a
/// texel.
inline SynthSpec random_identity(std::uint64_t seed, int resolution = 256) {
  detail::UniformRng rng(seed);
  SynthSpec spec;
  spec.width = kWidth;
  spec.height = kHeight;
  spec.seed = seed;
  spec.texture.kind = static_cast<TextureKind>(rng.integer(0, 3));
  spec.texture.period = rng.uniform(6.0, 32.0);

  std::vector<int> ids(kPartCount);
  for (int i = 0; i < kPartCount; ++i) ids[static_cast<std::size_t>(i)] = i + 1;
  const int count = rng.integer(1, 4);
  for (int k = 0; k < count; ++k) {
    const int pick = rng.integer(k, kPartCount - 1);
    std::swap(ids[static_cast<std::size_t>(k)], ids[static_cast<std::size_t>(pick)]);
    SynthPart p;
    p.part_id = ids[static_cast<std::size_t>(k)];
    p.w = rng.integer(12, 100);
    p.h = rng.integer(12, 100);
    p.x = rng.integer(0, kWidth - p.w);
    p.y = rng.integer(0, kHeight - p.h);
    const double lo = std::min(1.0, std::max(0.5, 1.25 * std::max(p.w, p.h) / resolution));
    const double su = rng.uniform(lo, 1.0);
    const double sv = rng.uniform(lo, 1.0);
    const double u0 = rng.uniform(0.0, 1.0 - su);
    const double v0 = rng.uniform(0.0, 1.0 - sv);
    if (rng.integer(0, 1) == 0) {
      p.uv = Affine2::chart_for_rect(p.x, p.y, p.w, p.h, u0, v0, su, sv);
    } else {
      // Transposed chart: u follows y, v follows x.
      p.uv = {0.0, su / p.h, u0 + su * (0.5 - p.y) / p.h, sv / p.w, 0.0, v0 + sv * (0.5 - p.x) / p.w};
    }
    spec.parts.push_back(p);
  }
  return spec;
}

}  // namespace presets
}  // namespace densewarp
