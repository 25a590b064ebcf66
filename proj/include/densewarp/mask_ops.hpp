#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "densewarp/random.hpp"
#include "densewarp/raster.hpp"

namespace densewarp {

// ---------------------------------------------------------------------------
// Morphology. Pixels outside the image are ignored, so shapes touching the
// border are not eroded by it.

enum class Structuring { Disk, Square };

namespace detail {

/// Half-widths of the structuring element for dy = -r..r.
inline std::vector<int> element_rows(int radius, Structuring shape) {
  std::vector<int> half(static_cast<std::size_t>(2 * radius + 1));
  for (int dy = -radius; dy <= radius; ++dy) {
    half[static_cast<std::size_t>(dy + radius)] =
        shape == Structuring::Square
            ? radius
            : static_cast<int>(std::floor(std::sqrt(static_cast<double>(radius * radius - dy * dy))));
  }
  return half;
}

inline BinaryMask morph(const BinaryMask& in, int radius, Structuring shape, bool erode) {
  if (radius <= 0) return in;
  const int w = in.width();
  const int h = in.height();
  // prefix[y][x] = number of set pixels in row y before column x.
  std::vector<int> prefix(static_cast<std::size_t>(h) * (w + 1), 0);
  for (int y = 0; y < h; ++y) {
    int* row = &prefix[static_cast<std::size_t>(y) * (w + 1)];
    for (int x = 0; x < w; ++x) row[x + 1] = row[x] + (in(x, y) ? 1 : 0);
  }
  const auto half = element_rows(radius, shape);

  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int set = 0;
      int total = 0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        const int hw = half[static_cast<std::size_t>(dy + radius)];
        const int x0 = std::max(0, x - hw);
        const int x1 = std::min(w - 1, x + hw);
        const int* row = &prefix[static_cast<std::size_t>(yy) * (w + 1)];
        set += row[x1 + 1] - row[x0];
        total += x1 - x0 + 1;
      }
      out.set(x, y, erode ? set == total : set > 0);
    }
  }
  return out;
}

}  // namespace detail

inline BinaryMask dilate(const BinaryMask& m, int radius, Structuring shape = Structuring::Disk) {
  return detail::morph(m, radius, shape, false);
}

inline BinaryMask erode(const BinaryMask& m, int radius, Structuring shape = Structuring::Disk) {
  return detail::morph(m, radius, shape, true);
}

inline BinaryMask closing(const BinaryMask& m, int radius, Structuring shape = Structuring::Disk) {
  return erode(dilate(m, radius, shape), radius, shape);
}

inline BinaryMask opening(const BinaryMask& m, int radius, Structuring shape = Structuring::Disk) {
  return dilate(erode(m, radius, shape), radius, shape);
}

/// Connected components of pixels equal to `value`; returns per-pixel
/// labels (-1 for other pixels) and the size of each component.
struct Components {
  Plane<int> labels;
  std::vector<std::size_t> sizes;
  std::vector<std::uint8_t> touches_border;
};

inline Components connected_components(const BinaryMask& m, bool value, bool eight_connected) {
  const int w = m.width();
  const int h = m.height();
  Components c{Plane<int>(w, h, -1), {}, {}};
  std::vector<std::pair<int, int>> stack;
  static constexpr std::array<std::array<int, 2>, 8> kSteps = {
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
  const std::size_t steps = eight_connected ? 8 : 4;

  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      if (m(x0, y0) != value || c.labels(x0, y0) >= 0) continue;
      const int id = static_cast<int>(c.sizes.size());
      std::size_t size = 0;
      bool border = false;
      c.labels(x0, y0) = id;
      stack.push_back({x0, y0});
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        ++size;
        border = border || x == 0 || y == 0 || x == w - 1 || y == h - 1;
        for (std::size_t s = 0; s < steps; ++s) {
          const int nx = x + kSteps[s][0];
          const int ny = y + kSteps[s][1];
          if (!m.contains(nx, ny) || m(nx, ny) != value || c.labels(nx, ny) >= 0) continue;
          c.labels(nx, ny) = id;
          stack.push_back({nx, ny});
        }
      }
      c.sizes.push_back(size);
      c.touches_border.push_back(border ? 1 : 0);
    }
  }
  return c;
}

/// Sets every enclosed background region (4-connected, not touching the
/// image border) smaller than `min_area` pixels.
inline BinaryMask fill_holes(const BinaryMask& m, std::size_t min_area) {
  const auto bg = connected_components(m, false, false);
  BinaryMask out = m;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      const int id = bg.labels(x, y);
      if (id < 0) continue;
      const auto k = static_cast<std::size_t>(id);
      if (bg.touches_border[k] == 0 && bg.sizes[k] < min_area) out.set(x, y, true);
    }
  }
  return out;
}

/// Largest 8-connected foreground component (first in row-major order on
/// ties); empty input gives an empty mask.
inline BinaryMask largest_component(const BinaryMask& m) {
  const auto fg = connected_components(m, true, true);
  BinaryMask out(m.width(), m.height());
  if (fg.sizes.empty()) return out;
  const auto best = static_cast<int>(
      std::max_element(fg.sizes.begin(), fg.sizes.end()) - fg.sizes.begin());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) out.set(x, y, fg.labels(x, y) == best);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Query-mask refinement

struct RefineParams {
  int close_radius = 5;
  std::size_t min_hole_area = 64;
  int smooth_radius = 3;
};

/// Deterministic refinement of a coarse warped mask: disk closing, small
/// hole filling, then a square opening and closing to smooth the boundary.
/// Axis-aligned rectangles wider than the smoothing square pass unchanged.
inline BinaryMask refine_mask(const BinaryMask& coarse, const RefineParams& params = {}) {
  if (params.close_radius < 0 || params.smooth_radius < 0) {
    throw InvalidArgument("refine_mask: radii must be non-negative");
  }
  BinaryMask m = closing(coarse, params.close_radius, Structuring::Disk);
  m = fill_holes(m, params.min_hole_area);
  m = opening(m, params.smooth_radius, Structuring::Square);
  return closing(m, params.smooth_radius, Structuring::Square);
}

// ---------------------------------------------------------------------------
// Generator-side inputs

/// Arm and hand labels of the 24-part chart: hands 3-4, upper arms 15-18,
/// lower arms 19-22.
inline constexpr std::array<int, 10> kArmHandParts = {3, 4, 15, 16, 17, 18, 19, 20, 21, 22};

inline bool is_arm_or_hand(int label) noexcept {
  return std::find(kArmHandParts.begin(), kArmHandParts.end(), label) != kArmHandParts.end();
}

/// Arm and hand pixels not covered by the warped garment.
inline BinaryMask derive_arm_mask(const DensePoseMap& p_dp, const BinaryMask& warped_validity) {
  detail::require_same_shape(p_dp, warped_validity, "derive_arm_mask");
  BinaryMask out(p_dp.width(), p_dp.height());
  for (int y = 0; y < p_dp.height(); ++y) {
    for (int x = 0; x < p_dp.width(); ++x) {
      out.set(x, y, is_arm_or_hand(p_dp.label(x, y)) && !warped_validity(x, y));
    }
  }
  return out;
}

/// Replaces the upper-body region with the mean skin color (mid-gray when
/// no skin pixel is available).
inline RgbImage preprocess_person(const RgbImage& p, const BinaryMask& upper_mask,
                                  const BinaryMask& skin_mask) {
  detail::require_same_shape(p, upper_mask, "preprocess_person");
  detail::require_same_shape(p, skin_mask, "preprocess_person");
  Vec3 sum;
  std::size_t n = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!skin_mask.at_index(k)) continue;
    sum = sum + p.pixels()[k].to_vec();
    ++n;
  }
  const Rgb fill = n == 0 ? Rgb{0.5F, 0.5F, 0.5F} : Rgb::from_vec(sum / static_cast<double>(n));
  RgbImage out = p;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (upper_mask.at_index(k)) out.pixels()[k] = fill;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Free-form training masks

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct RealRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Random brush-stroke parameters. Segment lengths are drawn from
/// [0.02, 0.15] times the longer image side.
struct BrushSpec {
  IntRange stroke_count{1, 5};
  IntRange vertex_count{4, 12};
  RealRange brush_width{8.0, 32.0};
  double max_turn_angle = 100.0 * std::numbers::pi / 180.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (stroke_count.lo < 0 || stroke_count.lo > stroke_count.hi) {
      throw InvalidArgument("BrushSpec: invalid stroke count range");
    }
    if (vertex_count.lo < 1 || vertex_count.lo > vertex_count.hi) {
      throw InvalidArgument("BrushSpec: invalid vertex count range");
    }
    if (!(brush_width.lo > 0.0) || brush_width.lo > brush_width.hi) {
      throw InvalidArgument("BrushSpec: brush widths must be positive and ordered");
    }
    if (!(max_turn_angle >= 0.0)) throw InvalidArgument("BrushSpec: negative turn angle");
  }
};

namespace detail {

/// Sets every pixel within `radius` of segment p-q (a capsule).
inline void stamp_segment(BinaryMask& m, double px, double py, double qx, double qy,
                          double radius) {
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(px, qx) - radius)));
  const int x1 = std::min(m.width() - 1, static_cast<int>(std::ceil(std::max(px, qx) + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(py, qy) - radius)));
  const int y1 = std::min(m.height() - 1, static_cast<int>(std::ceil(std::max(py, qy) + radius)));
  const double dx = qx - px;
  const double dy = qy - py;
  const double len2 = dx * dx + dy * dy;
  const double r2 = radius * radius;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double t = len2 > 0.0 ? ((x - px) * dx + (y - py) * dy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double ex = px + t * dx - x;
      const double ey = py + t * dy - y;
      if (ex * ex + ey * ey <= r2) m.set(x, y, true);
    }
  }
}

}  // namespace detail

/// Union of random thick polyline strokes; a pure function of its
/// arguments.
inline BinaryMask free_form_mask(int width, int height, const BrushSpec& spec) {
  spec.validate();
  BinaryMask mask(width, height);
  detail::UniformRng rng(spec.seed);
  const double side = std::max(width, height);

  const int strokes = rng.integer(spec.stroke_count.lo, spec.stroke_count.hi);
  for (int s = 0; s < strokes; ++s) {
    double x = rng.uniform(0.0, width);
    double y = rng.uniform(0.0, height);
    double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double radius = 0.5 * rng.uniform(spec.brush_width.lo, spec.brush_width.hi);
    const int vertices = rng.integer(spec.vertex_count.lo, spec.vertex_count.hi);
    for (int v = 0; v < vertices; ++v) {
      heading += rng.uniform(-spec.max_turn_angle, spec.max_turn_angle);
      const double length = rng.uniform(0.02 * side, 0.15 * side);
      const double nx = std::clamp(x + length * std::cos(heading), 0.0, width - 1.0);
      const double ny = std::clamp(y + length * std::sin(heading), 0.0, height - 1.0);
      detail::stamp_segment(mask, x, y, nx, ny, radius);
      x = nx;
      y = ny;
    }
  }
  return mask;
}

}  // namespace densewarp
