#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "densewarp/parallel.hpp"
#include "densewarp/raster.hpp"

namespace densewarp {

/// Texels per atlas side used when the caller does not choose one.
inline constexpr int kDefaultResolution = 256;

/// Discretizes a chart coordinate in [0,1] onto an R-texel axis. The same
/// rule is used for scattering and for lookups.
inline int texel_index(float uv, int resolution) noexcept {
  const int t = static_cast<int>(std::floor(static_cast<double>(uv) * resolution));
  return std::clamp(t, 0, resolution - 1);
}

/// Center of texel `index` in chart coordinates.
inline double texel_center(int index, int resolution) noexcept {
  return (index + 0.5) / resolution;
}

namespace detail {
inline void require_part(int part) {
  if (part < 1 || part > kPartCount) {
    throw InvalidArgument("part index " + std::to_string(part) + " out of range [1,24]");
  }
}
inline void require_resolution(int resolution) {
  if (resolution < 1) {
    throw InvalidArgument("atlas resolution must be >= 1, got " + std::to_string(resolution));
  }
}
}  // namespace detail

/// Per-part R x R texel grids, each texel optionally holding a payload.
///
/// Texel (part, a, b) covers chart coordinates around
/// ((a + 0.5) / R, (b + 0.5) / R); `a` follows u, `b` follows v. Part grids
/// are allocated on first write, so untouched parts cost nothing.
template <class Payload>
class BasicUvAtlas {
 public:
  using payload_type = Payload;

  BasicUvAtlas(int resolution, int source_width, int source_height)
      : resolution_(resolution),
        source_width_(source_width),
        source_height_(source_height),
        parts_(kPartCount) {
    detail::require_resolution(resolution);
  }

  int resolution() const noexcept { return resolution_; }
  /// Bounds of the image the payloads were gathered from.
  int source_width() const noexcept { return source_width_; }
  int source_height() const noexcept { return source_height_; }

  const std::optional<Payload>& at(int part, int a, int b) const {
    static const std::optional<Payload> kEmpty;
    const auto& grid = parts_[static_cast<std::size_t>(part - 1)];
    return grid.empty() ? kEmpty : grid[offset(a, b)];
  }

  bool valid(int part, int a, int b) const { return at(part, a, b).has_value(); }

  void set(int part, int a, int b, const Payload& payload) {
    grid(part)[offset(a, b)] = payload;
  }

  /// Whether any texel of `part` was ever allocated.
  bool part_allocated(int part) const { return !parts_[static_cast<std::size_t>(part - 1)].empty(); }

  std::size_t valid_count(int part) const {
    const auto& g = parts_[static_cast<std::size_t>(part - 1)];
    return static_cast<std::size_t>(
        std::count_if(g.begin(), g.end(), [](const auto& t) { return t.has_value(); }));
  }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (int p = 1; p <= kPartCount; ++p) n += valid_count(p);
    return n;
  }

  bool operator==(const BasicUvAtlas&) const = default;

 private:
  std::size_t offset(int a, int b) const noexcept {
    return static_cast<std::size_t>(b) * static_cast<std::size_t>(resolution_) +
           static_cast<std::size_t>(a);
  }

  std::vector<std::optional<Payload>>& grid(int part) {
    auto& g = parts_[static_cast<std::size_t>(part - 1)];
    if (g.empty()) g.resize(static_cast<std::size_t>(resolution_) * resolution_);
    return g;
  }

  int resolution_;
  int source_width_;
  int source_height_;
  std::vector<std::vector<std::optional<Payload>>> parts_;
};

/// Atlas of garment pixel coordinates.
using UvAtlas = BasicUvAtlas<Point2>;
/// Atlas of garment colors (the RGB-scatter path).
using ColorAtlas = BasicUvAtlas<Vec3>;

/// Per-part boolean texel grids marking where filling is allowed.
class UvQueryMask {
 public:
  explicit UvQueryMask(int resolution) : resolution_(resolution), parts_(kPartCount) {
    detail::require_resolution(resolution);
  }

  int resolution() const noexcept { return resolution_; }

  bool operator()(int part, int a, int b) const {
    const auto& g = parts_[static_cast<std::size_t>(part - 1)];
    return !g.empty() && g[offset(a, b)] != 0;
  }

  void set(int part, int a, int b) {
    auto& g = parts_[static_cast<std::size_t>(part - 1)];
    if (g.empty()) g.assign(static_cast<std::size_t>(resolution_) * resolution_, 0);
    g[offset(a, b)] = 1;
  }

  std::size_t count(int part) const {
    const auto& g = parts_[static_cast<std::size_t>(part - 1)];
    return static_cast<std::size_t>(std::count(g.begin(), g.end(), std::uint8_t{1}));
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (int p = 1; p <= kPartCount; ++p) n += count(p);
    return n;
  }

  bool operator==(const UvQueryMask&) const = default;

 private:
  std::size_t offset(int a, int b) const noexcept {
    return static_cast<std::size_t>(b) * static_cast<std::size_t>(resolution_) +
           static_cast<std::size_t>(a);
  }

  int resolution_;
  std::vector<std::vector<std::uint8_t>> parts_;
};

// ---------------------------------------------------------------------------
// Scatter / projection

/// Scatters a per-pixel payload into UV space. Every foreground pixel under
/// the mask lands in texel (i, floor(u R), floor(v R)); texels hit by
/// several pixels receive the mean of their payloads.
///
/// `payload_at(x, y)` must return a type supporting `+` and `/ double`.
template <class Payload, class PayloadFn>
BasicUvAtlas<Payload> scatter(const DensePoseMap& dp, const BinaryMask& mask, int resolution,
                              PayloadFn&& payload_at) {
  detail::require_same_shape(dp, mask, "scatter");
  detail::require_resolution(resolution);
  const std::size_t texels = static_cast<std::size_t>(resolution) * resolution;
  std::vector<std::vector<Payload>> sums(kPartCount);
  std::vector<std::vector<int>> counts(kPartCount);

  for (int y = 0; y < dp.height(); ++y) {
    for (int x = 0; x < dp.width(); ++x) {
      const int part = dp.label(x, y);
      if (part == 0 || !mask(x, y)) continue;
      const auto p = static_cast<std::size_t>(part - 1);
      if (sums[p].empty()) {
        sums[p].assign(texels, Payload{});
        counts[p].assign(texels, 0);
      }
      const std::size_t t =
          static_cast<std::size_t>(texel_index(dp.v(x, y), resolution)) * resolution +
          static_cast<std::size_t>(texel_index(dp.u(x, y), resolution));
      sums[p][t] = sums[p][t] + payload_at(x, y);
      ++counts[p][t];
    }
  }

  BasicUvAtlas<Payload> atlas(resolution, dp.width(), dp.height());
  for (int part = 1; part <= kPartCount; ++part) {
    const auto p = static_cast<std::size_t>(part - 1);
    for (std::size_t t = 0; t < counts[p].size(); ++t) {
      if (counts[p][t] == 0) continue;
      atlas.set(part, static_cast<int>(t % resolution), static_cast<int>(t / resolution),
                sums[p][t] / static_cast<double>(counts[p][t]));
    }
  }
  return atlas;
}

/// Scatters garment pixel coordinates (x, y) into UV space.
inline UvAtlas scatter_coords(const DensePoseMap& g_dp, const BinaryMask& g_mask, int resolution) {
  return scatter<Point2>(g_dp, g_mask, resolution, [](int x, int y) {
    return Point2{static_cast<double>(x), static_cast<double>(y)};
  });
}

/// Scatters garment colors into UV space.
inline ColorAtlas scatter_colors(const RgbImage& g, const DensePoseMap& g_dp,
                                 const BinaryMask& g_mask, int resolution) {
  detail::require_same_shape(g, g_dp, "scatter_colors");
  return scatter<Vec3>(g_dp, g_mask, resolution, [&](int x, int y) { return g(x, y).to_vec(); });
}

/// Marks every texel reached by a masked foreground person pixel.
inline UvQueryMask project_mask_to_uv(const DensePoseMap& p_dp, const BinaryMask& m_q,
                                      int resolution) {
  detail::require_same_shape(p_dp, m_q, "project_mask_to_uv");
  UvQueryMask query(resolution);
  for (int y = 0; y < p_dp.height(); ++y) {
    for (int x = 0; x < p_dp.width(); ++x) {
      const int part = p_dp.label(x, y);
      if (part == 0 || !m_q(x, y)) continue;
      query.set(part, texel_index(p_dp.u(x, y), resolution),
                texel_index(p_dp.v(x, y), resolution));
    }
  }
  return query;
}

// ---------------------------------------------------------------------------
// Nearest-neighbor fill

/// Static 2-D tree over integer texel positions answering exact nearest
/// queries under the total order (squared distance, b, a).
class TexelTree {
 public:
  struct Texel {
    int a = 0;
    int b = 0;
  };

  explicit TexelTree(std::vector<Texel> texels) : nodes_(std::move(texels)) {
    build(0, nodes_.size(), 0);
  }

  bool empty() const noexcept { return nodes_.empty(); }

  /// Nearest stored texel to (a, b); ties go to the smallest b, then a.
  Texel nearest(int a, int b) const {
    Best best;
    search(0, nodes_.size(), 0, a, b, best);
    return nodes_[best.index];
  }

 private:
  struct Best {
    long long d2 = -1;
    std::size_t index = 0;
  };

  static int coord(const Texel& t, int axis) { return axis == 0 ? t.a : t.b; }

  // Median split: the node for [lo, hi) sits at mid = (lo + hi) / 2.
  void build(std::size_t lo, std::size_t hi, int axis) {
    if (hi - lo <= 1) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(nodes_.begin() + static_cast<std::ptrdiff_t>(lo),
                     nodes_.begin() + static_cast<std::ptrdiff_t>(mid),
                     nodes_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [axis](const Texel& l, const Texel& r) { return coord(l, axis) < coord(r, axis); });
    build(lo, mid, axis ^ 1);
    build(mid + 1, hi, axis ^ 1);
  }

  void consider(std::size_t i, int a, int b, Best& best) const {
    const Texel& t = nodes_[i];
    const long long da = t.a - a;
    const long long db = t.b - b;
    const long long d2 = da * da + db * db;
    if (best.d2 < 0 || d2 < best.d2) {
      best = {d2, i};
      return;
    }
    if (d2 == best.d2) {
      const Texel& cur = nodes_[best.index];
      if (t.b < cur.b || (t.b == cur.b && t.a < cur.a)) best.index = i;
    }
  }

  void search(std::size_t lo, std::size_t hi, int axis, int a, int b, Best& best) const {
    if (lo >= hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    consider(mid, a, b, best);
    if (hi - lo == 1) return;

    const long long diff = static_cast<long long>(axis == 0 ? a : b) - coord(nodes_[mid], axis);
    const bool go_left = diff < 0;
    if (go_left) {
      search(lo, mid, axis ^ 1, a, b, best);
    } else {
      search(mid + 1, hi, axis ^ 1, a, b, best);
    }
    // Equal-distance candidates on the far side can still win the tie-break.
    if (diff * diff <= best.d2) {
      if (go_left) {
        search(mid + 1, hi, axis ^ 1, a, b, best);
      } else {
        search(lo, mid, axis ^ 1, a, b, best);
      }
    }
  }

  std::vector<Texel> nodes_;
};

template <class Payload>
struct InpaintResult {
  BasicUvAtlas<Payload> atlas;
  /// Parts with query texels but no valid source texel; their query texels
  /// stay invalid.
  std::vector<int> starved_parts;
};

/// Fills every query texel lacking a payload with the payload of the
/// nearest valid texel of the same part (Euclidean distance on texel
/// indices, ties to the smallest b then a). Valid texels are untouched and
/// texels outside the query stay as they are.
template <class Payload>
InpaintResult<Payload> inpaint_nn(const BasicUvAtlas<Payload>& atlas, const UvQueryMask& query,
                                  const Exec& exec = {}) {
  if (atlas.resolution() != query.resolution()) {
    throw DimensionError("inpaint_nn: atlas resolution " + std::to_string(atlas.resolution()) +
                         " differs from query resolution " + std::to_string(query.resolution()));
  }
  const int r = atlas.resolution();
  InpaintResult<Payload> result{atlas, {}};
  std::vector<std::uint8_t> starved(kPartCount, 0);

  parallel_for(kPartCount, exec, [&](int p) {
    const int part = p + 1;
    if (query.count(part) == 0) return;

    std::vector<TexelTree::Texel> sources;
    std::vector<TexelTree::Texel> holes;
    for (int b = 0; b < r; ++b) {
      for (int a = 0; a < r; ++a) {
        if (atlas.valid(part, a, b)) {
          sources.push_back({a, b});
        } else if (query(part, a, b)) {
          holes.push_back({a, b});
        }
      }
    }
    if (holes.empty()) return;
    if (sources.empty()) {
      starved[static_cast<std::size_t>(p)] = 1;
      return;
    }
    const TexelTree tree(std::move(sources));
    for (const auto& hole : holes) {
      const auto src = tree.nearest(hole.a, hole.b);
      result.atlas.set(part, hole.a, hole.b, *atlas.at(part, src.a, src.b));
    }
  });

  for (int p = 0; p < kPartCount; ++p) {
    if (starved[static_cast<std::size_t>(p)] != 0) result.starved_parts.push_back(p + 1);
  }
  return result;
}

}  // namespace densewarp
