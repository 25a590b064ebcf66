#pragma once

#include <optional>
#include <vector>

#include "densewarp/parallel.hpp"
#include "densewarp/raster.hpp"
#include "densewarp/sampling.hpp"
#include "densewarp/uv_atlas.hpp"

namespace densewarp {

/// Per-target-pixel source coordinate with a validity flag. Valid
/// coordinates lie inside the source image bounds.
class CoordGrid {
 public:
  CoordGrid(int width, int height, int source_width, int source_height)
      : coords_(width, height), valid_(width, height),
        source_width_(source_width), source_height_(source_height) {}

  int width() const noexcept { return coords_.width(); }
  int height() const noexcept { return coords_.height(); }
  int source_width() const noexcept { return source_width_; }
  int source_height() const noexcept { return source_height_; }

  bool valid(int x, int y) const noexcept { return valid_(x, y); }
  const Point2& coord(int x, int y) const noexcept { return coords_(x, y); }
  std::optional<Point2> at(int x, int y) const {
    return valid_(x, y) ? std::optional<Point2>(coords_(x, y)) : std::nullopt;
  }

  void set(int x, int y, const Point2& p) noexcept {
    coords_(x, y) = p;
    valid_.set(x, y, true);
  }

  const BinaryMask& validity() const noexcept { return valid_; }

 private:
  Plane<Point2> coords_;
  BinaryMask valid_;
  int source_width_;
  int source_height_;
};

/// Warped garment plus the pixels that received a source sample. Invalid
/// pixels are black.
struct WarpResult {
  RgbImage image;
  BinaryMask validity;
  /// Parts present in the query but absent from the garment atlas.
  std::vector<int> starved_parts;
};

namespace detail {

/// Looks up the atlas payload for every foreground region pixel.
template <class Payload, class Store>
void lookup_atlas(const BasicUvAtlas<Payload>& atlas, const DensePoseMap& p_dp,
                  const BinaryMask& region, const Exec& exec, Store&& store) {
  require_same_shape(p_dp, region, "atlas lookup");
  const int r = atlas.resolution();
  parallel_for(p_dp.height(), exec, [&](int y) {
    for (int x = 0; x < p_dp.width(); ++x) {
      const int part = p_dp.label(x, y);
      if (part == 0 || !region(x, y)) continue;
      const auto& texel = atlas.at(part, texel_index(p_dp.u(x, y), r), texel_index(p_dp.v(x, y), r));
      if (texel) store(x, y, *texel);
    }
  });
}

}  // namespace detail

/// Builds the warped coordinate grid: each region pixel of the person takes
/// the source coordinate stored at its (i, u, v) texel.
inline CoordGrid build_coord_grid(const UvAtlas& atlas, const DensePoseMap& p_dp,
                                  const BinaryMask& region, const Exec& exec = {}) {
  CoordGrid grid(p_dp.width(), p_dp.height(), atlas.source_width(), atlas.source_height());
  detail::lookup_atlas(atlas, p_dp, region, exec,
                       [&](int x, int y, const Point2& p) { grid.set(x, y, p); });
  return grid;
}

/// Bilinearly samples the source at every valid grid coordinate.
inline WarpResult gather(const RgbImage& src, const CoordGrid& grid, const Exec& exec = {}) {
  if (src.width() != grid.source_width() || src.height() != grid.source_height()) {
    throw DimensionError("gather: source image does not match the grid's source bounds");
  }
  WarpResult out{RgbImage(grid.width(), grid.height()), grid.validity(), {}};
  parallel_for(grid.height(), exec, [&](int y) {
    for (int x = 0; x < grid.width(); ++x) {
      if (!grid.valid(x, y)) continue;
      const Point2& p = grid.coord(x, y);
      out.image(x, y) = sample_bilinear(src, p.x, p.y);
    }
  });
  return out;
}

/// Naive mask transfer through UV space (no inpainting): a person pixel is
/// set iff its texel was hit by a garment mask pixel. The result is
/// expected to be sparse with holes and a ragged boundary.
inline BinaryMask warp_coarse_mask(const BinaryMask& g_mask, const DensePoseMap& g_dp,
                                   const DensePoseMap& p_dp, int resolution,
                                   const Exec& exec = {}) {
  const UvAtlas atlas = scatter_coords(g_dp, g_mask, resolution);
  BinaryMask out(p_dp.width(), p_dp.height());
  detail::lookup_atlas(atlas, p_dp, BinaryMask(p_dp.width(), p_dp.height(), true), exec,
                       [&](int x, int y, const Point2&) { out.set(x, y, true); });
  return out;
}

struct WarpOptions {
  int resolution = kDefaultResolution;
  /// Fill query texels from their nearest valid neighbor.
  bool use_inpaint = true;
  /// Transport coordinates and gather from the source image; when false,
  /// colors are scattered into the atlas and read back directly.
  bool use_grid = true;
  Exec exec{};
};

struct CoordWarp {
  CoordGrid grid;
  std::vector<int> starved_parts;
};

/// Scatter, query projection, optional fill and lookup: the coordinate half
/// of the pipeline, exposed for provenance checks.
inline CoordWarp compute_warp_grid(const DensePoseMap& g_dp, const BinaryMask& g_mask,
                                   const DensePoseMap& p_dp, const BinaryMask& m_q,
                                   const WarpOptions& options = {}) {
  detail::require_same_shape(g_dp, g_mask, "warp_garment (garment)");
  detail::require_same_shape(p_dp, m_q, "warp_garment (person)");
  UvAtlas atlas = scatter_coords(g_dp, g_mask, options.resolution);
  std::vector<int> starved;
  if (options.use_inpaint) {
    auto filled = inpaint_nn(atlas, project_mask_to_uv(p_dp, m_q, options.resolution), options.exec);
    atlas = std::move(filled.atlas);
    starved = std::move(filled.starved_parts);
  }
  return {build_coord_grid(atlas, p_dp, m_q, options.exec), std::move(starved)};
}

/// Warps the garment image onto the person's DensePose, restricted to the
/// query mask m_q.
inline WarpResult warp_garment(const RgbImage& g, const DensePoseMap& g_dp,
                               const BinaryMask& g_mask, const DensePoseMap& p_dp,
                               const BinaryMask& m_q, const WarpOptions& options = {}) {
  detail::require_same_shape(g, g_dp, "warp_garment (garment)");
  if (options.use_grid) {
    auto warp = compute_warp_grid(g_dp, g_mask, p_dp, m_q, options);
    WarpResult out = gather(g, warp.grid, options.exec);
    out.starved_parts = std::move(warp.starved_parts);
    return out;
  }

  detail::require_same_shape(g_dp, g_mask, "warp_garment (garment)");
  detail::require_same_shape(p_dp, m_q, "warp_garment (person)");
  ColorAtlas atlas = scatter_colors(g, g_dp, g_mask, options.resolution);
  WarpResult out{RgbImage(p_dp.width(), p_dp.height()), BinaryMask(p_dp.width(), p_dp.height()), {}};
  if (options.use_inpaint) {
    auto filled = inpaint_nn(atlas, project_mask_to_uv(p_dp, m_q, options.resolution), options.exec);
    atlas = std::move(filled.atlas);
    out.starved_parts = std::move(filled.starved_parts);
  }
  detail::lookup_atlas(atlas, p_dp, m_q, options.exec, [&](int x, int y, const Vec3& c) {
    out.image(x, y) = Rgb::from_vec(c);
    out.validity.set(x, y, true);
  });
  return out;
}

}  // namespace densewarp
