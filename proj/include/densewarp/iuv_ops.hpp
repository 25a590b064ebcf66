#pragma once

#include <cmath>
#include <cstdint>
#include <type_traits>

#include "densewarp/parallel.hpp"
#include "densewarp/raster.hpp"
#include "densewarp/sampling.hpp"

namespace densewarp {

/// Keeps the DensePose where the mask is set and clears it elsewhere.
inline DensePoseMap mask_densepose(const DensePoseMap& dp, const BinaryMask& mask) {
  detail::require_same_shape(dp, mask, "mask_densepose");
  DensePoseMap out(dp.width(), dp.height());
  for (int y = 0; y < dp.height(); ++y) {
    for (int x = 0; x < dp.width(); ++x) {
      if (mask(x, y)) out.set(x, y, dp.label(x, y), dp.u(x, y), dp.v(x, y));
    }
  }
  return out;
}

inline void require_finite(const FlowField& flow) {
  for (std::size_t k = 0; k < flow.dx.size(); ++k) {
    if (!std::isfinite(flow.dx.pixels()[k]) || !std::isfinite(flow.dy.pixels()[k])) {
      throw InvalidArgument("flow field contains non-finite offsets");
    }
  }
}

/// Backward warp: output (x, y) = src(x + dx, y + dy), clamped at the
/// borders. Integral planes (labels, masks) use nearest sampling, all
/// others bilinear.
template <class T>
Plane<T> flow_warp(const Plane<T>& src, const FlowField& flow, const Exec& exec = {}) {
  detail::require_same_shape(src, flow, "flow_warp");
  require_finite(flow);
  Plane<T> out(src.width(), src.height());
  parallel_for(src.height(), exec, [&](int y) {
    for (int x = 0; x < src.width(); ++x) {
      const double sx = x + static_cast<double>(flow.dx(x, y));
      const double sy = y + static_cast<double>(flow.dy(x, y));
      if constexpr (std::is_integral_v<T>) {
        out(x, y) = sample_nearest(src, sx, sy);
      } else {
        out(x, y) = sample_bilinear(src, sx, sy);
      }
    }
  });
  return out;
}

inline BinaryMask flow_warp(const BinaryMask& src, const FlowField& flow, const Exec& exec = {}) {
  detail::require_same_shape(src, flow, "flow_warp");
  require_finite(flow);
  BinaryMask out(src.width(), src.height());
  parallel_for(src.height(), exec, [&](int y) {
    for (int x = 0; x < src.width(); ++x) {
      const int sx = std::clamp(
          static_cast<int>(std::floor(x + static_cast<double>(flow.dx(x, y)) + 0.5)), 0,
          src.width() - 1);
      const int sy = std::clamp(
          static_cast<int>(std::floor(y + static_cast<double>(flow.dy(x, y)) + 0.5)), 0,
          src.height() - 1);
      out.set(x, y, src(sx, sy));
    }
  });
  return out;
}

/// Warps all three DensePose planes. The label is sampled nearest; u and v
/// bilinearly. Pixels whose warped label is background are cleared so the
/// result keeps the map invariants.
inline DensePoseMap flow_warp(const DensePoseMap& src, const FlowField& flow,
                              const Exec& exec = {}) {
  const auto labels = flow_warp(src.i_plane(), flow, exec);
  const auto u = flow_warp(src.u_plane(), flow, exec);
  const auto v = flow_warp(src.v_plane(), flow, exec);
  DensePoseMap out(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      out.set(x, y, labels(x, y), u(x, y), v(x, y));
    }
  }
  return out;
}

}  // namespace densewarp
