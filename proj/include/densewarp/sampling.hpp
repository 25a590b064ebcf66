#pragma once

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "densewarp/raster.hpp"

namespace densewarp {
namespace detail {

template <class T>
struct Interp {
  using Acc = double;
  static double load(const T& v) { return static_cast<double>(v); }
  static T store(double v) { return static_cast<T>(v); }
};

template <>
struct Interp<Rgb> {
  using Acc = Vec3;
  static Vec3 load(const Rgb& v) { return v.to_vec(); }
  static Rgb store(const Vec3& v) { return Rgb::from_vec(v); }
};

}  // namespace detail

/// Bilinear sample at real coordinates with clamp-to-edge. Integer
/// coordinates return the stored pixel exactly.
template <class T>
T sample_bilinear(const Plane<T>& src, double x, double y) {
  using I = detail::Interp<T>;
  const double cx = std::clamp(x, 0.0, static_cast<double>(src.width() - 1));
  const double cy = std::clamp(y, 0.0, static_cast<double>(src.height() - 1));
  const int x0 = static_cast<int>(std::floor(cx));
  const int y0 = static_cast<int>(std::floor(cy));
  const int x1 = std::min(x0 + 1, src.width() - 1);
  const int y1 = std::min(y0 + 1, src.height() - 1);
  const double fx = cx - x0;
  const double fy = cy - y0;

  const auto top = I::load(src(x0, y0)) * (1.0 - fx) + I::load(src(x1, y0)) * fx;
  const auto bottom = I::load(src(x0, y1)) * (1.0 - fx) + I::load(src(x1, y1)) * fx;
  return I::store(top * (1.0 - fy) + bottom * fy);
}

/// Nearest sample (round half up) with clamp-to-edge.
template <class T>
const T& sample_nearest(const Plane<T>& src, double x, double y) {
  const int xi = std::clamp(static_cast<int>(std::floor(x + 0.5)), 0, src.width() - 1);
  const int yi = std::clamp(static_cast<int>(std::floor(y + 0.5)), 0, src.height() - 1);
  return src(xi, yi);
}

}  // namespace densewarp
