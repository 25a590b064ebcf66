#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "densewarp/errors.hpp"

namespace densewarp {

/// Number of body parts in the DensePose chart; label 0 is background.
inline constexpr int kPartCount = 24;

/// Row-major single-plane raster.
template <class T>
class Plane {
 public:
  using value_type = T;

  Plane() = default;
  Plane(int width, int height, const T& fill = T{}) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      throw InvalidArgument("raster dimensions must be positive, got " +
                            detail::shape_string(width, height));
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }

  std::span<T> row(int y) noexcept {
    return std::span<T>(data_).subspan(index(0, y), static_cast<std::size_t>(width_));
  }
  std::span<const T> row(int y) const noexcept {
    return std::span<const T>(data_).subspan(index(0, y), static_cast<std::size_t>(width_));
  }

  bool operator==(const Plane&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Real-valued image point; pixel (x, y) has its center at exactly (x, y).
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator/(Point2 a, double s) { return {a.x / s, a.y / s}; }
  bool operator==(const Point2&) const = default;
};

/// Double-precision color used for accumulation and as an atlas payload.
struct Vec3 {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.r + b.r, a.g + b.g, a.b + b.b}; }
  friend Vec3 operator*(Vec3 a, double s) { return {a.r * s, a.g * s, a.b * s}; }
  friend Vec3 operator/(Vec3 a, double s) { return {a.r / s, a.g / s, a.b / s}; }
  bool operator==(const Vec3&) const = default;
};

/// Stored RGB pixel, channels in [0,1].
struct Rgb {
  float r = 0.0F;
  float g = 0.0F;
  float b = 0.0F;

  Vec3 to_vec() const { return {r, g, b}; }
  static Rgb from_vec(const Vec3& v) {
    return {static_cast<float>(v.r), static_cast<float>(v.g), static_cast<float>(v.b)};
  }
  bool operator==(const Rgb&) const = default;
};

using RgbImage = Plane<Rgb>;
using RealPlane = Plane<float>;
using LabelPlane = Plane<std::uint8_t>;

/// Strictly boolean raster (stored as 0/1 bytes).
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false)
      : bits_(width, height, fill ? std::uint8_t{1} : std::uint8_t{0}) {}

  int width() const noexcept { return bits_.width(); }
  int height() const noexcept { return bits_.height(); }
  std::size_t size() const noexcept { return bits_.size(); }
  bool contains(int x, int y) const noexcept { return bits_.contains(x, y); }

  bool operator()(int x, int y) const noexcept { return bits_(x, y) != 0; }
  void set(int x, int y, bool value) noexcept { bits_(x, y) = value ? 1 : 0; }

  bool at_index(std::size_t i) const noexcept { return bits_.pixels()[i] != 0; }
  void set_index(std::size_t i, bool value) noexcept { bits_.pixels()[i] = value ? 1 : 0; }

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(
        std::count(bits_.pixels().begin(), bits_.pixels().end(), std::uint8_t{1}));
  }

  bool operator==(const BinaryMask&) const = default;

 private:
  Plane<std::uint8_t> bits_;
};

inline BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
  detail::require_same_shape(a, b, "mask_and");
  BinaryMask out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out.set_index(i, a.at_index(i) && b.at_index(i));
  return out;
}

inline BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
  detail::require_same_shape(a, b, "mask_or");
  BinaryMask out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out.set_index(i, a.at_index(i) || b.at_index(i));
  return out;
}

/// a ⊆ b
inline bool mask_subset(const BinaryMask& a, const BinaryMask& b) {
  detail::require_same_shape(a, b, "mask_subset");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.at_index(i) && !b.at_index(i)) return false;
  }
  return true;
}

/// Per-pixel body-part label plus UV chart coordinates.
///
/// Invariants held by every mutator: labels in [0, 24], u and v clamped to
/// [0, 1], and background pixels carry u = v = 0.
class DensePoseMap {
 public:
  DensePoseMap() = default;
  DensePoseMap(int width, int height)
      : i_(width, height, 0), u_(width, height, 0.0F), v_(width, height, 0.0F) {}

  int width() const noexcept { return i_.width(); }
  int height() const noexcept { return i_.height(); }

  int label(int x, int y) const noexcept { return i_(x, y); }
  float u(int x, int y) const noexcept { return u_(x, y); }
  float v(int x, int y) const noexcept { return v_(x, y); }

  /// Writes one pixel, enforcing the invariants. Throws on a label outside
  /// [0, 24] or non-finite coordinates.
  void set(int x, int y, int label, float u, float v) {
    if (label < 0 || label > kPartCount) {
      throw FormatError("label " + std::to_string(label) + " out of range [0,24]");
    }
    if (!std::isfinite(u) || !std::isfinite(v)) throw FormatError("non-finite u/v coordinate");
    i_(x, y) = static_cast<std::uint8_t>(label);
    if (label == 0) {
      u_(x, y) = 0.0F;
      v_(x, y) = 0.0F;
    } else {
      u_(x, y) = std::clamp(u, 0.0F, 1.0F);
      v_(x, y) = std::clamp(v, 0.0F, 1.0F);
    }
  }

  void clear(int x, int y) noexcept {
    i_(x, y) = 0;
    u_(x, y) = 0.0F;
    v_(x, y) = 0.0F;
  }

  const LabelPlane& i_plane() const noexcept { return i_; }
  const RealPlane& u_plane() const noexcept { return u_; }
  const RealPlane& v_plane() const noexcept { return v_; }

  /// Foreground pixels (label >= 1).
  BinaryMask foreground() const {
    BinaryMask out(width(), height());
    for (std::size_t k = 0; k < i_.size(); ++k) out.set_index(k, i_.pixels()[k] != 0);
    return out;
  }

  bool operator==(const DensePoseMap&) const = default;

 private:
  LabelPlane i_;
  RealPlane u_;
  RealPlane v_;
};

/// Per-pixel sampling offsets: output (x, y) reads the source at
/// (x + dx, y + dy).
struct FlowField {
  RealPlane dx;
  RealPlane dy;

  FlowField() = default;
  FlowField(int width, int height) : dx(width, height, 0.0F), dy(width, height, 0.0F) {}

  int width() const noexcept { return dx.width(); }
  int height() const noexcept { return dx.height(); }
  bool operator==(const FlowField&) const = default;
};

}  // namespace densewarp
