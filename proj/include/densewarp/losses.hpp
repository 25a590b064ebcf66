#pragma once

// Forward evaluations of the training objectives that need no pretrained
// feature network. All losses are means, so magnitudes do not depend on
// resolution.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

#include "densewarp/raster.hpp"
#include "densewarp/warp_engine.hpp"

namespace densewarp {

/// Per-pixel class logits, laid out class-major ([class][y][x]).
class LogitStack {
 public:
  static constexpr int kClasses = kPartCount + 1;

  LogitStack(int width, int height, double fill = 0.0) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw InvalidArgument("LogitStack: dimensions must be positive");
    data_.assign(static_cast<std::size_t>(kClasses) * width * height, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int classes() const noexcept { return kClasses; }

  double& operator()(int c, int x, int y) noexcept { return data_[offset(c, x, y)]; }
  double operator()(int c, int x, int y) const noexcept { return data_[offset(c, x, y)]; }

  std::vector<double>& values() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

 private:
  std::size_t offset(int c, int x, int y) const noexcept {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int width_;
  int height_;
  std::vector<double> data_;
};

/// Mean of -log softmax(logits)[target] over counted pixels; background
/// pixels are skipped when `ignore_background` is set. No counted pixel
/// gives 0.
inline double cross_entropy(const LogitStack& logits, const LabelPlane& target,
                            bool ignore_background = false) {
  detail::require_same_shape(logits, target, "cross_entropy");
  double sum = 0.0;
  std::size_t counted = 0;
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      const int t = target(x, y);
      if (t > kPartCount) {
        throw InvalidArgument("cross_entropy: target label " + std::to_string(t) +
                              " out of range [0,24]");
      }
      if (ignore_background && t == 0) continue;
      double peak = logits(0, x, y);
      for (int c = 1; c < LogitStack::kClasses; ++c) peak = std::max(peak, logits(c, x, y));
      double z = 0.0;
      for (int c = 0; c < LogitStack::kClasses; ++c) z += std::exp(logits(c, x, y) - peak);
      sum += peak + std::log(z) - logits(t, x, y);
      ++counted;
    }
  }
  return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

/// Mean absolute difference over all pixels.
template <std::floating_point T>
double l1(const Plane<T>& pred, const Plane<T>& target) {
  detail::require_same_shape(pred, target, "l1");
  double sum = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    sum += std::abs(static_cast<double>(pred.pixels()[k]) - static_cast<double>(target.pixels()[k]));
  }
  return sum / static_cast<double>(pred.size());
}

/// Mean absolute difference over the masked pixels; an empty mask gives 0.
template <std::floating_point T>
double l1(const Plane<T>& pred, const Plane<T>& target, const BinaryMask& mask) {
  detail::require_same_shape(pred, target, "l1");
  detail::require_same_shape(pred, mask, "l1");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    if (!mask.at_index(k)) continue;
    sum += std::abs(static_cast<double>(pred.pixels()[k]) - static_cast<double>(target.pixels()[k]));
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

/// Anisotropic total variation: mean horizontal absolute difference plus
/// mean vertical absolute difference, each over its own count.
template <std::floating_point T>
double total_variation(const Plane<T>& plane) {
  if (plane.width() < 2 || plane.height() < 2) {
    throw InvalidArgument("total_variation: plane must be at least 2x2, got " +
                          detail::shape_string(plane.width(), plane.height()));
  }
  double horizontal = 0.0;
  double vertical = 0.0;
  for (int y = 0; y < plane.height(); ++y) {
    for (int x = 0; x + 1 < plane.width(); ++x) {
      horizontal += std::abs(static_cast<double>(plane(x + 1, y)) - static_cast<double>(plane(x, y)));
    }
  }
  for (int y = 0; y + 1 < plane.height(); ++y) {
    for (int x = 0; x < plane.width(); ++x) {
      vertical += std::abs(static_cast<double>(plane(x, y + 1)) - static_cast<double>(plane(x, y)));
    }
  }
  const double nh = static_cast<double>(plane.width() - 1) * plane.height();
  const double nv = static_cast<double>(plane.height() - 1) * plane.width();
  return horizontal / nh + vertical / nv;
}

inline constexpr double kBceEpsilon = 1e-7;

/// Binary cross entropy with predictions clamped to [eps, 1 - eps].
template <std::floating_point T>
double bce(const Plane<T>& pred, const BinaryMask& target) {
  detail::require_same_shape(pred, target, "bce");
  double sum = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double p = std::clamp(static_cast<double>(pred.pixels()[k]), kBceEpsilon, 1.0 - kBceEpsilon);
    sum -= target.at_index(k) ? std::log(p) : std::log1p(-p);
  }
  return sum / static_cast<double>(pred.size());
}

/// Blending-mask regularizer: mean of alpha squared.
template <std::floating_point T>
double l2_mask_reg(const Plane<T>& alpha) {
  double sum = 0.0;
  for (auto a : alpha.pixels()) sum += static_cast<double>(a) * static_cast<double>(a);
  return sum / static_cast<double>(alpha.size());
}

/// t = (1 - a) t_hat + a g_warp, with a forced to 0 wherever the warp is
/// invalid.
template <std::floating_point T>
RgbImage blend(const RgbImage& t_hat, const Plane<T>& alpha, const WarpResult& g_warp) {
  detail::require_same_shape(t_hat, alpha, "blend");
  detail::require_same_shape(t_hat, g_warp.image, "blend");
  detail::require_same_shape(t_hat, g_warp.validity, "blend");
  RgbImage out(t_hat.width(), t_hat.height());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double a = g_warp.validity.at_index(k) ? static_cast<double>(alpha.pixels()[k]) : 0.0;
    out.pixels()[k] =
        Rgb::from_vec(t_hat.pixels()[k].to_vec() * (1.0 - a) + g_warp.image.pixels()[k].to_vec() * a);
  }
  return out;
}

struct IuvLossWeights {
  double ce = 1.0;
  double l1_u = 1.0;
  double l1_v = 1.0;
  double tv_u = 1.0;
  double tv_v = 1.0;
};

struct IuvLossTerms {
  double ce = 0.0;
  double l1_u = 0.0;
  double l1_v = 0.0;
  double tv_u = 0.0;
  double tv_v = 0.0;
  double total = 0.0;
};

/// Garment DensePose objective. Classification and L1 compare the
/// flow-aligned predictions with the masked person labels (L1 only where
/// the target label is foreground); the TV terms smooth the raw,
/// un-aligned U/V predictions.
inline IuvLossTerms l_iuv(const LogitStack& i_logits, const RealPlane& u_aligned,
                          const RealPlane& v_aligned, const RealPlane& u_raw,
                          const RealPlane& v_raw, const LabelPlane& i_target,
                          const RealPlane& u_target, const RealPlane& v_target,
                          const IuvLossWeights& weights = {}) {
  BinaryMask supervised(i_target.width(), i_target.height());
  for (std::size_t k = 0; k < i_target.size(); ++k) supervised.set_index(k, i_target.pixels()[k] != 0);

  IuvLossTerms terms;
  terms.ce = cross_entropy(i_logits, i_target, false);
  terms.l1_u = l1(u_aligned, u_target, supervised);
  terms.l1_v = l1(v_aligned, v_target, supervised);
  terms.tv_u = total_variation(u_raw);
  terms.tv_v = total_variation(v_raw);
  terms.total = weights.ce * terms.ce + weights.l1_u * terms.l1_u + weights.l1_v * terms.l1_v +
                weights.tv_u * terms.tv_u + weights.tv_v * terms.tv_v;
  return terms;
}

/// Variant where the same U/V planes feed both the L1 and TV terms.
inline IuvLossTerms l_iuv(const LogitStack& i_logits, const RealPlane& u_pred,
                          const RealPlane& v_pred, const LabelPlane& i_target,
                          const RealPlane& u_target, const RealPlane& v_target,
                          const IuvLossWeights& weights = {}) {
  return l_iuv(i_logits, u_pred, v_pred, u_pred, v_pred, i_target, u_target, v_target, weights);
}

}  // namespace densewarp
