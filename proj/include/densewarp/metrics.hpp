#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "densewarp/parallel.hpp"
#include "densewarp/raster.hpp"

namespace densewarp {

/// Canonical SSIM configuration on [0,1] images.
struct SsimParams {
  static constexpr int kWindow = 11;
  static constexpr double kSigma = 1.5;
  static constexpr double kC1 = 0.01 * 0.01;
  static constexpr double kC2 = 0.03 * 0.03;
};

namespace detail {

inline std::array<double, SsimParams::kWindow> gaussian_taps() {
  std::array<double, SsimParams::kWindow> taps{};
  constexpr int r = SsimParams::kWindow / 2;
  for (int d = -r; d <= r; ++d) {
    taps[static_cast<std::size_t>(d + r)] =
        std::exp(-(d * d) / (2.0 * SsimParams::kSigma * SsimParams::kSigma));
  }
  return taps;
}

/// Gaussian filter truncated at the image border and renormalized over the
/// in-bounds taps; separable because the truncated window is a rectangle.
inline Plane<double> gaussian_filter(const Plane<double>& in) {
  static const auto taps = gaussian_taps();
  constexpr int r = SsimParams::kWindow / 2;
  const int w = in.width();
  const int h = in.height();

  Plane<double> horizontal(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      double norm = 0.0;
      for (int d = -r; d <= r; ++d) {
        const int xx = x + d;
        if (xx < 0 || xx >= w) continue;
        const double t = taps[static_cast<std::size_t>(d + r)];
        acc += t * in(xx, y);
        norm += t;
      }
      horizontal(x, y) = acc / norm;
    }
  }
  Plane<double> out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      double norm = 0.0;
      for (int d = -r; d <= r; ++d) {
        const int yy = y + d;
        if (yy < 0 || yy >= h) continue;
        const double t = taps[static_cast<std::size_t>(d + r)];
        acc += t * horizontal(x, yy);
        norm += t;
      }
      out(x, y) = acc / norm;
    }
  }
  return out;
}

inline Plane<double> channel(const RgbImage& img, int c) {
  Plane<double> out(img.width(), img.height());
  for (std::size_t k = 0; k < img.size(); ++k) {
    const Rgb& px = img.pixels()[k];
    out.pixels()[k] = c == 0 ? px.r : (c == 1 ? px.g : px.b);
  }
  return out;
}

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace detail

/// Per-pixel SSIM (averaged over the three channels), same size as the
/// inputs. Windows near the border are truncated and renormalized.
inline Plane<double> ssim_map(const RgbImage& a, const RgbImage& b, const Exec& exec = {}) {
  detail::require_same_shape(a, b, "ssim");
  if (a.width() < SsimParams::kWindow || a.height() < SsimParams::kWindow) {
    throw InvalidArgument("ssim: image " + detail::shape_string(a.width(), a.height()) +
                          " is smaller than the 11x11 window");
  }
  std::array<Plane<double>, 3> per_channel;
  parallel_for(3, exec, [&](int c) {
    const auto x = detail::channel(a, c);
    const auto y = detail::channel(b, c);
    Plane<double> xx(x.width(), x.height());
    Plane<double> yy(x.width(), x.height());
    Plane<double> xy(x.width(), x.height());
    for (std::size_t k = 0; k < x.size(); ++k) {
      xx.pixels()[k] = x.pixels()[k] * x.pixels()[k];
      yy.pixels()[k] = y.pixels()[k] * y.pixels()[k];
      xy.pixels()[k] = x.pixels()[k] * y.pixels()[k];
    }
    const auto mx = detail::gaussian_filter(x);
    const auto my = detail::gaussian_filter(y);
    const auto exx = detail::gaussian_filter(xx);
    const auto eyy = detail::gaussian_filter(yy);
    const auto exy = detail::gaussian_filter(xy);

    Plane<double> s(x.width(), x.height());
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double ux = mx.pixels()[k];
      const double uy = my.pixels()[k];
      const double vx = exx.pixels()[k] - ux * ux;
      const double vy = eyy.pixels()[k] - uy * uy;
      const double cxy = exy.pixels()[k] - ux * uy;
      s.pixels()[k] = ((2.0 * ux * uy + SsimParams::kC1) * (2.0 * cxy + SsimParams::kC2)) /
                      ((ux * ux + uy * uy + SsimParams::kC1) * (vx + vy + SsimParams::kC2));
    }
    per_channel[static_cast<std::size_t>(c)] = std::move(s);
  });

  Plane<double> out(a.width(), a.height());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out.pixels()[k] =
        (per_channel[0].pixels()[k] + per_channel[1].pixels()[k] + per_channel[2].pixels()[k]) / 3.0;
  }
  return out;
}

/// Mean SSIM over pixels and channels.
inline double ssim(const RgbImage& a, const RgbImage& b, const Exec& exec = {}) {
  const auto map = ssim_map(a, b, exec);
  double sum = 0.0;
  for (double v : map.pixels()) sum += v;
  return sum / static_cast<double>(map.size());
}

/// Normalized masked SSIM: the SSIM map summed over U = warped ∪ gt and
/// divided by the total pixel count, i.e. the masked mean scaled by the
/// union's area fraction.
inline double nm_ssim(const RgbImage& t, const RgbImage& gt, const BinaryMask& warped_mask,
                      const BinaryMask& gt_garment_mask, const Exec& exec = {}) {
  detail::require_same_shape(t, warped_mask, "nm_ssim");
  detail::require_same_shape(t, gt_garment_mask, "nm_ssim");
  const auto map = ssim_map(t, gt, exec);
  double sum = 0.0;
  for (std::size_t k = 0; k < map.size(); ++k) {
    if (warped_mask.at_index(k) || gt_garment_mask.at_index(k)) sum += map.pixels()[k];
  }
  return sum / static_cast<double>(map.size());
}

/// |a ∩ b| / |a ∪ b|; two empty masks agree perfectly (1.0).
inline double miou(const BinaryMask& a, const BinaryMask& b) {
  detail::require_same_shape(a, b, "miou");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    inter += (a.at_index(k) && b.at_index(k)) ? 1 : 0;
    uni += (a.at_index(k) || b.at_index(k)) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct PixelCounts {
  std::size_t garment = 0;
  std::size_t union_area = 0;
  std::size_t total = 0;
};

/// Metrics of one prediction/ground-truth pair.
struct MetricReport {
  double ssim = 0.0;
  std::optional<double> nm_ssim;
  std::optional<double> miou;
  PixelCounts pixel_counts;
};

/// SSIM always; NM-SSIM and IoU when both masks are supplied.
inline MetricReport evaluate_pair(const RgbImage& pred, const RgbImage& gt,
                                  const BinaryMask* warped_mask = nullptr,
                                  const BinaryMask* gt_mask = nullptr, const Exec& exec = {}) {
  MetricReport report;
  report.pixel_counts.total = pred.size();
  report.ssim = ssim(pred, gt, exec);
  if (warped_mask != nullptr && gt_mask != nullptr) {
    report.nm_ssim = nm_ssim(pred, gt, *warped_mask, *gt_mask, exec);
    report.miou = miou(*warped_mask, *gt_mask);
    report.pixel_counts.garment = gt_mask->count();
    report.pixel_counts.union_area = mask_or(*warped_mask, *gt_mask).count();
  }
  return report;
}

/// Dataset-level means of per-pair metrics, summed with compensation in
/// insertion order.
class MetricAggregate {
 public:
  void add(const MetricReport& r) {
    ++pairs_;
    ssim_.add(r.ssim);
    if (r.nm_ssim) {
      nm_ssim_.add(*r.nm_ssim);
      ++masked_pairs_;
    }
    if (r.miou) miou_.add(*r.miou);
  }

  std::size_t pairs() const { return pairs_; }
  double ssim() const { return pairs_ == 0 ? 0.0 : ssim_.value() / static_cast<double>(pairs_); }
  std::optional<double> nm_ssim() const {
    if (masked_pairs_ == 0) return std::nullopt;
    return nm_ssim_.value() / static_cast<double>(masked_pairs_);
  }
  std::optional<double> miou() const {
    if (masked_pairs_ == 0) return std::nullopt;
    return miou_.value() / static_cast<double>(masked_pairs_);
  }

 private:
  std::size_t pairs_ = 0;
  std::size_t masked_pairs_ = 0;
  detail::CompensatedSum ssim_;
  detail::CompensatedSum nm_ssim_;
  detail::CompensatedSum miou_;
};

}  // namespace densewarp
