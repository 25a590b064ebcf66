#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"

using namespace densewarp;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("densewarp_io_" + std::to_string(std::random_device{}()) + "_" +
             std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_rgb_png(const fs::path& p, int w, int h, const std::vector<unsigned char>& rgb) {
  io_detail::write_png(p, io_detail::PngBuffer{w, h, 3, rgb});
}

bool planes_bit_equal(const RealPlane& a, const RealPlane& b) {
  return a.size() == b.size() &&
         std::memcmp(a.pixels().data(), b.pixels().data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

TEST(DensePoseMap, SetEnforcesInvariants) {
  DensePoseMap dp(3, 2);
  dp.set(0, 0, 0, 0.7F, 0.2F);
  EXPECT_EQ(dp.u(0, 0), 0.0F);
  EXPECT_EQ(dp.v(0, 0), 0.0F);
  dp.set(1, 0, 5, 1.5F, -0.25F);
  EXPECT_EQ(dp.u(1, 0), 1.0F);
  EXPECT_EQ(dp.v(1, 0), 0.0F);
  EXPECT_THROW(dp.set(2, 0, 25, 0.1F, 0.1F), FormatError);
  EXPECT_THROW(dp.set(2, 0, -1, 0.1F, 0.1F), FormatError);
  EXPECT_THROW(dp.set(2, 0, 3, std::nanf(""), 0.1F), FormatError);
}

TEST(Raster, RejectsNonPositiveDimensions) {
  EXPECT_THROW(RealPlane(0, 4), InvalidArgument);
  EXPECT_THROW(BinaryMask(4, -1), InvalidArgument);
}

TEST(LoadIuv, BackgroundOnlyPng) {
  TempDir dir;
  write_rgb_png(dir / "bg.png", 2, 2, std::vector<unsigned char>(12, 0));
  const auto dp = load_iuv(dir / "bg.png");
  ASSERT_EQ(dp.width(), 2);
  ASSERT_EQ(dp.height(), 2);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) {
      EXPECT_EQ(dp.label(x, y), 0);
      EXPECT_EQ(dp.u(x, y), 0.0F);
      EXPECT_EQ(dp.v(x, y), 0.0F);
    }
  }
}

TEST(LoadIuv, PngQuantizationEndpoints) {
  TempDir dir;
  std::vector<unsigned char> rgb(12, 0);
  rgb[3] = 2;
  rgb[4] = 255;
  rgb[5] = 0;
  write_rgb_png(dir / "p.png", 2, 2, rgb);
  const auto dp = load_iuv(dir / "p.png");
  EXPECT_EQ(dp.label(1, 0), 2);
  EXPECT_EQ(dp.u(1, 0), 1.0F);
  EXPECT_EQ(dp.v(1, 0), 0.0F);
}

TEST(LoadIuv, PngLabelsAreClippedTo24) {
  TempDir dir;
  write_rgb_png(dir / "p.png", 1, 1, {200, 51, 102});
  const auto dp = load_iuv(dir / "p.png");
  EXPECT_EQ(dp.label(0, 0), 24);
  EXPECT_FLOAT_EQ(dp.u(0, 0), 0.2F);
  EXPECT_FLOAT_EQ(dp.v(0, 0), 0.4F);
}

TEST(LoadIuv, BinaryRoundTripIsBitExactOnRandomMaps) {
  TempDir dir;
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    std::uniform_int_distribution<int> side(1, 40);
    const auto dp = oracle::random_densepose(rng, side(rng), side(rng));
    save_iuv(dp, dir / "m.iuv");
    const auto back = load_iuv(dir / "m.iuv");
    ASSERT_EQ(back.i_plane(), dp.i_plane());
    ASSERT_TRUE(planes_bit_equal(back.u_plane(), dp.u_plane()));
    ASSERT_TRUE(planes_bit_equal(back.v_plane(), dp.v_plane()));
  }
}

TEST(LoadIuv, BackgroundOnlyRoundTrip) {
  TempDir dir;
  const DensePoseMap dp(7, 5);
  save_iuv(dp, dir / "bg.iuv");
  EXPECT_EQ(load_iuv(dir / "bg.iuv"), dp);
}

TEST(LoadIuv, PngRoundTripWithinQuantizationStep) {
  TempDir dir;
  std::mt19937_64 rng(5);
  const auto dp = oracle::random_densepose(rng, 23, 17);
  save_iuv(dp, dir / "m.png");
  const auto back = load_iuv(dir / "m.png");
  for (int y = 0; y < dp.height(); ++y) {
    for (int x = 0; x < dp.width(); ++x) {
      ASSERT_EQ(back.label(x, y), dp.label(x, y));
      EXPECT_LE(std::abs(back.u(x, y) - dp.u(x, y)), 0.5F / 255.0F + 1e-6F);
      EXPECT_LE(std::abs(back.v(x, y) - dp.v(x, y)), 0.5F / 255.0F + 1e-6F);
    }
  }
}

TEST(LoadIuv, BinaryLayoutMatchesDocumentedFormat) {
  DensePoseMap dp(2, 1);
  dp.set(1, 0, 7, 0.25F, 0.75F);
  const auto bytes = encode_iuv(dp);
  ASSERT_EQ(bytes.size(), 12U + 2U * 9U);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "IUV1");
  EXPECT_EQ(bytes[4], 2);
  EXPECT_EQ(bytes[8], 1);
  EXPECT_EQ(bytes[12], 0);
  EXPECT_EQ(bytes[13], 7);
  float u1 = 0;
  std::memcpy(&u1, &bytes[14 + 4], 4);
  EXPECT_EQ(u1, 0.25F);
  float v1 = 0;
  std::memcpy(&v1, &bytes[22 + 4], 4);
  EXPECT_EQ(v1, 0.75F);
}

TEST(LoadIuv, MalformedInputsNameTheField) {
  TempDir dir;
  DensePoseMap dp(3, 3);
  dp.set(1, 1, 4, 0.5F, 0.5F);
  auto bytes = encode_iuv(dp);

  auto expect_format_error = [&](const std::vector<unsigned char>& b, const std::string& needle) {
    write_bytes(dir / "bad.iuv", b);
    try {
      load_iuv(dir / "bad.iuv");
      ADD_FAILURE() << "expected FormatError containing " << needle;
    } catch (const FormatError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  expect_format_error(bad_magic, "magic");

  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  expect_format_error(truncated, "plane sizes");

  auto header_only = std::vector<unsigned char>(bytes.begin(), bytes.begin() + 6);
  expect_format_error(header_only, "width");

  auto bad_label = bytes;
  bad_label[12 + 4] = 30;
  expect_format_error(bad_label, "I plane");

  auto nan_u = bytes;
  const float nan = std::nanf("");
  std::memcpy(&nan_u[12 + 9], &nan, 4);
  expect_format_error(nan_u, "U plane");
}

TEST(SaveIuv, UnwritablePathNamesPath) {
  const fs::path bad = "/nonexistent_dir_for_densewarp/x.iuv";
  try {
    save_iuv(DensePoseMap(2, 2), bad);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(bad.string()), std::string::npos);
  }
  EXPECT_THROW(load_iuv("/nonexistent_dir_for_densewarp/y.iuv"), IoError);
}

TEST(Flow, RoundTripIsBitExact) {
  TempDir dir;
  std::mt19937_64 rng(3);
  FlowField flow(9, 4);
  flow.dx = oracle::random_plane(rng, 9, 4, -5.0F, 5.0F);
  flow.dy = oracle::random_plane(rng, 9, 4, -5.0F, 5.0F);
  save_flow(flow, dir / "f.flo");
  const auto back = load_flow(dir / "f.flo");
  EXPECT_TRUE(planes_bit_equal(back.dx, flow.dx));
  EXPECT_TRUE(planes_bit_equal(back.dy, flow.dy));

  auto bytes = io_detail::read_file(dir / "f.flo");
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "FLO1");
  float first_dy = 0;
  std::memcpy(&first_dy, &bytes[16], 4);
  EXPECT_EQ(first_dy, flow.dy(0, 0));
  bytes.pop_back();
  write_bytes(dir / "g.flo", bytes);
  EXPECT_THROW(load_flow(dir / "g.flo"), FormatError);
}

TEST(MaskIo, ThresholdAt128) {
  TempDir dir;
  io_detail::write_png(dir / "m.png", io_detail::PngBuffer{4, 1, 1, {0, 127, 128, 255}});
  const auto m = load_mask(dir / "m.png");
  EXPECT_FALSE(m(0, 0));
  EXPECT_FALSE(m(1, 0));
  EXPECT_TRUE(m(2, 0));
  EXPECT_TRUE(m(3, 0));

  std::mt19937_64 rng(8);
  const auto r = oracle::random_mask(rng, 13, 11);
  save_mask(r, dir / "r.png");
  EXPECT_EQ(load_mask(dir / "r.png"), r);
}

TEST(RgbIo, RoundTripWithinQuantization) {
  TempDir dir;
  std::mt19937_64 rng(9);
  const auto img = oracle::random_rgb(rng, 10, 6);
  save_rgb(img, dir / "i.png");
  const auto back = load_rgb(dir / "i.png");
  for (std::size_t k = 0; k < img.size(); ++k) {
    EXPECT_LE(std::abs(back.pixels()[k].r - img.pixels()[k].r), 0.5F / 255.0F + 1e-6F);
    EXPECT_LE(std::abs(back.pixels()[k].b - img.pixels()[k].b), 0.5F / 255.0F + 1e-6F);
  }
}

TEST(MaskDensePose, IdentityAndZeroMask) {
  std::mt19937_64 rng(1);
  const auto dp = oracle::random_densepose(rng, 12, 9);
  EXPECT_EQ(mask_densepose(dp, BinaryMask(12, 9, true)), dp);
  EXPECT_EQ(mask_densepose(dp, BinaryMask(12, 9, false)), DensePoseMap(12, 9));
  EXPECT_THROW(mask_densepose(dp, BinaryMask(9, 12)), DimensionError);
}

TEST(MaskDensePose, MatchesPerPixelSelectionAndIsIdempotent) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto dp = oracle::random_densepose(rng, 16, 14);
    const auto m = oracle::random_mask(rng, 16, 14);
    const auto out = mask_densepose(dp, m);
    for (int y = 0; y < 14; ++y) {
      for (int x = 0; x < 16; ++x) {
        if (m(x, y)) {
          ASSERT_EQ(out.label(x, y), dp.label(x, y));
          ASSERT_EQ(out.u(x, y), dp.u(x, y));
          ASSERT_EQ(out.v(x, y), dp.v(x, y));
        } else {
          ASSERT_EQ(out.label(x, y), 0);
          ASSERT_EQ(out.u(x, y), 0.0F);
          ASSERT_EQ(out.v(x, y), 0.0F);
        }
      }
    }
    ASSERT_EQ(mask_densepose(out, m), out);
  }
}

TEST(FlowWarp, ZeroFlowIsExactIdentity) {
  std::mt19937_64 rng(4);
  const FlowField zero(15, 10);
  const auto img = oracle::random_rgb(rng, 15, 10);
  EXPECT_EQ(flow_warp(img, zero), img);
  const auto dp = oracle::random_densepose(rng, 15, 10);
  EXPECT_EQ(flow_warp(dp, zero), dp);
  const auto m = oracle::random_mask(rng, 15, 10);
  EXPECT_EQ(flow_warp(m, zero), m);
  const auto p = oracle::random_plane(rng, 15, 10);
  EXPECT_EQ(flow_warp(p, zero), p);
}

TEST(FlowWarp, UnitShiftOfRampClampsBorder) {
  const int w = 8;
  RealPlane ramp(w, 3);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < w; ++x) ramp(x, y) = static_cast<float>(x) / (w - 1);
  }
  FlowField flow(w, 3);
  for (auto& d : flow.dx.pixels()) d = 1.0F;
  const auto out = flow_warp(ramp, flow);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < w; ++x) {
      const int src = std::min(x + 1, w - 1);
      EXPECT_EQ(out(x, y), ramp(src, y));
    }
  }
}

TEST(FlowWarp, IntegerOffsetsCopyPixelsExactly) {
  std::mt19937_64 rng(6);
  const auto img = oracle::random_rgb(rng, 12, 12);
  FlowField flow(12, 12);
  std::uniform_int_distribution<int> off(-3, 3);
  for (std::size_t k = 0; k < flow.dx.size(); ++k) {
    flow.dx.pixels()[k] = static_cast<float>(off(rng));
    flow.dy.pixels()[k] = static_cast<float>(off(rng));
  }
  const auto out = flow_warp(img, flow);
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 12; ++x) {
      const int sx = std::clamp(x + static_cast<int>(flow.dx(x, y)), 0, 11);
      const int sy = std::clamp(y + static_cast<int>(flow.dy(x, y)), 0, 11);
      EXPECT_EQ(out(x, y), img(sx, sy));
    }
  }
}

TEST(FlowWarp, FractionalFlowMatchesScalarBilinear) {
  std::mt19937_64 rng(7);
  const auto img = oracle::random_rgb(rng, 20, 14);
  FlowField flow(20, 14);
  flow.dx = oracle::random_plane(rng, 20, 14, -4.0F, 4.0F);
  flow.dy = oracle::random_plane(rng, 20, 14, -4.0F, 4.0F);
  const auto out = flow_warp(img, flow, Exec{3});
  for (int y = 0; y < 14; ++y) {
    for (int x = 0; x < 20; ++x) {
      const Rgb ref = oracle::bilinear_reference(img, x + double(flow.dx(x, y)), y + double(flow.dy(x, y)));
      EXPECT_NEAR(out(x, y).r, ref.r, 1e-6);
      EXPECT_NEAR(out(x, y).g, ref.g, 1e-6);
      EXPECT_NEAR(out(x, y).b, ref.b, 1e-6);
    }
  }
}

TEST(FlowWarp, DensePoseKeepsInvariantsAndLabelsStayCategorical) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const auto dp = oracle::random_densepose(rng, 18, 18, 0.6);
    FlowField flow(18, 18);
    flow.dx = oracle::random_plane(rng, 18, 18, -2.5F, 2.5F);
    flow.dy = oracle::random_plane(rng, 18, 18, -2.5F, 2.5F);
    const auto out = flow_warp(dp, flow);
    for (int y = 0; y < 18; ++y) {
      for (int x = 0; x < 18; ++x) {
        const int l = out.label(x, y);
        ASSERT_GE(l, 0);
        ASSERT_LE(l, 24);
        const int sx = std::clamp(static_cast<int>(std::floor(x + flow.dx(x, y) + 0.5)), 0, 17);
        const int sy = std::clamp(static_cast<int>(std::floor(y + flow.dy(x, y) + 0.5)), 0, 17);
        ASSERT_EQ(l, dp.label(sx, sy));
        if (l == 0) {
          ASSERT_EQ(out.u(x, y), 0.0F);
          ASSERT_EQ(out.v(x, y), 0.0F);
        }
        ASSERT_GE(out.u(x, y), 0.0F);
        ASSERT_LE(out.u(x, y), 1.0F);
      }
    }
  }
}

TEST(FlowWarp, RejectsMismatchAndNonFinite) {
  const RealPlane p(4, 4);
  EXPECT_THROW(flow_warp(p, FlowField(4, 5)), DimensionError);
  FlowField bad(4, 4);
  bad.dx(1, 1) = std::numeric_limits<float>::infinity();
  EXPECT_THROW(flow_warp(p, bad), InvalidArgument);
}

TEST(FlowWarp, ThreadCountDoesNotChangeResult) {
  std::mt19937_64 rng(12);
  const auto img = oracle::random_rgb(rng, 33, 29);
  FlowField flow(33, 29);
  flow.dx = oracle::random_plane(rng, 33, 29, -6.0F, 6.0F);
  flow.dy = oracle::random_plane(rng, 33, 29, -6.0F, 6.0F);
  EXPECT_EQ(flow_warp(img, flow, Exec{1}), flow_warp(img, flow, Exec{8}));
}

TEST(Sampling, MidpointAndClamp) {
  RealPlane p(2, 1);
  p(0, 0) = 0.0F;
  p(1, 0) = 1.0F;
  EXPECT_EQ(sample_bilinear(p, 0.5, 0.0), 0.5F);
  EXPECT_EQ(sample_bilinear(p, -3.0, 0.0), 0.0F);
  EXPECT_EQ(sample_bilinear(p, 9.0, 4.0), 1.0F);
  EXPECT_EQ(sample_nearest(p, 0.5, 0.0), 1.0F);
  EXPECT_EQ(sample_nearest(p, 0.49, 0.0), 0.0F);
}

TEST(Parallel, PropagatesWorkerException) {
  EXPECT_THROW(parallel_for(16, Exec{4},
                            [](int i) {
                              if (i == 11) throw InvalidArgument("boom");
                            }),
               InvalidArgument);
}
