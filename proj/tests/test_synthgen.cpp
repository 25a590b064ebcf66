#include <gtest/gtest.h>

#include <cmath>

#include "densewarp/synth_json.hpp"
#include "densewarp/synthgen.hpp"
#include "oracles.hpp"

using namespace densewarp;

namespace {

void expect_dp_invariants(const DensePoseMap& dp) {
  for (int y = 0; y < dp.height(); ++y) {
    for (int x = 0; x < dp.width(); ++x) {
      const int l = dp.label(x, y);
      ASSERT_GE(l, 0);
      ASSERT_LE(l, kPartCount);
      ASSERT_GE(dp.u(x, y), 0.0F);
      ASSERT_LE(dp.u(x, y), 1.0F);
      ASSERT_GE(dp.v(x, y), 0.0F);
      ASSERT_LE(dp.v(x, y), 1.0F);
      if (l == 0) {
        ASSERT_EQ(dp.u(x, y), 0.0F);
        ASSERT_EQ(dp.v(x, y), 0.0F);
      }
    }
  }
}

}  // namespace

TEST(Affine2, InverseAndRotation) {
  const auto r = Affine2::rotation_about(37.0, {10.0, -4.0});
  const auto inv = r.inverse();
  ASSERT_TRUE(inv);
  const Point2 p{3.5, 8.25};
  const Point2 back = inv->apply(r.apply(p));
  EXPECT_NEAR(back.x, p.x, 1e-12);
  EXPECT_NEAR(back.y, p.y, 1e-12);
  const Point2 pivot = r.apply({10.0, -4.0});
  EXPECT_NEAR(pivot.x, 10.0, 1e-12);
  EXPECT_NEAR(pivot.y, -4.0, 1e-12);
  EXPECT_FALSE((Affine2{1, 2, 0, 2, 4, 0}.inverse()));
  EXPECT_EQ(*Affine2{}.inverse(), Affine2{});
}

TEST(Affine2, ChartMapsPixelCentersInsideUnitSquare) {
  const auto c = Affine2::chart_for_rect(10, 20, 8, 4);
  const Point2 first = c.apply({10.0, 20.0});
  const Point2 last = c.apply({17.0, 23.0});
  EXPECT_DOUBLE_EQ(first.x, 0.5 / 8);
  EXPECT_DOUBLE_EQ(first.y, 0.5 / 4);
  EXPECT_DOUBLE_EQ(last.x, 7.5 / 8);
  EXPECT_DOUBLE_EQ(last.y, 3.5 / 4);
}

TEST(Generate, IdentityPlacementReproducesGarment) {
  for (auto kind : {TextureKind::Stripes, TextureKind::Checker, TextureKind::Gradient, TextureKind::Noise}) {
    const auto pair = generate(presets::torso_and_sleeves(0.0, 0.0, {kind, 12.0}));
    EXPECT_EQ(pair.person_dp, pair.garment_dp);
    EXPECT_EQ(pair.gt_mask, pair.garment_mask);
    for (std::size_t k = 0; k < pair.garment.size(); ++k) {
      if (pair.gt_mask.at_index(k)) {
        ASSERT_EQ(pair.gt_warp.pixels()[k], pair.garment.pixels()[k]);
      } else {
        ASSERT_EQ(pair.gt_warp.pixels()[k], (Rgb{0, 0, 0}));
        ASSERT_EQ(pair.garment.pixels()[k], (Rgb{1, 1, 1}));
      }
    }
    expect_dp_invariants(pair.garment_dp);
  }
}

TEST(Generate, TranslationShiftsGarmentPixelwise) {
  const int tx = 5;
  const int ty = -7;
  const auto pair = generate(presets::translated(tx, ty, {TextureKind::Checker, 10.0}));
  for (int y = 0; y < pair.gt_warp.height(); ++y) {
    for (int x = 0; x < pair.gt_warp.width(); ++x) {
      const int sx = x - tx;
      const int sy = y - ty;
      const bool inside = pair.garment_mask.contains(sx, sy) && pair.garment_mask(sx, sy);
      ASSERT_EQ(pair.gt_mask(x, y), inside) << x << "," << y;
      if (inside) {
        ASSERT_EQ(pair.gt_warp(x, y), pair.garment(sx, sy));
        ASSERT_EQ(pair.person_dp.label(x, y), pair.garment_dp.label(sx, sy));
        ASSERT_EQ(pair.person_dp.u(x, y), pair.garment_dp.u(sx, sy));
        ASSERT_EQ(pair.person_dp.v(x, y), pair.garment_dp.v(sx, sy));
      }
    }
  }
}

TEST(Generate, UvCorrespondenceIsExactUnderRotation) {
  const auto pair = generate(presets::sleeve_rotation(40.0, 0.0));
  const auto spec = presets::sleeve_rotation(40.0, 0.0);
  const auto inv = *spec.parts[1].placement.inverse();
  std::size_t checked = 0;
  for (int y = 0; y < 256; ++y) {
    for (int x = 0; x < 192; ++x) {
      if (pair.person_dp.label(x, y) != 15) continue;
      const Point2 s = inv.apply({double(x), double(y)});
      const Point2 uv = spec.parts[1].uv.apply(s);
      ASSERT_EQ(pair.person_dp.u(x, y), static_cast<float>(uv.x));
      ASSERT_EQ(pair.person_dp.v(x, y), static_cast<float>(uv.y));
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000U);
  expect_dp_invariants(pair.person_dp);
}

TEST(Generate, DeterministicUnderSeedAndDropoutLeavesTruthAlone) {
  const auto a = generate(presets::sleeve_rotation(30.0, 0.3, {TextureKind::Noise, 9.0}, 42));
  const auto b = generate(presets::sleeve_rotation(30.0, 0.3, {TextureKind::Noise, 9.0}, 42));
  EXPECT_EQ(a.garment_dp, b.garment_dp);
  EXPECT_EQ(a.garment, b.garment);

  const auto clean = generate(presets::sleeve_rotation(30.0, 0.0, {TextureKind::Noise, 9.0}, 42));
  EXPECT_EQ(a.gt_warp, clean.gt_warp);
  EXPECT_EQ(a.gt_mask, clean.gt_mask);
  EXPECT_EQ(a.person_dp, clean.person_dp);
  EXPECT_EQ(a.garment_mask, clean.garment_mask);

  const auto fg = a.garment_dp.foreground().count();
  const auto full = clean.garment_dp.foreground().count();
  EXPECT_LT(fg, full);
  EXPECT_NEAR(1.0 - double(fg) / full, 0.3, 0.02);
  expect_dp_invariants(a.garment_dp);

  const auto other = generate(presets::sleeve_rotation(30.0, 0.3, {TextureKind::Noise, 9.0}, 43));
  EXPECT_FALSE(other.garment_dp == a.garment_dp);
}

TEST(Generate, PersonOnlyPartsHaveNoGroundTruth) {
  auto spec = presets::sleeve_rotation(20.0, 0.0);
  spec.parts[2].in_garment = false;
  const auto pair = generate(spec);
  std::size_t person_only = 0;
  for (int y = 0; y < 256; ++y) {
    for (int x = 0; x < 192; ++x) {
      if (pair.person_dp.label(x, y) == 16) {
        ASSERT_FALSE(pair.gt_mask(x, y));
        ++person_only;
      }
      ASSERT_NE(pair.garment_dp.label(x, y), 16);
    }
  }
  EXPECT_GT(person_only, 0U);
}

TEST(Generate, RandomIdentityFixturesAreCollisionFree) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto spec = presets::random_identity(seed);
    const auto pair = generate(spec);
    const auto ref = oracle::scatter_reference(pair.garment_dp, pair.garment_mask, 256);
    EXPECT_EQ(ref.size(), pair.garment_dp.foreground().count()) << "seed " << seed;
  }
}

TEST(SynthSpec, ValidationErrors) {
  auto spec = presets::torso_and_sleeves();
  spec.parts[1].part_id = spec.parts[0].part_id;
  EXPECT_THROW(generate(spec), InvalidArgument);

  spec = presets::torso_and_sleeves();
  spec.parts[0].x = 150;
  EXPECT_THROW(generate(spec), InvalidArgument);

  spec = presets::torso_and_sleeves();
  spec.parts[0].uv = Affine2{};
  EXPECT_THROW(generate(spec), InvalidArgument);

  spec = presets::torso_and_sleeves();
  spec.parts[0].placement = Affine2{0, 0, 0, 0, 0, 0};
  EXPECT_THROW(generate(spec), InvalidArgument);

  spec = presets::torso_and_sleeves();
  spec.speckle_dropout = 1.5;
  EXPECT_THROW(generate(spec), InvalidArgument);

  spec = presets::torso_and_sleeves();
  spec.parts[0].part_id = 25;
  EXPECT_THROW(generate(spec), InvalidArgument);
}

TEST(SynthJson, RoundTripAndShorthand) {
  const auto spec = presets::sleeve_rotation(33.0, 0.1, {TextureKind::Checker, 7.0}, 5);
  const auto back = synth_spec_from_json(to_json(spec));
  EXPECT_EQ(to_json(back), to_json(spec));
  EXPECT_EQ(generate(back).gt_warp, generate(spec).gt_warp);

  const auto j = nlohmann::json::parse(R"({
    "width": 64, "height": 48, "seed": 3,
    "texture": {"kind": "gradient", "period": 8},
    "parts": [
      {"part": 2, "rect": [10, 10, 20, 20]},
      {"part": 15, "rect": [30, 10, 20, 10],
       "placement": {"rotate_deg": 90, "pivot": [30, 15], "translate": [1, 2]}}
    ]})");
  const auto parsed = synth_spec_from_json(j);
  EXPECT_EQ(parsed.width, 64);
  EXPECT_EQ(parsed.texture.kind, TextureKind::Gradient);
  EXPECT_EQ(parsed.parts[0].uv, Affine2::chart_for_rect(10, 10, 20, 20));
  const auto expected = Affine2::rotation_about(90.0, {30.0, 15.0});
  EXPECT_DOUBLE_EQ(parsed.parts[1].placement.c, expected.c + 1.0);
  EXPECT_DOUBLE_EQ(parsed.parts[1].placement.f, expected.f + 2.0);
}

TEST(SynthJson, ErrorsAreFormatErrors) {
  EXPECT_THROW(synth_spec_from_json(nlohmann::json::parse(R"({"width": 10})")), FormatError);
  EXPECT_THROW(synth_spec_from_json(nlohmann::json::parse(R"({"parts": [{"part": 1}]})")), FormatError);
  EXPECT_THROW(synth_spec_from_json(nlohmann::json::parse(
                   R"({"texture": {"kind": "plaid"}, "parts": []})")),
               FormatError);
  EXPECT_THROW(synth_spec_from_json(nlohmann::json::parse(
                   R"({"parts": [{"part": 1, "rect": [0, 0, 500, 5]}]})")),
               FormatError);
  EXPECT_THROW(synth_spec_from_json(nlohmann::json::parse(
                   R"({"parts": [{"part": 1, "rect": [0, 0, 5, 5], "uv_affine": [1, 2]}]})")),
               FormatError);
}
