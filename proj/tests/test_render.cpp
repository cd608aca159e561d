#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "qrtrig/render.hpp"
#include "qrtrig/verify.hpp"

using namespace qrtrig;

namespace {

MapParams params(double lambda = 4.3) { return validate_params(2, lambda, 0.256); }

SliceSpec one_pixel(double u, double v) {
  SliceSpec s;
  s.axis_u = 0;
  s.axis_v = 1;
  s.base = Point::Zero(2);
  s.window = {u - 0.5, u + 0.5, v - 0.5, v + 0.5};
  return s;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace

TEST(RenderSlice, OriginPixelDoesNotEscape) {
  const ImageGrid g = render_slice(one_pixel(0, 0), params(), 64);
  ASSERT_EQ(g.pixels.size(), 1u);
  EXPECT_FALSE(g.pixels[0].escape_step.has_value());
  EXPECT_EQ(g.pixels[0].first_tray, TrayIndex::origin(2));
}

TEST(RenderSlice, AxisPixelEscapesQuickly) {
  const ImageGrid g = render_slice(one_pixel(0, 3), params(5.0), 64);
  ASSERT_TRUE(g.pixels[0].escape_step.has_value());
  EXPECT_LE(*g.pixels[0].escape_step, 5);
}

TEST(RenderSlice, PixelCentresAndOrientation) {
  SliceSpec s = symmetry_slice(2, 4, 2);
  EXPECT_EQ(s.pixel_point(0, 0), make_point({-0.5, 1.0}));
  EXPECT_EQ(s.pixel_point(3, 1), make_point({2.5, -1.0}));
  s.base = make_point({7, 7});
  EXPECT_EQ(s.pixel_point(0, 0), make_point({-0.5, 1.0}));
}

TEST(RenderSlice, ValidationErrors) {
  SliceSpec s = symmetry_slice(2, 4, 4);
  s.axis_v = 0;
  EXPECT_THROW(s.validate(), DomainError);
  s = symmetry_slice(2, 0, 4);
  EXPECT_THROW(s.validate(), DomainError);
  s = symmetry_slice(2, 4, 4);
  s.window.u_max = s.window.u_min;
  EXPECT_THROW(s.validate(), DomainError);
  EXPECT_THROW(render_slice(symmetry_slice(2, 4, 4), params(), 0), DomainError);
  EXPECT_THROW(render_slice(symmetry_slice(3, 4, 4), params(), 4), DomainError);
}

TEST(RenderSlice, ReflectionSymmetryAcrossWall) {
  for (int d : {2, 3}) {
    const MapParams p = validate_params(d, 4.3, 0.256);
    const SliceSpec s = symmetry_slice(d, 32, 25);
    const ImageGrid g = render_slice(s, p, 64);
    for (int row = 0; row < g.height; ++row)
      for (int col = 0; col < g.width; ++col)
        EXPECT_EQ(g.at(col, row).escape_step, g.at(g.width - 1 - col, row).escape_step);
  }
}

TEST(RenderSlice, ParityStripesAtAxisRow) {
  const SliceSpec s = symmetry_slice(2, 8, 9);
  const ImageGrid g = render_slice(s, params(), 4);
  for (int row = 0; row < g.height; ++row) {
    const int expect = row <= 4 ? 1 : -1;  // row 4 holds v = 0, which joins the upper tray
    for (int col = 0; col < g.width; ++col) EXPECT_EQ(g.at(col, row).first_tray.sign, expect);
  }
}

TEST(Ppm, HeaderAndSize) {
  ImageGrid g;
  g.width = 2;
  g.height = 1;
  g.pixels.resize(2);
  g.pixels[1].escape_step = 0;
  const std::string bytes = ppm_bytes(g, Palette::Hue);
  const std::string header = "P6\n2 1\n255\n";
  ASSERT_EQ(bytes.size(), header.size() + 6);
  EXPECT_EQ(bytes.substr(0, header.size()), header);
  EXPECT_EQ(bytes.substr(header.size(), 3), std::string(3, '\0'));
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 3]), 255);
}

TEST(Ppm, PaletteRules) {
  PixelRecord none;
  EXPECT_EQ(palette_color(none, Palette::Hue), (Rgb{0, 0, 0}));
  EXPECT_EQ(palette_color(none, Palette::Gray), (Rgb{0, 0, 0}));
  PixelRecord a, b;
  a.escape_step = 1;
  b.escape_step = 13;  // hue cycle of length 12
  EXPECT_EQ(palette_color(a, Palette::Hue), palette_color(b, Palette::Hue));
  EXPECT_EQ(palette_from_name("grey"), Palette::Gray);
  EXPECT_THROW(palette_from_name("plasma"), DomainError);
}

TEST(Ppm, FileIsDeterministic) {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string p1 = (dir / "qrtrig_render_a.ppm").string();
  const std::string p2 = (dir / "qrtrig_render_b.ppm").string();
  const SliceSpec s = symmetry_slice(2, 40, 30);
  write_ppm(render_slice(s, params(), 32), Palette::Hue, p1);
  write_ppm(render_slice(s, params(), 32), Palette::Hue, p2);
  EXPECT_EQ(sha256_hex(slurp(p1)), sha256_hex(slurp(p2)));
  EXPECT_EQ(slurp(p1).size(), std::string("P6\n40 30\n255\n").size() + 40 * 30 * 3);
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST(Ppm, WriteErrorNamesPath) {
  ImageGrid g;
  g.width = g.height = 1;
  g.pixels.resize(1);
  try {
    write_ppm(g, Palette::Hue, "/nonexistent-dir/x.ppm");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.ppm"), std::string::npos);
  }
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
