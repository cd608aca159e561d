#pragma once

// Escape-time and itinerary images of 2-D coordinate slices of R^d.

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "qrtrig/core.hpp"
#include "qrtrig/dynamics.hpp"

namespace qrtrig {

struct Window {
  double u_min, u_max, v_min, v_max;
};

struct SliceSpec {
  int axis_u = 0;
  int axis_v = 1;
  /// Full d-vector; the entries at axis_u and axis_v are ignored.
  Point base;
  Window window{-1.0, 1.0, -1.0, 1.0};
  int width = 1;
  int height = 1;

  int dim() const { return static_cast<int>(base.size()); }

  void validate() const {
    const int d = dim();
    if (d < 2) throw DomainError("SliceSpec: dimension must be >= 2");
    if (axis_u < 0 || axis_u >= d || axis_v < 0 || axis_v >= d)
      throw DomainError("SliceSpec: axis index out of range");
    if (axis_u == axis_v) throw DomainError("SliceSpec: axes must differ");
    if (!(window.u_max > window.u_min) || !(window.v_max > window.v_min))
      throw DomainError("SliceSpec: degenerate window");
    if (width < 1 || height < 1) throw DomainError("SliceSpec: resolution must be >= 1x1");
  }

  /// Point at the centre of pixel (col, row); row 0 is the top (v_max) edge.
  Point pixel_point(int col, int row) const {
    Point p = base;
    p[axis_u] = window.u_min + (col + 0.5) * (window.u_max - window.u_min) / width;
    p[axis_v] = window.v_max - (row + 0.5) * (window.v_max - window.v_min) / height;
    return p;
  }
};

struct PixelRecord {
  std::optional<int> escape_step;
  TrayIndex first_tray;
  double final_height = 0.0;
};

struct ImageGrid {
  int width = 0;
  int height = 0;
  /// Row-major, top row first.
  std::vector<PixelRecord> pixels;

  const PixelRecord& at(int col, int row) const {
    return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(col)];
  }
};

inline ImageGrid render_slice(const SliceSpec& spec, const MapParams& params, int max_iter,
                              double height_cap = kDefaultHeightCap) {
  spec.validate();
  if (max_iter < 1) throw DomainError("render_slice: max_iter must be >= 1");
  if (spec.dim() != params.dim) throw DomainError("render_slice: dimension mismatch");
  ImageGrid grid;
  grid.width = spec.width;
  grid.height = spec.height;
  grid.pixels.resize(static_cast<std::size_t>(spec.width) * static_cast<std::size_t>(spec.height));
  for (int row = 0; row < spec.height; ++row) {
    for (int col = 0; col < spec.width; ++col) {
      const Point p = spec.pixel_point(col, row);
      const OrbitRecord orbit = iterate(p, max_iter, params, height_cap);
      auto& px = grid.pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(spec.width) +
                             static_cast<std::size_t>(col)];
      px.escape_step = orbit.escape_step();
      px.first_tray = orbit.trays.front();
      px.final_height = orbit.heights.back();
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Palettes and PPM output

enum class Palette { Hue, Gray };

inline Palette palette_from_name(const std::string& name) {
  if (name == "hue") return Palette::Hue;
  if (name == "gray" || name == "grey") return Palette::Gray;
  throw DomainError("unknown palette '" + name + "' (expected hue or gray)");
}

using Rgb = std::array<std::uint8_t, 3>;

/// Escaping pixels cycle through 12 fully saturated hues; the rest are black.
inline Rgb palette_color(const PixelRecord& px, Palette palette) {
  if (!px.escape_step) return {0, 0, 0};
  const int step = *px.escape_step;
  if (palette == Palette::Gray) {
    const int g = 255 - (step * 24) % 224;
    return {static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(g),
            static_cast<std::uint8_t>(g)};
  }
  const int hue = (step * 30) % 360;
  const int sector = hue / 60;
  const auto rise = static_cast<std::uint8_t>(255 * (hue % 60) / 60);
  const auto fall = static_cast<std::uint8_t>(255 - rise);
  switch (sector) {
    case 0: return {255, rise, 0};
    case 1: return {fall, 255, 0};
    case 2: return {0, 255, rise};
    case 3: return {0, fall, 255};
    case 4: return {rise, 0, 255};
    default: return {255, 0, fall};
  }
}

/// Binary P6 image: "P6\n<w> <h>\n255\n" then RGB triples, top row first.
inline std::string ppm_bytes(const ImageGrid& grid, Palette palette) {
  std::string out = "P6\n" + std::to_string(grid.width) + " " + std::to_string(grid.height) +
                    "\n255\n";
  out.reserve(out.size() + grid.pixels.size() * 3);
  for (const auto& px : grid.pixels) {
    const Rgb c = palette_color(px, palette);
    out.append(reinterpret_cast<const char*>(c.data()), c.size());
  }
  return out;
}

inline void write_ppm(const ImageGrid& grid, Palette palette, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("write_ppm: cannot open '" + path + "' for writing");
  const std::string bytes = ppm_bytes(grid, palette);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("write_ppm: write to '" + path + "' failed");
}

}  // namespace qrtrig
