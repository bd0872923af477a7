// Minimal raster plotting for the CLI: heatmaps and line charts rendered
// straight to PNG with a built-in 5x7 bitmap font. Kept deliberately free of
// library dependencies beyond libpng so the CLI stays a pure C-API client.
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace render {

struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major, top-down

  Image(std::size_t w, std::size_t h, std::uint8_t r = 255, std::uint8_t g = 255,
        std::uint8_t b = 255);
  void set(std::size_t x, std::size_t y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  void fill_rect(std::size_t x, std::size_t y, std::size_t w, std::size_t h, std::uint8_t r,
                 std::uint8_t g, std::uint8_t b);
  void line(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  // Draws `text` with its top-left corner at (x, y); unknown glyphs render
  // as blanks. Returns the width consumed in pixels.
  std::size_t text(int x, int y, const std::string& s, std::uint8_t r = 0, std::uint8_t g = 0,
                   std::uint8_t b = 0);
};

std::size_t text_width(const std::string& s);

// Perceptually uniform colormap lookup; t is clamped to [0, 1].
void viridis(double t, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b);

struct HeatmapOptions {
  bool db_scale = false;    // map values to 10*log10(v / max)
  double db_floor = -60.0;  // lower bound of the dB color range
  std::string title;
};

// Row-major matrix -> heatmap. Row 0 is drawn at the bottom. Axis vectors
// give the physical coordinate of each row/column; ticks and labels are
// rendered from them.
Image render_heatmap(const std::vector<double>& values, std::size_t rows, std::size_t cols,
                     const std::vector<double>& row_axis, const std::vector<double>& col_axis,
                     const std::string& row_label, const std::string& col_label,
                     const HeatmapOptions& opts);

struct LineOptions {
  bool mark_argmax = true;
  std::string title;
};

Image render_line(const std::vector<double>& values, const std::vector<double>& axis,
                  const std::string& x_label, const LineOptions& opts);

// Writes `img` to `path` atomically (temp file + rename).
void write_png(const Image& img, const std::string& path);

}  // namespace render
