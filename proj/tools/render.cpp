#include "render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

namespace render {
namespace {

// 5x7 glyphs, one byte per row, bits 4..0 = left..right. Covers digits,
// punctuation used by %g numbers, and the letters appearing in axis labels.
struct Glyph {
  char c;
  std::uint8_t rows[7];
};

constexpr Glyph kFont[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1E, 0x01, 0x01, 0x0E, 0x01, 0x01, 0x1E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
    {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
    {'/', {0x01, 0x02, 0x02, 0x04, 0x08, 0x08, 0x10}},
    {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
    {'a', {0x00, 0x00, 0x0E, 0x01, 0x0F, 0x11, 0x0F}},
    {'c', {0x00, 0x00, 0x0E, 0x11, 0x10, 0x11, 0x0E}},
    {'d', {0x01, 0x01, 0x0D, 0x13, 0x11, 0x13, 0x0D}},
    {'e', {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E}},
    {'f', {0x06, 0x09, 0x08, 0x1C, 0x08, 0x08, 0x08}},
    {'g', {0x00, 0x00, 0x0F, 0x11, 0x0F, 0x01, 0x0E}},
    {'i', {0x04, 0x00, 0x0C, 0x04, 0x04, 0x04, 0x0E}},
    {'l', {0x0C, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'m', {0x00, 0x00, 0x1A, 0x15, 0x15, 0x15, 0x15}},
    {'n', {0x00, 0x00, 0x16, 0x19, 0x11, 0x11, 0x11}},
    {'o', {0x00, 0x00, 0x0E, 0x11, 0x11, 0x11, 0x0E}},
    {'p', {0x00, 0x00, 0x1E, 0x11, 0x1E, 0x10, 0x10}},
    {'r', {0x00, 0x00, 0x16, 0x19, 0x10, 0x10, 0x10}},
    {'s', {0x00, 0x00, 0x0F, 0x10, 0x0E, 0x01, 0x1E}},
    {'t', {0x08, 0x08, 0x1C, 0x08, 0x08, 0x09, 0x06}},
    {'u', {0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0D}},
    {'v', {0x00, 0x00, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'x', {0x00, 0x00, 0x11, 0x0A, 0x04, 0x0A, 0x11}},
    {'z', {0x00, 0x00, 0x1F, 0x02, 0x04, 0x08, 0x1F}},
    {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
    {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
    {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
};

const std::uint8_t* find_glyph(char c) {
  for (const auto& g : kFont) {
    if (g.c == c) return g.rows;
  }
  return nullptr;
}

constexpr int kGlyphW = 6;  // 5 pixels + 1 spacing
constexpr int kGlyphH = 7;

// 16 anchors of the viridis colormap, linearly interpolated.
constexpr std::uint8_t kViridis[][3] = {
    {68, 1, 84},    {72, 26, 108},  {71, 47, 125},  {65, 68, 135},  {57, 86, 140},
    {49, 104, 142}, {42, 120, 142}, {35, 136, 142}, {31, 152, 139}, {34, 168, 132},
    {53, 183, 121}, {84, 197, 104}, {122, 209, 81}, {165, 219, 54}, {210, 226, 27},
    {253, 231, 37},
};

std::string format_tick(double v) {
  // Short, unambiguous tick labels: trim trailing zeros from %.3g.
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

struct Ticks {
  std::vector<std::size_t> index;   // row/column index of each tick
  std::vector<std::string> label;
};

Ticks make_ticks(const std::vector<double>& axis, std::size_t n, std::size_t want) {
  Ticks t;
  if (n == 0) return t;
  const std::size_t count = std::min(want, n);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t idx =
        (count == 1) ? 0 : static_cast<std::size_t>(std::llround(
                               static_cast<double>(k) * static_cast<double>(n - 1) /
                               static_cast<double>(count - 1)));
    t.index.push_back(idx);
    const double value = (idx < axis.size()) ? axis[idx] : static_cast<double>(idx);
    t.label.push_back(format_tick(value));
  }
  return t;
}

}  // namespace

Image::Image(std::size_t w, std::size_t h, std::uint8_t r, std::uint8_t g, std::uint8_t b)
    : width(w), height(h), rgb(w * h * 3) {
  for (std::size_t i = 0; i < w * h; ++i) {
    rgb[3 * i] = r;
    rgb[3 * i + 1] = g;
    rgb[3 * i + 2] = b;
  }
}

void Image::set(std::size_t x, std::size_t y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (x >= width || y >= height) return;
  const std::size_t i = 3 * (y * width + x);
  rgb[i] = r;
  rgb[i + 1] = g;
  rgb[i + 2] = b;
}

void Image::fill_rect(std::size_t x, std::size_t y, std::size_t w, std::size_t h, std::uint8_t r,
                      std::uint8_t g, std::uint8_t b) {
  for (std::size_t dy = 0; dy < h; ++dy) {
    for (std::size_t dx = 0; dx < w; ++dx) set(x + dx, y + dy, r, g, b);
  }
}

void Image::line(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  // Bresenham.
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    if (x0 >= 0 && y0 >= 0) set(static_cast<std::size_t>(x0), static_cast<std::size_t>(y0), r, g, b);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

std::size_t Image::text(int x, int y, const std::string& s, std::uint8_t r, std::uint8_t g,
                        std::uint8_t b) {
  int cx = x;
  for (char c : s) {
    const std::uint8_t* rows = find_glyph(c);
    if (rows != nullptr) {
      for (int gy = 0; gy < kGlyphH; ++gy) {
        for (int gx = 0; gx < 5; ++gx) {
          if ((rows[gy] >> (4 - gx)) & 1) {
            if (cx + gx >= 0 && y + gy >= 0) {
              set(static_cast<std::size_t>(cx + gx), static_cast<std::size_t>(y + gy), r, g, b);
            }
          }
        }
      }
    }
    cx += kGlyphW;
  }
  return static_cast<std::size_t>(cx - x);
}

std::size_t text_width(const std::string& s) { return s.size() * kGlyphW; }

void viridis(double t, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) {
  t = std::clamp(t, 0.0, 1.0);
  constexpr int n = static_cast<int>(sizeof(kViridis) / sizeof(kViridis[0]));
  const double pos = t * (n - 1);
  const int i = std::min(n - 2, static_cast<int>(pos));
  const double frac = pos - i;
  r = static_cast<std::uint8_t>(std::lround(kViridis[i][0] + frac * (kViridis[i + 1][0] - kViridis[i][0])));
  g = static_cast<std::uint8_t>(std::lround(kViridis[i][1] + frac * (kViridis[i + 1][1] - kViridis[i][1])));
  b = static_cast<std::uint8_t>(std::lround(kViridis[i][2] + frac * (kViridis[i + 1][2] - kViridis[i][2])));
}

Image render_heatmap(const std::vector<double>& values, std::size_t rows, std::size_t cols,
                     const std::vector<double>& row_axis, const std::vector<double>& col_axis,
                     const std::string& row_label, const std::string& col_label,
                     const HeatmapOptions& opts) {
  if (rows == 0 || cols == 0 || values.size() != rows * cols) {
    throw std::invalid_argument("render_heatmap: matrix shape mismatch");
  }
  const std::size_t sx = std::clamp<std::size_t>(768 / cols, 1, 8);
  const std::size_t sy = std::clamp<std::size_t>(480 / rows, 1, 8);
  const std::size_t plot_w = cols * sx;
  const std::size_t plot_h = rows * sy;
  const std::size_t margin_left = 64;
  const std::size_t margin_top = opts.title.empty() ? 12 : 26;
  const std::size_t margin_bottom = 44;
  const std::size_t margin_right = 84;  // colorbar + its labels
  Image img(margin_left + plot_w + margin_right, margin_top + plot_h + margin_bottom);

  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, v);
  if (vmax <= 0.0) vmax = 1.0;

  const auto shade = [&](double v) {
    if (opts.db_scale) {
      const double db = 10.0 * std::log10(std::max(v, 1e-300) / vmax);
      return (db - opts.db_floor) / (0.0 - opts.db_floor);
    }
    return v / vmax;
  };

  // Cells: row 0 of the matrix sits at the bottom of the plot.
  for (std::size_t rrow = 0; rrow < rows; ++rrow) {
    const std::size_t y0 = margin_top + (rows - 1 - rrow) * sy;
    for (std::size_t c = 0; c < cols; ++c) {
      std::uint8_t r, g, b;
      viridis(shade(values[rrow * cols + c]), r, g, b);
      img.fill_rect(margin_left + c * sx, y0, sx, sy, r, g, b);
    }
  }

  // Frame.
  const int left = static_cast<int>(margin_left), top = static_cast<int>(margin_top);
  const int right = left + static_cast<int>(plot_w), bottom = top + static_cast<int>(plot_h);
  img.line(left, top, right, top, 0, 0, 0);
  img.line(left, bottom, right, bottom, 0, 0, 0);
  img.line(left, top, left, bottom, 0, 0, 0);
  img.line(right, top, right, bottom, 0, 0, 0);

  // X ticks.
  const Ticks xt = make_ticks(col_axis, cols, 6);
  for (std::size_t k = 0; k < xt.index.size(); ++k) {
    const int x = left + static_cast<int>(xt.index[k] * sx + sx / 2);
    img.line(x, bottom, x, bottom + 4, 0, 0, 0);
    img.text(x - static_cast<int>(text_width(xt.label[k]) / 2), bottom + 7, xt.label[k]);
  }
  img.text(left + static_cast<int>(plot_w / 2 - text_width(col_label) / 2), bottom + 24,
           col_label);

  // Y ticks.
  const Ticks yt = make_ticks(row_axis, rows, 5);
  for (std::size_t k = 0; k < yt.index.size(); ++k) {
    const int y = top + static_cast<int>((rows - 1 - yt.index[k]) * sy + sy / 2);
    img.line(left - 4, y, left, y, 0, 0, 0);
    img.text(left - 7 - static_cast<int>(text_width(yt.label[k])), y - 3, yt.label[k]);
  }
  img.text(2, top - 2, row_label);

  if (!opts.title.empty()) img.text(left, 6, opts.title);

  // Colorbar.
  const std::size_t bar_x = margin_left + plot_w + 18;
  const std::size_t bar_w = 14;
  for (std::size_t y = 0; y < plot_h; ++y) {
    std::uint8_t r, g, b;
    viridis(1.0 - static_cast<double>(y) / static_cast<double>(plot_h - 1), r, g, b);
    img.fill_rect(bar_x, margin_top + y, bar_w, 1, r, g, b);
  }
  const std::string bar_hi = opts.db_scale ? "0 dB" : format_tick(vmax);
  const std::string bar_lo = opts.db_scale ? format_tick(opts.db_floor) + " dB" : "0";
  img.text(static_cast<int>(bar_x + bar_w + 3), top - 3, bar_hi);
  img.text(static_cast<int>(bar_x + bar_w + 3), bottom - 4, bar_lo);

  return img;
}

Image render_line(const std::vector<double>& values, const std::vector<double>& axis,
                  const std::string& x_label, const LineOptions& opts) {
  if (values.empty()) throw std::invalid_argument("render_line: empty series");
  const std::size_t plot_w = 640, plot_h = 320;
  const std::size_t margin_left = 56;
  const std::size_t margin_top = opts.title.empty() ? 14 : 28;
  const std::size_t margin_bottom = 44, margin_right = 16;
  Image img(margin_left + plot_w + margin_right, margin_top + plot_h + margin_bottom);

  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, v);
  if (vmax <= 0.0) vmax = 1.0;
  const double y_top = vmax * 1.05;

  const int left = static_cast<int>(margin_left), top = static_cast<int>(margin_top);
  const int right = left + static_cast<int>(plot_w), bottom = top + static_cast<int>(plot_h);
  img.line(left, bottom, right, bottom, 0, 0, 0);
  img.line(left, top, left, bottom, 0, 0, 0);

  const auto to_x = [&](std::size_t i) {
    return left + static_cast<int>(std::lround(static_cast<double>(i) /
                                               static_cast<double>(std::max<std::size_t>(values.size() - 1, 1)) *
                                               static_cast<double>(plot_w)));
  };
  const auto to_y = [&](double v) {
    return bottom - static_cast<int>(std::lround(v / y_top * static_cast<double>(plot_h)));
  };

  for (std::size_t i = 1; i < values.size(); ++i) {
    img.line(to_x(i - 1), to_y(values[i - 1]), to_x(i), to_y(values[i]), 31, 119, 180);
  }

  if (opts.mark_argmax) {
    const std::size_t arg = static_cast<std::size_t>(
        std::distance(values.begin(), std::max_element(values.begin(), values.end())));
    const int mx = to_x(arg), my = to_y(values[arg]);
    for (int y = my; y < bottom; y += 4) img.line(mx, y, mx, std::min(y + 1, bottom), 214, 39, 40);
    img.fill_rect(static_cast<std::size_t>(mx - 2), static_cast<std::size_t>(my - 2), 5, 5, 214,
                  39, 40);
    const double fx = (arg < axis.size()) ? axis[arg] : static_cast<double>(arg);
    char note[48];
    std::snprintf(note, sizeof(note), "max = %s", format_tick(fx).c_str());
    img.text(std::min(mx + 6, right - static_cast<int>(text_width(note))), std::max(my - 10, top),
             note, 214, 39, 40);
  }

  const Ticks xt = make_ticks(axis, values.size(), 7);
  for (std::size_t k = 0; k < xt.index.size(); ++k) {
    const int x = to_x(xt.index[k]);
    img.line(x, bottom, x, bottom + 4, 0, 0, 0);
    img.text(x - static_cast<int>(text_width(xt.label[k]) / 2), bottom + 7, xt.label[k]);
  }
  img.text(left + static_cast<int>(plot_w / 2 - text_width(x_label) / 2), bottom + 24, x_label);

  for (int k = 0; k <= 4; ++k) {
    const double v = y_top * k / 4.0;
    const int y = to_y(v);
    img.line(left - 4, y, left, y, 0, 0, 0);
    const std::string lab = format_tick(v);
    img.text(left - 7 - static_cast<int>(text_width(lab)), y - 3, lab);
  }

  if (!opts.title.empty()) img.text(left, 8, opts.title);
  return img;
}

void write_png(const Image& img, const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";

  FILE* fp = std::fopen(tmp.string().c_str(), "wb");
  if (fp == nullptr) throw std::runtime_error("cannot open for writing: " + tmp.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    if (png != nullptr) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    fs::remove(tmp);
    throw std::runtime_error("libpng write failed: " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> row_ptrs(img.height);
  for (std::size_t y = 0; y < img.height; ++y) {
    row_ptrs[y] = const_cast<png_bytep>(&img.rgb[y * img.width * 3]);
  }
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
  fs::rename(tmp, target);
}

}  // namespace render
