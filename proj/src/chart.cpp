#include "serpeval/chart.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>

#include "serpeval/common.hpp"

namespace serpeval {

namespace {

// 5x7 glyphs, one byte per row, bit 4 is the leftmost pixel.
struct Glyph {
  char ch;
  std::array<std::uint8_t, 7> rows;
};

constexpr Glyph kFont[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'A', {0x0E, 0x11, 0x11, 0x11, 0x1F, 0x11, 0x11}},
    {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
    {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
    {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
    {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
    {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
    {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
    {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
    {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
    {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
    {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {'Y', {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}},
    {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {',', {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}},
    {'%', {0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'/', {0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x00}},
    {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
    {'@', {0x0E, 0x11, 0x01, 0x0D, 0x15, 0x15, 0x0E}},
    {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
    {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
    {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
};

const Glyph* find_glyph(char c) {
  if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  for (const auto& g : kFont)
    if (g.ch == c) return &g;
  return nullptr;
}

struct Rgb {
  std::uint8_t r, g, b;
};

constexpr Rgb kBlack{0, 0, 0};
constexpr Rgb kGrid{220, 220, 220};
constexpr Rgb kPalette[] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40},
                            {148, 103, 189}, {140, 86, 75}, {227, 119, 194}, {127, 127, 127}};

class Canvas {
 public:
  Canvas(int w, int h) {
    image_.width = w;
    image_.height = h;
    image_.rgb.assign(static_cast<std::size_t>(w) * h * 3, 255);
  }

  void put(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= image_.width || y >= image_.height) return;
    auto* p = &image_.rgb[(static_cast<std::size_t>(y) * image_.width + x) * 3];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  void fill(int x0, int y0, int x1, int y1, Rgb c) {
    for (int y = std::min(y0, y1); y < std::max(y0, y1); ++y)
      for (int x = std::min(x0, x1); x < std::max(x0, x1); ++x) put(x, y, c);
  }

  static int text_width(const std::string& s, int scale) {
    return static_cast<int>(s.size()) * 6 * scale;
  }

  void text(int x, int y, const std::string& s, int scale, Rgb c) {
    for (char ch : s) {
      if (const Glyph* g = find_glyph(ch))
        for (int row = 0; row < 7; ++row)
          for (int col = 0; col < 5; ++col)
            if (g->rows[row] & (0x10 >> col)) fill(x + col * scale, y + row * scale,
                                                   x + (col + 1) * scale, y + (row + 1) * scale, c);
      x += 6 * scale;
    }
  }

  Image take() { return std::move(image_); }

 private:
  Image image_;
};

double nice_ceiling(double v) {
  if (v <= 0.0) return 1.0;
  const double magnitude = std::pow(10.0, std::floor(std::log10(v)));
  for (double step : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (step * magnitude >= v) return step * magnitude;
  return 10.0 * magnitude;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, v == std::floor(v) ? "%.0f" : "%.2g", v);
  return buf;
}

}  // namespace

Image render_bar_chart(const BarChart& chart) {
  const int left = 70, right = 30, top = 50, bottom = 90;
  const int legend_w = 20 + 12 * static_cast<int>(std::max<std::size_t>(
                                     8, [&] {
                                       std::size_t m = 0;
                                       for (const auto& s : chart.series) m = std::max(m, s.size());
                                       return m;
                                     }()));
  const int plot_w = std::max<int>(400, static_cast<int>(chart.groups.size()) *
                                            (static_cast<int>(chart.series.size()) * 18 + 30));
  const int plot_h = 300;
  Canvas canvas(left + plot_w + right + legend_w, top + plot_h + bottom);

  double max_value = 0.0;
  for (const auto& row : chart.values)
    for (const auto& v : row)
      if (v && std::isfinite(*v)) max_value = std::max(max_value, *v);
  const double y_max = chart.y_max.value_or(nice_ceiling(max_value));

  canvas.text(left, 16, chart.title, 2, kBlack);
  const int x0 = left, y0 = top + plot_h;

  for (int i = 0; i <= 5; ++i) {
    const double v = y_max * i / 5.0;
    const int y = y0 - static_cast<int>(std::lround(plot_h * i / 5.0));
    canvas.fill(x0, y, x0 + plot_w, y + 1, kGrid);
    const auto label = tick_label(v);
    canvas.text(x0 - 8 - Canvas::text_width(label, 1), y - 3, label, 1, kBlack);
  }
  if (!chart.y_label.empty()) canvas.text(8, top - 14, chart.y_label, 1, kBlack);

  const int groups = static_cast<int>(chart.groups.size());
  const int series = static_cast<int>(chart.series.size());
  if (groups > 0 && series > 0) {
    const int slot = plot_w / groups;
    const int bar = std::max(2, (slot - 20) / series);
    for (int g = 0; g < groups; ++g) {
      const int gx = x0 + g * slot + (slot - bar * series) / 2;
      for (int s = 0; s < series; ++s) {
        if (g >= static_cast<int>(chart.values.size()) ||
            s >= static_cast<int>(chart.values[g].size()))
          continue;
        const auto& v = chart.values[g][s];
        if (!v || !std::isfinite(*v)) continue;
        const double clamped = std::clamp(*v, 0.0, y_max);
        const int h = static_cast<int>(std::lround(plot_h * clamped / y_max));
        canvas.fill(gx + s * bar, y0 - h, gx + (s + 1) * bar - 1, y0,
                    kPalette[s % std::size(kPalette)]);
      }
      const auto& label = chart.groups[g];
      const int lw = Canvas::text_width(label, 1);
      canvas.text(x0 + g * slot + (slot - lw) / 2, y0 + 10, label, 1, kBlack);
    }
  }
  canvas.fill(x0, top, x0 + 1, y0 + 1, kBlack);
  canvas.fill(x0, y0, x0 + plot_w, y0 + 1, kBlack);

  const int lx = left + plot_w + right;
  for (int s = 0; s < series; ++s) {
    const int ly = top + s * 18;
    canvas.fill(lx, ly, lx + 10, ly + 10, kPalette[s % std::size(kPalette)]);
    canvas.text(lx + 16, ly + 1, chart.series[s], 1, kBlack);
  }
  return canvas.take();
}

void write_png(const Image& image, const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png: cannot allocate write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png: cannot allocate info struct");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: write failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    auto* row = const_cast<png_bytep>(&image.rgb[static_cast<std::size_t>(y) * image.width * 3]);
    png_write_row(png, row);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace serpeval
