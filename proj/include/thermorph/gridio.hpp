#ifndef THERMORPH_GRIDIO_HPP
#define THERMORPH_GRIDIO_HPP

#include <png.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "thermorph/colormap.hpp"
#include "thermorph/error.hpp"
#include "thermorph/grid.hpp"
#include "thermorph/label_mask.hpp"

namespace thermorph {

enum class GridFormat { csv, pfm };
enum class MaskFormat { pgm, png };

namespace detail {

inline std::string lower_extension(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Writes to a sibling temporary file, then renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::io_error, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot rename onto " + path.string() + ": " + ec.message());
}

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline ScalarGrid parse_csv(std::string_view text, const std::string& name) {
  std::vector<double> values;
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) {
      if (!trim(text).empty()) {
        throw Error(ErrorCode::parse_error, name + ":" + std::to_string(line_no) + ": blank line inside data");
      }
      break;
    }
    std::size_t cols = 0;
    while (true) {
      const auto comma = line.find(',');
      const auto field = trim(line.substr(0, comma));
      ++cols;
      const std::string where = name + ":" + std::to_string(line_no) + ":" + std::to_string(cols);
      double v = 0.0;
      const char* end = field.data() + field.size();
      auto [ptr, ec] = std::from_chars(field.data(), end, v);
      if (field.empty() || ec == std::errc::invalid_argument || ptr != end) {
        throw Error(ErrorCode::parse_error, where + ": not a number: '" + std::string(field) + "'");
      }
      if (ec == std::errc::result_out_of_range || !std::isfinite(v)) {
        throw Error(ErrorCode::non_finite_value, where + ": non-finite value '" + std::string(field) + "'");
      }
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }
    if (height == 0) {
      width = cols;
    } else if (cols != width) {
      throw Error(ErrorCode::ragged_rows, name + ":" + std::to_string(line_no) + ": expected " +
                                              std::to_string(width) + " columns, got " + std::to_string(cols));
    }
    ++height;
  }
  if (height == 0) throw Error(ErrorCode::parse_error, name + ": empty file");
  return ScalarGrid(width, height, std::move(values));
}

/// Whitespace-separated header tokens with '#' comments (PNM family).
class HeaderReader {
 public:
  HeaderReader(std::string_view data, std::string name) : data_(data), name_(std::move(name)) {}

  std::string token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    if (start == pos_) throw Error(ErrorCode::parse_error, name_ + ": truncated header");
    return std::string(data_.substr(start, pos_ - start));
  }

  std::size_t number() {
    const auto t = token();
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
      throw Error(ErrorCode::parse_error, name_ + ": bad header number '" + t + "'");
    }
    return v;
  }

  /// Consumes the single whitespace byte that ends a binary header.
  std::size_t body_offset() {
    if (pos_ >= data_.size()) throw Error(ErrorCode::parse_error, name_ + ": missing raster");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      if (std::isspace(static_cast<unsigned char>(data_[pos_]))) {
        ++pos_;
      } else if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view data_;
  std::string name_;
  std::size_t pos_ = 0;
};

inline ScalarGrid parse_pfm(std::string_view data, const std::string& name) {
  HeaderReader header(data, name);
  if (header.token() != "Pf") throw Error(ErrorCode::parse_error, name + ": not a grayscale PFM (expected 'Pf')");
  const std::size_t w = header.number();
  const std::size_t h = header.number();
  const auto scale_tok = header.token();
  double scale = 0.0;
  auto [ptr, ec] = std::from_chars(scale_tok.data(), scale_tok.data() + scale_tok.size(), scale);
  if (ec != std::errc{} || scale == 0.0) throw Error(ErrorCode::parse_error, name + ": bad PFM scale");
  const bool little = scale < 0.0;
  const std::size_t off = header.body_offset();
  if (w == 0 || h == 0) throw Error(ErrorCode::parse_error, name + ": zero dimension");
  if (data.size() - off < w * h * 4) throw Error(ErrorCode::parse_error, name + ": truncated raster");
  std::vector<double> values(w * h);
  for (std::size_t row = 0; row < h; ++row) {
    const std::size_t y = h - 1 - row;  // PFM rows run bottom to top
    for (std::size_t x = 0; x < w; ++x) {
      const auto* p = reinterpret_cast<const unsigned char*>(data.data() + off + (row * w + x) * 4);
      std::uint32_t bits = little ? (std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
                                     std::uint32_t{p[3]} << 24)
                                  : (std::uint32_t{p[3]} | std::uint32_t{p[2]} << 8 | std::uint32_t{p[1]} << 16 |
                                     std::uint32_t{p[0]} << 24);
      const auto f = std::bit_cast<float>(bits);
      if (!std::isfinite(f)) {
        throw Error(ErrorCode::non_finite_value,
                    name + ": non-finite value at (" + std::to_string(x) + ", " + std::to_string(y) + ")");
      }
      values[y * w + x] = static_cast<double>(f);
    }
  }
  return ScalarGrid(w, h, std::move(values));
}

inline std::string encode_pfm(const ScalarGrid& grid) {
  std::string out = "Pf\n" + std::to_string(grid.width()) + " " + std::to_string(grid.height()) + "\n-1.0\n";
  out.reserve(out.size() + grid.size() * 4);
  for (std::size_t row = 0; row < grid.height(); ++row) {
    const std::size_t y = grid.height() - 1 - row;
    for (std::size_t x = 0; x < grid.width(); ++x) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(grid(x, y)));
      for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
    }
  }
  return out;
}

inline LabelMask parse_pgm(std::string_view data, const std::string& name) {
  HeaderReader header(data, name);
  const auto magic = header.token();
  if (magic != "P5" && magic != "P2") throw Error(ErrorCode::parse_error, name + ": not a PGM file");
  const std::size_t w = header.number();
  const std::size_t h = header.number();
  const std::size_t maxval = header.number();
  if (w == 0 || h == 0) throw Error(ErrorCode::parse_error, name + ": zero dimension");
  if (maxval == 0 || maxval > 255) {
    throw Error(ErrorCode::unsupported_depth, name + ": only 8-bit PGM is supported (maxval " +
                                                  std::to_string(maxval) + ")");
  }
  std::vector<int> labels(w * h);
  if (magic == "P5") {
    const std::size_t off = header.body_offset();
    if (data.size() - off < w * h) throw Error(ErrorCode::parse_error, name + ": truncated raster");
    for (std::size_t i = 0; i < w * h; ++i) labels[i] = data[off + i] != 0 ? 1 : 0;
  } else {
    for (std::size_t i = 0; i < w * h; ++i) labels[i] = header.number() != 0 ? 1 : 0;
  }
  return LabelMask::binary(w, h, std::move(labels));
}

struct PngRaster {
  std::size_t width = 0;
  std::size_t height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;
};

inline void encode_png(const std::filesystem::path& path, const PngRaster& raster) {
  auto tmp = path;
  tmp += ".tmp";
  FILE* fp = std::fopen(tmp.string().c_str(), "wb");
  if (!fp) throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw Error(ErrorCode::io_error, "libpng failed writing " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(raster.width), static_cast<png_uint_32>(raster.height), 8,
               raster.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = raster.width * static_cast<std::size_t>(raster.channels);
  for (std::size_t y = 0; y < raster.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(raster.pixels.data() + y * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot rename onto " + path.string());
}

inline LabelMask decode_png_mask(const std::filesystem::path& path) {
  FILE* fp = std::fopen(path.string().c_str(), "rb");
  if (!fp) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw Error(ErrorCode::parse_error, path.string() + ": not a readable PNG");
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (depth > 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw Error(ErrorCode::unsupported_depth, path.string() + ": only 8-bit PNG masks are supported");
  }
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = pixels.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  std::vector<int> labels(static_cast<std::size_t>(w) * h);
  for (png_uint_32 y = 0; y < h; ++y) {
    for (png_uint_32 x = 0; x < w; ++x) labels[y * w + x] = pixels[y * stride + x] != 0 ? 1 : 0;
  }
  return LabelMask::binary(w, h, std::move(labels));
}

inline void write_raster(const std::filesystem::path& path, const PngRaster& raster) {
  if (lower_extension(path) == ".png") {
    encode_png(path, raster);
    return;
  }
  std::string out = (raster.channels == 3 ? "P6\n" : "P5\n") + std::to_string(raster.width) + " " +
                    std::to_string(raster.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(raster.pixels.data()), raster.pixels.size());
  write_file_atomic(path, out);
}

}  // namespace detail

inline GridFormat grid_format_for(const std::filesystem::path& path) {
  const auto ext = detail::lower_extension(path);
  if (ext == ".csv") return GridFormat::csv;
  if (ext == ".pfm") return GridFormat::pfm;
  throw Error(ErrorCode::invalid_argument, "cannot infer grid format from '" + path.string() + "'");
}

inline MaskFormat mask_format_for(const std::filesystem::path& path) {
  const auto ext = detail::lower_extension(path);
  if (ext == ".pgm") return MaskFormat::pgm;
  if (ext == ".png") return MaskFormat::png;
  throw Error(ErrorCode::invalid_argument, "cannot infer mask format from '" + path.string() + "'");
}

/// CSV: one row per line, comma separated. PFM: grayscale float32,
/// bottom-to-top rows. Files carry no ROI.
inline ScalarGrid read_grid(const std::filesystem::path& path, GridFormat format) {
  const auto data = detail::read_file(path);
  return format == GridFormat::csv ? detail::parse_csv(data, path.string()) : detail::parse_pfm(data, path.string());
}

inline ScalarGrid read_grid(const std::filesystem::path& path) { return read_grid(path, grid_format_for(path)); }

/// CSV uses shortest round-trip decimals, so reading it back restores every
/// double exactly. PFM stores float32 little-endian; values round to float
/// once, and later write/read cycles are bit-stable.
inline void write_grid(const ScalarGrid& grid, const std::filesystem::path& path, GridFormat format) {
  if (format == GridFormat::pfm) {
    detail::write_file_atomic(path, detail::encode_pfm(grid));
    return;
  }
  std::string out;
  out.reserve(grid.size() * 20);
  for (std::size_t y = 0; y < grid.height(); ++y) {
    for (std::size_t x = 0; x < grid.width(); ++x) {
      if (x) out.push_back(',');
      out += detail::format_double(grid(x, y));
    }
    out.push_back('\n');
  }
  detail::write_file_atomic(path, out);
}

inline void write_grid(const ScalarGrid& grid, const std::filesystem::path& path) {
  write_grid(grid, path, grid_format_for(path));
}

/// Any nonzero pixel reads as foreground.
inline LabelMask read_mask(const std::filesystem::path& path, MaskFormat format) {
  if (format == MaskFormat::png) return detail::decode_png_mask(path);
  return detail::parse_pgm(detail::read_file(path), path.string());
}

inline LabelMask read_mask(const std::filesystem::path& path) { return read_mask(path, mask_format_for(path)); }

/// Foreground is written as 255, everything else (including out-of-ROI) as 0.
inline void write_mask(const LabelMask& mask, const std::filesystem::path& path, MaskFormat format) {
  detail::PngRaster r{mask.width(), mask.height(), 1, std::vector<std::uint8_t>(mask.size())};
  for (std::size_t i = 0; i < mask.size(); ++i) r.pixels[i] = (mask.in_roi(i) && mask.foreground(i)) ? 255 : 0;
  if (format == MaskFormat::png) {
    detail::encode_png(path, r);
  } else {
    std::string out = "P5\n" + std::to_string(mask.width()) + " " + std::to_string(mask.height()) + "\n255\n";
    out.append(reinterpret_cast<const char*>(r.pixels.data()), r.pixels.size());
    detail::write_file_atomic(path, out);
  }
}

inline void write_mask(const LabelMask& mask, const std::filesystem::path& path) {
  write_mask(mask, path, mask_format_for(path));
}

enum class Colormap { thermal, gray };

struct RenderSpec {
  Colormap colormap = Colormap::thermal;
  /// Unset means the in-ROI min/max of the data.
  std::optional<double> min;
  std::optional<double> max;
  Rgb outside_roi{64, 64, 64};
};

struct RenderInfo {
  double min = 0.0;
  double max = 0.0;
  /// Auto range collapsed to a single value; everything was drawn mid-scale.
  bool degenerate_range = false;
};

/// Colour index for a value under [lo, hi]; out-of-range values clamp.
inline int colormap_index(double v, double lo, double hi) noexcept {
  const double t = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
  return static_cast<int>(std::lround(t * 255.0));
}

/// Colour-mapped 8-bit raster (binary PPM, or PNG for a .png path). The
/// value range goes to a `<path>.legend.txt` sidecar instead of the pixels.
inline RenderInfo render(const ScalarGrid& grid, const RenderSpec& spec, const std::filesystem::path& path) {
  if (spec.min.has_value() != spec.max.has_value()) {
    throw Error(ErrorCode::invalid_argument, "explicit render range needs both min and max");
  }
  RenderInfo info;
  if (spec.min) {
    if (!(*spec.min < *spec.max)) throw Error(ErrorCode::invalid_argument, "render range needs min < max");
    info.min = *spec.min;
    info.max = *spec.max;
  } else {
    bool any = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!grid.in_roi(i)) continue;
      info.min = any ? std::min(info.min, grid[i]) : grid[i];
      info.max = any ? std::max(info.max, grid[i]) : grid[i];
      any = true;
    }
    info.degenerate_range = !(info.min < info.max);
  }

  detail::PngRaster r{grid.width(), grid.height(), 3, std::vector<std::uint8_t>(grid.size() * 3)};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Rgb c = spec.outside_roi;
    if (grid.in_roi(i)) {
      const int idx = info.degenerate_range ? 128 : colormap_index(grid[i], info.min, info.max);
      c = spec.colormap == Colormap::thermal
              ? kThermalColormap[static_cast<std::size_t>(idx)]
              : Rgb{static_cast<std::uint8_t>(idx), static_cast<std::uint8_t>(idx), static_cast<std::uint8_t>(idx)};
    }
    r.pixels[3 * i] = c.r;
    r.pixels[3 * i + 1] = c.g;
    r.pixels[3 * i + 2] = c.b;
  }
  detail::write_raster(path, r);

  std::ostringstream legend;
  legend << "colormap = " << (spec.colormap == Colormap::thermal ? "thermal" : "gray") << "\n"
         << "min = " << detail::format_double(info.min) << "\n"
         << "max = " << detail::format_double(info.max) << "\n"
         << "degenerate_range = " << (info.degenerate_range ? "true" : "false") << "\n";
  auto legend_path = path;
  legend_path += ".legend.txt";
  detail::write_file_atomic(legend_path, legend.str());
  return info;
}

/// Tri-level view: delaminated white, possible gray, sound black.
inline void render_levels(const LabelMask& levels, const std::filesystem::path& path,
                          Rgb outside_roi = {64, 64, 64}) {
  constexpr Rgb kShades[3] = {{0, 0, 0}, {128, 128, 128}, {255, 255, 255}};
  detail::PngRaster r{levels.width(), levels.height(), 3, std::vector<std::uint8_t>(levels.size() * 3)};
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const int l = std::clamp(levels[i], 0, 2);
    const Rgb c = levels.in_roi(i) ? kShades[l] : outside_roi;
    r.pixels[3 * i] = c.r;
    r.pixels[3 * i + 1] = c.g;
    r.pixels[3 * i + 2] = c.b;
  }
  detail::write_raster(path, r);
}

}  // namespace thermorph

#endif  // THERMORPH_GRIDIO_HPP
