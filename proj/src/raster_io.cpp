#include "setreg/raster_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "setreg/errors.hpp"

namespace setreg {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw FormatError("cannot open '" + path.string() + "'");
  return f;
}

[[noreturn]] void png_error_handler(png_structp, png_const_charp msg) {
  throw FormatError(std::string("libpng: ") + msg);
}

void png_warning_handler(png_structp, png_const_charp) {}

RawRaster read_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler,
                                           png_warning_handler);
  if (!png) throw FormatError("libpng: out of memory");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_read_struct(png, info, nullptr); }
  } guard{&png, &info};
  if (!info) throw FormatError("libpng: out of memory");

  try {
    png_init_io(png, file.get());
    png_read_info(png, info);

    const int color_type = png_get_color_type(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_RGB) {
      throw FormatError("unsupported PNG color type " + std::to_string(color_type) +
                        " (expected gray or RGB)");
    }
    if (bit_depth != 8 && bit_depth != 16) {
      throw FormatError("unsupported PNG bit depth " + std::to_string(bit_depth));
    }
    if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) {
      png_set_interlace_handling(png);
      png_read_update_info(png, info);
    }

    RawRaster raw;
    raw.width = static_cast<int>(png_get_image_width(png, info));
    raw.height = static_cast<int>(png_get_image_height(png, info));
    raw.channels = color_type == PNG_COLOR_TYPE_GRAY ? 1 : 3;
    raw.bit_depth = bit_depth;

    const std::size_t row_bytes = png_get_rowbytes(png, info);
    std::vector<png_byte> buffer(row_bytes * raw.height);
    std::vector<png_bytep> rows(raw.height);
    for (int y = 0; y < raw.height; ++y) rows[y] = buffer.data() + y * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);

    const std::size_t count = static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
    raw.samples.resize(count);
    if (bit_depth == 8) {
      std::copy(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(count),
                raw.samples.begin());
    } else {
      for (std::size_t i = 0; i < count; ++i) {
        raw.samples[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
      }
    }
    return raw;
  } catch (const FormatError& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

// Reads the next whitespace-separated header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

int pgm_int(std::istream& in, const std::filesystem::path& path, const char* what) {
  const std::string tok = pgm_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw FormatError("'" + path.string() + "': bad PGM " + what + " '" + tok + "'");
  }
}

RawRaster read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  const std::string magic = pgm_token(in);
  if (magic != "P5" && magic != "P2") {
    throw FormatError("'" + path.string() + "': unsupported PNM variant " + magic);
  }
  RawRaster raw;
  raw.width = pgm_int(in, path, "width");
  raw.height = pgm_int(in, path, "height");
  const int maxval = pgm_int(in, path, "maxval");
  if (raw.width < 1 || raw.height < 1 || maxval < 1 || maxval > 65535) {
    throw FormatError("'" + path.string() + "': invalid PGM header");
  }
  raw.channels = 1;
  raw.bit_depth = maxval < 256 ? 8 : 16;
  const std::size_t count = static_cast<std::size_t>(raw.width) * raw.height;
  raw.samples.resize(count);

  if (magic == "P2") {
    for (std::size_t i = 0; i < count; ++i) {
      const int v = pgm_int(in, path, "sample");
      if (v < 0 || v > maxval) throw FormatError("'" + path.string() + "': sample out of range");
      raw.samples[i] = static_cast<std::uint16_t>(v);
    }
  } else {
    const std::size_t bytes_per = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> buf(count * bytes_per);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
      throw FormatError("'" + path.string() + "': truncated PGM data");
    }
    for (std::size_t i = 0; i < count; ++i) {
      raw.samples[i] = bytes_per == 1
                           ? buf[i]
                           : static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
    }
  }

  // Rescale non-standard maxvals onto the full 8/16-bit range.
  const int full = raw.bit_depth == 8 ? 255 : 65535;
  if (maxval != full) {
    for (auto& s : raw.samples) {
      s = static_cast<std::uint16_t>(std::lround(static_cast<double>(s) * full / maxval));
    }
  }
  return raw;
}

}  // namespace

RawRaster read_raster(const std::filesystem::path& path) {
  std::array<unsigned char, 8> sig{};
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path.string() + "'");
    in.read(reinterpret_cast<char*>(sig.data()), sig.size());
    if (in.gcount() < 2) throw FormatError("'" + path.string() + "': file too short");
  }
  if (png_sig_cmp(sig.data(), 0, sig.size()) == 0) return read_png(path);
  if (sig[0] == 'P' && (sig[1] == '5' || sig[1] == '2')) return read_pgm(path);
  throw FormatError("'" + path.string() + "': not a PNG or PGM file");
}

ImageGrid load_grayscale(const std::filesystem::path& path) {
  const RawRaster raw = read_raster(path);
  try {
    return to_grayscale(raw);
  } catch (const FormatError& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

bool is_raster_filename(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".pgm";
}

void write_png16(const std::filesystem::path& path, const ImageGrid& img) {
  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler,
                                            png_warning_handler);
  if (!png) throw FormatError("libpng: out of memory");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_write_struct(png, info); }
  } guard{&png, &info};
  if (!info) throw FormatError("libpng: out of memory");

  const int w = img.width();
  const int h = img.height();
  std::vector<png_byte> buffer(static_cast<std::size_t>(w) * h * 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto v = static_cast<std::uint16_t>(std::lround(std::clamp(img(x, y), 0.0, 1.0) * 65535.0));
      const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 2;
      buffer[i] = static_cast<png_byte>(v >> 8);
      buffer[i + 1] = static_cast<png_byte>(v & 0xff);
    }
  }
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[y] = buffer.data() + static_cast<std::size_t>(y) * w * 2;

  try {
    png_init_io(png, file.get());
    png_set_IHDR(png, info, w, h, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
  } catch (const FormatError& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

void write_pgm_normalized(const std::filesystem::path& path, const ImageGrid& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  const auto px = img.pixels();
  const double peak = *std::max_element(px.begin(), px.end());
  const double scale = peak > 0.0 ? 255.0 / peak : 0.0;
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  std::vector<unsigned char> bytes(px.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    bytes[i] = static_cast<unsigned char>(std::lround(std::clamp(px[i] * scale, 0.0, 255.0)));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

}  // namespace setreg
