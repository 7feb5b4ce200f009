#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <system_error>

#include "domino/errors.hpp"
#include "domino/image.hpp"

namespace domino::imaging {
namespace {

namespace fs = std::filesystem;

double full_scale(int depth) { return depth == 16 ? 65535.0 : 255.0; }

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::vector<std::uint8_t> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed on " + path.string());
  return bytes;
}

// ---------------------------------------------------------------- PGM (P5)

Image decode_pgm(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space_and_comments();
    long value = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1'000'000'000L) throw FormatError("PGM header value too large");
      ++pos;
      any = true;
    }
    if (!any) throw FormatError("malformed PGM header in " + path.string());
    return value;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw FormatError("not a binary PGM (P5): " + path.string());
  }
  pos = 2;
  const long width = read_int();
  const long height = read_int();
  const long maxval = read_int();
  if (width < 1 || height < 1) throw FormatError("PGM has empty dimensions");
  if (maxval < 1 || maxval > 65535) throw FormatError("PGM maxval out of range");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw FormatError("malformed PGM header in " + path.string());
  }
  ++pos;  // single whitespace before raster

  const int depth = maxval > 255 ? 16 : 8;
  const std::size_t bytes_per = depth == 16 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - pos < count * bytes_per) {
    throw FormatError("truncated PGM raster in " + path.string());
  }
  std::vector<double> data(count);
  const double scale = full_scale(depth);
  for (std::size_t k = 0; k < count; ++k) {
    unsigned sample = bytes[pos + k * bytes_per];
    if (bytes_per == 2) sample = (sample << 8) | bytes[pos + k * 2 + 1];
    data[k] = std::min(1.0, sample / scale);
  }
  return Image(static_cast<int>(height), static_cast<int>(width), std::move(data), depth);
}

std::vector<std::uint8_t> encode_pgm(const Image& img) {
  const int depth = img.bit_depth();
  const double scale = full_scale(depth);
  std::ostringstream header;
  header << "P5\n" << img.width() << ' ' << img.height() << '\n'
         << static_cast<int>(scale) << '\n';
  const std::string h = header.str();
  std::vector<std::uint8_t> out(h.begin(), h.end());
  out.reserve(out.size() + img.size() * (depth == 16 ? 2 : 1));
  for (double v : img.pixels()) {
    const auto q = static_cast<unsigned>(std::lround(std::clamp(v, 0.0, 1.0) * scale));
    if (depth == 16) out.push_back(static_cast<std::uint8_t>(q >> 8));
    out.push_back(static_cast<std::uint8_t>(q & 0xff));
  }
  return out;
}

// --------------------------------------------------------------------- PNG

struct PngReadGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadGuard() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct PngWriteGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteGuard() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

// libpng reports errors by longjmp. The helpers below hold no objects with
// destructors between setjmp and any libpng call, and callers translate the
// failure into an exception afterwards.
struct PngError {
  char message[256] = {};
};

void png_on_error(png_structp png, png_const_charp msg) {
  auto* err = static_cast<PngError*>(png_get_error_ptr(png));
  std::snprintf(err->message, sizeof err->message, "%s", msg);
  png_longjmp(png, 1);
}

void png_on_warning(png_structp, png_const_charp) {}

struct ByteReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void png_read_bytes(png_structp png, png_bytep out, png_size_t n) {
  auto* reader = static_cast<ByteReader*>(png_get_io_ptr(png));
  if (reader->size - reader->pos < n) png_error(png, "truncated PNG");
  std::memcpy(out, reader->data + reader->pos, n);
  reader->pos += n;
}

struct ByteSink {
  std::vector<std::uint8_t>* out;
};

void png_write_bytes(png_structp png, png_bytep data, png_size_t n) {
  auto* sink = static_cast<ByteSink*>(png_get_io_ptr(png));
  sink->out->insert(sink->out->end(), data, data + n);
}

void png_flush_noop(png_structp) {}

struct PngHeader {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int color_type = 0;
  int bit_depth = 0;
  std::size_t row_bytes = 0;
};

bool png_read_header(png_structp png, png_infop info, ByteReader* reader, PngHeader* header) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_read_fn(png, reader, png_read_bytes);
  png_read_info(png, info);
  header->width = png_get_image_width(png, info);
  header->height = png_get_image_height(png, info);
  header->color_type = png_get_color_type(png, info);
  header->bit_depth = png_get_bit_depth(png, info);
  if (header->color_type == PNG_COLOR_TYPE_GRAY && header->bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  png_read_update_info(png, info);
  header->row_bytes = png_get_rowbytes(png, info);
  return true;
}

bool png_read_raster(png_structp png, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_image(png, rows);
  return true;
}

bool png_write_raster(png_structp png, png_infop info, ByteSink* sink, png_uint_32 width,
                      png_uint_32 height, int depth, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_write_fn(png, sink, png_write_bytes, png_flush_noop);
  png_set_IHDR(png, info, width, height, depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  return true;
}

Image decode_png(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw FormatError("not a PNG file: " + path.string());
  }
  PngError err;
  PngReadGuard guard;
  guard.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_on_error, png_on_warning);
  if (!guard.png) throw FormatError("libpng initialisation failed");
  guard.info = png_create_info_struct(guard.png);
  if (!guard.info) throw FormatError("libpng initialisation failed");

  ByteReader reader{bytes.data(), bytes.size(), 0};
  PngHeader header;
  if (!png_read_header(guard.png, guard.info, &reader, &header)) {
    throw FormatError(std::string("PNG error in ") + path.string() + ": " + err.message);
  }
  if (header.color_type != PNG_COLOR_TYPE_GRAY) {
    throw FormatError("unsupported PNG channel layout (need single-channel gray): " +
                      path.string());
  }
  const int depth = header.bit_depth == 16 ? 16 : 8;

  std::vector<std::uint8_t> raster(header.row_bytes * header.height);
  std::vector<png_bytep> rows(header.height);
  for (png_uint_32 r = 0; r < header.height; ++r) rows[r] = raster.data() + r * header.row_bytes;
  if (!png_read_raster(guard.png, rows.data())) {
    throw FormatError(std::string("PNG error in ") + path.string() + ": " + err.message);
  }

  const double scale = full_scale(depth);
  std::vector<double> data(static_cast<std::size_t>(header.width) * header.height);
  for (png_uint_32 r = 0; r < header.height; ++r) {
    const std::uint8_t* row = rows[r];
    for (png_uint_32 c = 0; c < header.width; ++c) {
      const unsigned sample = depth == 16 ? (row[2 * c] << 8) | row[2 * c + 1] : row[c];
      data[static_cast<std::size_t>(r) * header.width + c] = sample / scale;
    }
  }
  return Image(static_cast<int>(header.height), static_cast<int>(header.width), std::move(data),
               depth);
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  const int depth = img.bit_depth();
  const double scale = full_scale(depth);
  const std::size_t bytes_per = depth == 16 ? 2 : 1;
  const std::size_t row_bytes = static_cast<std::size_t>(img.width()) * bytes_per;
  std::vector<std::uint8_t> raster(row_bytes * img.height());
  std::vector<png_bytep> rows(img.height());
  for (int r = 0; r < img.height(); ++r) {
    std::uint8_t* row = raster.data() + r * row_bytes;
    rows[r] = row;
    for (int c = 0; c < img.width(); ++c) {
      const auto q = static_cast<unsigned>(std::lround(std::clamp(img(r, c), 0.0, 1.0) * scale));
      if (depth == 16) {
        row[2 * c] = static_cast<std::uint8_t>(q >> 8);
        row[2 * c + 1] = static_cast<std::uint8_t>(q & 0xff);
      } else {
        row[c] = static_cast<std::uint8_t>(q);
      }
    }
  }

  PngError err;
  PngWriteGuard guard;
  guard.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_on_error, png_on_warning);
  if (!guard.png) throw IoError("libpng initialisation failed");
  guard.info = png_create_info_struct(guard.png);
  if (!guard.info) throw IoError("libpng initialisation failed");

  std::vector<std::uint8_t> out;
  ByteSink sink{&out};
  if (!png_write_raster(guard.png, guard.info, &sink, static_cast<png_uint_32>(img.width()),
                        static_cast<png_uint_32>(img.height()), depth, rows.data())) {
    throw IoError(std::string("PNG encode failed: ") + err.message);
  }
  return out;
}

}  // namespace

void write_file_atomically(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed on " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

namespace {

void write_atomically(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  write_file_atomically(path, {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

}  // namespace

Image load_image(const fs::path& path) {
  const auto bytes = read_all(path);
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return decode_png(bytes, path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes, path);
  throw FormatError("unsupported image format (expected PNG or binary PGM): " + path.string());
}

void save_image(const Image& img, const fs::path& path) {
  if (img.empty()) throw PreconditionError("cannot save an empty image");
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") {
    write_atomically(path, encode_pgm(img));
  } else if (ext == ".png") {
    write_atomically(path, encode_png(img));
  } else {
    throw FormatError("unsupported output extension '" + ext + "' (use .png or .pgm)");
  }
}

}  // namespace domino::imaging
