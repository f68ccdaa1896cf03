#include "kneetex/image_io.hpp"

#include "kneetex/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace kneetex {

namespace {

// Reads one whitespace-delimited token, skipping '#' comments to end of line.
std::string next_pgm_token(std::istream& is) {
  std::string token;
  int c = 0;
  while ((c = is.get()) != EOF) {
    if (c == '#') {
      while ((c = is.get()) != EOF && c != '\n') {}
      continue;
    }
    if (!std::isspace(c)) {
      token.push_back(static_cast<char>(c));
      break;
    }
  }
  while ((c = is.get()) != EOF && !std::isspace(c) && c != '#')
    token.push_back(static_cast<char>(c));
  if (c == '#') is.unget();
  return token;
}

long parse_pgm_int(std::istream& is, const char* what, const std::string& file) {
  const std::string token = next_pgm_token(is);
  if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos)
    throw InputError(file + ": bad PGM " + what + " '" + token + "'");
  return std::stol(token);
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace

ImageU16 read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot read " + path.string());

  const std::string magic = next_pgm_token(is);
  if (magic != "P5") throw InputError(path.string() + ": not a binary PGM (P5)");
  const long width = parse_pgm_int(is, "width", path.string());
  const long height = parse_pgm_int(is, "height", path.string());
  const long maxval = parse_pgm_int(is, "maxval", path.string());
  if (width <= 0 || height <= 0)
    throw InputError(path.string() + ": empty image");
  if (maxval <= 0 || maxval > kIntensityMax)
    throw InputError(path.string() + ": maxval " + std::to_string(maxval) +
                     " outside the supported 14-bit range");
  // The token reader has already consumed the single whitespace byte that
  // separates the maxval from the raster.

  ImageU16 image(height, width);
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (maxval < 256) {
    std::vector<unsigned char> raw(count);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(is.gcount()) != raw.size())
      throw InputError(path.string() + ": truncated raster");
    for (std::size_t i = 0; i < count; ++i) image.data()[i] = raw[i];
  } else {
    std::vector<unsigned char> raw(count * 2);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(is.gcount()) != raw.size())
      throw InputError(path.string() + ": truncated raster");
    for (std::size_t i = 0; i < count; ++i) {
      const auto value = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
      if (value > maxval)
        throw InputError(path.string() + ": sample exceeds declared maxval");
      image.data()[i] = value;
    }
  }
  return image;
}

void write_pgm(const std::filesystem::path& path, const ImageU16& image) {
  if (image.size() == 0) throw InputError("write_pgm: empty image");
  if (image.maxCoeff() > kIntensityMax)
    throw InputError("write_pgm: sample exceeds the 14-bit range");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path.string());
  os << "P5\n" << image.cols() << ' ' << image.rows() << "\n" << kIntensityMax << "\n";
  std::vector<unsigned char> raw(static_cast<std::size_t>(image.size()) * 2);
  for (std::size_t i = 0; i < static_cast<std::size_t>(image.size()); ++i) {
    raw[2 * i] = static_cast<unsigned char>(image.data()[i] >> 8);
    raw[2 * i + 1] = static_cast<unsigned char>(image.data()[i] & 0xff);
  }
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!os) throw InputError("write failed: " + path.string());
}

ImageU16 read_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw InputError("cannot read " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png: allocation failure");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png: allocation failure");
  }
  std::vector<png_bytep> row_ptrs;
  std::vector<unsigned char> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError(path.string() + ": corrupt PNG");
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (color_type != PNG_COLOR_TYPE_GRAY || (bit_depth != 8 && bit_depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError(path.string() + ": only 8/16-bit grayscale PNG is supported");
  }

  const std::size_t stride = static_cast<std::size_t>(width) * (bit_depth == 16 ? 2 : 1);
  buffer.resize(stride * height);
  row_ptrs.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) row_ptrs[y] = buffer.data() + y * stride;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  ImageU16 image(height, width);
  for (png_uint_32 y = 0; y < height; ++y) {
    const unsigned char* row = buffer.data() + y * stride;
    for (png_uint_32 x = 0; x < width; ++x) {
      std::uint16_t value = 0;
      if (bit_depth == 16)
        value = static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
      else
        value = row[x];
      if (value > kIntensityMax)
        throw InputError(path.string() + ": sample exceeds the 14-bit range");
      image(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = value;
    }
  }
  return image;
}

void write_png16(const std::filesystem::path& path, const ImageU16& image) {
  if (image.size() == 0) throw InputError("write_png: empty image");
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw InputError("cannot write " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png: allocation failure");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png: allocation failure");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw InputError("png write failed: " + path.string());
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.cols()),
               static_cast<png_uint_32>(image.rows()), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<unsigned char> row(static_cast<std::size_t>(image.cols()) * 2);
  for (Eigen::Index y = 0; y < image.rows(); ++y) {
    for (Eigen::Index x = 0; x < image.cols(); ++x) {
      row[static_cast<std::size_t>(2 * x)] = static_cast<unsigned char>(image(y, x) >> 8);
      row[static_cast<std::size_t>(2 * x + 1)] = static_cast<unsigned char>(image(y, x) & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ImageU16 read_image(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return read_png(path);
  throw InputError(path.string() + ": unsupported image format (use .pgm or .png)");
}

}  // namespace kneetex
