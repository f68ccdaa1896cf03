#include "kneetex/reports.hpp"

#include "kneetex/errors.hpp"
#include "kneetex/geometry.hpp"

#include <png.h>

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace kneetex {

namespace {

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
  auto* sink = static_cast<std::vector<unsigned char>*>(png_get_io_ptr(png));
  sink->insert(sink->end(), data, data + length);
}

// 8-bit grayscale PNG in memory; intensities are scaled from the 14-bit range.
std::vector<unsigned char> encode_png_gray8(const ImageU16& image) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png: allocation failure");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png: allocation failure");
  }
  std::vector<unsigned char> out;
  std::vector<unsigned char> row(static_cast<std::size_t>(image.cols()));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png: encode failure");
  }

  png_set_write_fn(png, &out, append_bytes, nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.cols()),
               static_cast<png_uint_32>(image.rows()), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (Eigen::Index y = 0; y < image.rows(); ++y) {
    for (Eigen::Index x = 0; x < image.cols(); ++x)
      row[static_cast<std::size_t>(x)] =
          static_cast<unsigned char>((static_cast<unsigned>(image(y, x)) * 255u) /
                                     static_cast<unsigned>(kIntensityMax));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

std::string base64_encode(const std::vector<unsigned char>& data) {
  static const char table[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    const unsigned v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out.push_back(table[(v >> 18) & 63]);
    out.push_back(table[(v >> 12) & 63]);
    out.push_back(table[(v >> 6) & 63]);
    out.push_back(table[v & 63]);
  }
  if (i + 1 == data.size()) {
    const unsigned v = data[i] << 16;
    out.push_back(table[(v >> 18) & 63]);
    out.push_back(table[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == data.size()) {
    const unsigned v = (data[i] << 16) | (data[i + 1] << 8);
    out.push_back(table[(v >> 18) & 63]);
    out.push_back(table[(v >> 12) & 63]);
    out.push_back(table[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

void svg_polygon(std::ostream& os, const OrientedRect& rect, const char* color) {
  os << "  <polygon points=\"";
  for (const Vec2& c : rect.corners()) os << c.x() << ',' << c.y() << ' ';
  os << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"3\"";
  if (rect.out_of_bone) os << " stroke-dasharray=\"12,6\"";
  os << "/>\n";
  const Vec2 label_at = rect.origin + 6.0 * rect.u_axis + 24.0 * rect.v_axis;
  os << "  <text x=\"" << label_at.x() << "\" y=\"" << label_at.y() << "\" fill=\""
     << color << "\" font-size=\"28\" font-family=\"sans-serif\">"
     << to_string(rect.name) << "</text>\n";
}

void svg_marker(std::ostream& os, const Vec2& p, const char* color) {
  os << "  <circle cx=\"" << p.x() << "\" cy=\"" << p.y() << "\" r=\"6\" fill=\"" << color
     << "\"/>\n";
}

}  // namespace

void write_overlay_svg(const std::filesystem::path& path, const ImageU16& image,
                       const RoiLayout& layout, const LandmarkSet& landmarks) {
  if (image.size() == 0) throw InputError("overlay: empty image");
  const std::string encoded = base64_encode(encode_png_gray8(image));

  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" "
        "xmlns:xlink=\"http://www.w3.org/1999/xlink\" width=\"" << image.cols()
     << "\" height=\"" << image.rows() << "\" viewBox=\"0 0 " << image.cols() << ' '
     << image.rows() << "\">\n";
  os << "  <image x=\"0\" y=\"0\" width=\"" << image.cols() << "\" height=\""
     << image.rows() << "\" xlink:href=\"data:image/png;base64," << encoded << "\"/>\n";

  for (const OrientedRect& rect : layout.rois) {
    const bool femoral = rect.name == RoiName::F0 || rect.name == RoiName::F1;
    svg_polygon(os, rect, femoral ? "#e4572e" : "#2e86ab");
  }
  svg_marker(os, landmarks.medial_plateau, "#f6c744");
  svg_marker(os, landmarks.lateral_plateau, "#f6c744");
  svg_marker(os, landmarks.medial_condyle_tip, "#76b041");
  svg_marker(os, landmarks.lateral_condyle_tip, "#76b041");
  os << "</svg>\n";
  if (!os) throw InputError("write failed: " + path.string());
}

}  // namespace kneetex
