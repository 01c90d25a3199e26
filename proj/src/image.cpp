#include "l1ksvd/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace l1ksvd {
namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!tok.empty()) break;
    } else {
      tok.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  if (tok.empty()) throw ImageIoError("PGM: truncated header");
  return tok;
}

long header_number(std::istream& in, const char* what) {
  const std::string tok = header_token(in);
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ImageIoError(std::string("PGM: bad ") + what + " '" + tok + "'");
  }
}

}  // namespace

GrayImage::GrayImage(Index w, Index h, double fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w * h), fill) {
  if (w <= 0 || h <= 0) throw InvalidArgument("GrayImage: dimensions must be positive");
}

GrayImage read_pgm(std::istream& in) {
  const std::string magic = header_token(in);
  if (magic != "P5" && magic != "P2") throw ImageIoError("PGM: unsupported magic '" + magic + "'");
  const long width = header_number(in, "width");
  const long height = header_number(in, "height");
  const long maxval = header_number(in, "maxval");
  if (maxval > 65535) throw ImageIoError("PGM: maxval above 65535");

  GrayImage img(width, height);
  const double scale = 255.0 / static_cast<double>(maxval);
  const std::size_t count = img.pixels.size();
  if (magic == "P5") {
    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(count * bytes_per);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw ImageIoError("PGM: truncated pixel data");
    for (std::size_t i = 0; i < count; ++i) {
      const unsigned v = bytes_per == 2 ? (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1] : raw[i];
      if (v > static_cast<unsigned>(maxval)) throw ImageIoError("PGM: sample exceeds maxval");
      img.pixels[i] = maxval == 255 ? static_cast<double>(v) : v * scale;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      long v = -1;
      if (!(in >> v) || v < 0 || v > maxval) throw ImageIoError("PGM: bad ASCII sample");
      img.pixels[i] = maxval == 255 ? static_cast<double>(v) : v * scale;
    }
  }
  return img;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("cannot open " + path.string());
  return read_pgm(in);
}

void write_pgm(std::ostream& out, const GrayImage& img) {
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.pixels.size());
  std::transform(img.pixels.begin(), img.pixels.end(), raw.begin(), [](double p) {
    return static_cast<unsigned char>(std::clamp(std::round(p), 0.0, 255.0));
  });
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw ImageIoError("PGM: write failed");
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageIoError("cannot create " + path.string());
  write_pgm(out, img);
}

GrayImage quantize_8bit(const GrayImage& img) {
  GrayImage out = img;
  for (double& p : out.pixels) p = std::clamp(std::round(p), 0.0, 255.0);
  return out;
}

GrayImage clamp_range(const GrayImage& img, double lo, double hi) {
  GrayImage out = img;
  for (double& p : out.pixels) p = std::clamp(p, lo, hi);
  return out;
}

}  // namespace l1ksvd
