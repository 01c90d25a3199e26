#pragma once

#include "l1ksvd/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace l1ksvd {

/// Grayscale image with real-valued pixels, row-major, nominal range [0, 255].
struct GrayImage {
  Index width = 0;
  Index height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(Index w, Index h, double fill = 0.0);

  double& at(Index x, Index y) { return pixels[static_cast<std::size_t>(y * width + x)]; }
  double at(Index x, Index y) const { return pixels[static_cast<std::size_t>(y * width + x)]; }

  bool same_shape(const GrayImage& other) const {
    return width == other.width && height == other.height;
  }
};

class ImageIoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Reads binary (P5) or ASCII (P2) PGM. Samples are rescaled to [0, 255]
/// when maxval differs from 255; 16-bit P5 samples are big-endian.
GrayImage read_pgm(std::istream& in);
GrayImage read_pgm(const std::filesystem::path& path);

/// Writes 8-bit binary PGM; pixels are rounded and clamped to [0, 255].
void write_pgm(std::ostream& out, const GrayImage& img);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

/// Rounds and clamps every pixel to an integer in [0, 255].
GrayImage quantize_8bit(const GrayImage& img);

GrayImage clamp_range(const GrayImage& img, double lo = 0.0, double hi = 255.0);

}  // namespace l1ksvd
