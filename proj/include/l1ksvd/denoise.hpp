#pragma once

#include "l1ksvd/image.hpp"
#include "l1ksvd/learner.hpp"
#include "l1ksvd/synth.hpp"

#include <optional>
#include <vector>

namespace l1ksvd {

/// Placement of square patches over an image. Offsets run 0, stride,
/// 2 stride, ... and end with dim - patch even when the grid does not land
/// there exactly, so every pixel is covered.
struct PatchGeometry {
  Index width = 0;
  Index height = 0;
  Index patch = 8;
  Index stride = 4;

  std::vector<Index> x_offsets() const;
  std::vector<Index> y_offsets() const;
  Index count() const;
};

PatchGeometry make_geometry(const GrayImage& img, Index patch, Index stride);

/// One column per patch (x offsets outer, y offsets inner). Inside a
/// patch, pixel (row r, column c) goes to entry r + c * patch.
TrainingSet extract_patches(const GrayImage& img, const PatchGeometry& geom);
TrainingSet extract_patches(const GrayImage& img, Index patch, Index stride);

/// Averages overlapping patches back into an image (compensated sums);
/// optionally clamps to [0, 255].
GrayImage reconstruct_from_patches(const TrainingSet& patches, const PatchGeometry& geom,
                                   bool clamp = true);

enum class Backend { KSVD, L1KSVD };
const char* to_string(Backend b);
Backend parse_backend(const std::string& s);

/// Penalty and keep fraction for the l1 backend, tuned per noise type and level.
struct DenoisePreset {
  NoiseKind noise;
  int sigma;
  double lambda;
  double keep_fraction;
};
const std::vector<DenoisePreset>& denoise_presets();
std::optional<DenoisePreset> find_preset(NoiseKind noise, double sigma);

struct DenoiseParams {
  Index patch = 8;
  Index stride = 4;
  Index dict_atoms = 128;
  int iters = 10;
  /// Known noise standard deviation.
  double sigma = 0.0;
  Backend backend = Backend::L1KSVD;
  double lambda = 1.0;
  double keep_fraction = 0.08;
  RngSeed seed;
  bool subtract_mean = true;
  /// OMP stops once ||y - D x||_2 <= omp_gain * sigma * sqrt(patch^2).
  double omp_gain = 1.15;
  IrlsParams irls;
  L1RankOneParams rank1;
};

void validate(const DenoiseParams& p);

/// Residual bound used by the K-SVD backend.
double omp_residual_target(const DenoiseParams& p);

struct DenoiseResult {
  GrayImage image;
  Dictionary dict;
  LearnTrace trace;
};

/// Trains a dictionary on the (mean-removed) patches of `noisy`, codes every
/// patch once more with the final dictionary, and averages the
/// reconstructed patches. Output is clamped to [0, 255].
DenoiseResult denoise_image(const GrayImage& noisy, const DenoiseParams& params);

/// Adds zero-mean noise of standard deviation sigma (Laplacian scale
/// sigma / sqrt 2). No clamping.
GrayImage add_noise(const GrayImage& img, double sigma, NoiseKind kind, RngSeed seed);

/// Atoms tiled as patch x patch blocks separated by a 1-pixel border, each
/// stretched to the full gray range.
GrayImage dictionary_mosaic(const Dictionary& dict, Index patch);

}  // namespace l1ksvd
