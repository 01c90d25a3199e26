#pragma once

#include "l1ksvd/rng.hpp"
#include "l1ksvd/types.hpp"

#include <string>

namespace l1ksvd {

enum class NoiseKind { Gaussian, Laplacian };

const char* to_string(NoiseKind k);
NoiseKind parse_noise_kind(const std::string& s);

/// Ground-truth recovery experiment: random unit-norm dictionary, s-sparse
/// codes with standard-normal amplitudes, additive noise at a fixed SNR.
struct SynthSpec {
  Index m = 20;
  Index k = 50;
  Index s = 3;
  Index n = 1500;
  double snr_db = 20.0;
  NoiseKind noise = NoiseKind::Laplacian;
  RngSeed seed;
};

void validate(const SynthSpec& spec);

struct SynthInstance {
  Dictionary d_true;
  CoefficientMatrix x_true;
  TrainingSet y_clean;
  TrainingSet y_noisy;
};

/// The noise is rescaled after sampling so that
/// 10 log10(||Y_clean||_F^2 / ||noise||_F^2) equals snr_db exactly.
SynthInstance generate_instance(const SynthSpec& spec);

/// Inverse CDF of Laplace(0, b) at p in (0, 1).
double laplace_inverse_cdf(double p, double b);

/// i.i.d. Laplace(0, b) samples (variance 2 b^2).
Matrix sample_laplacian(Index rows, Index cols, double b, Rng& rng);
Matrix sample_laplacian(Index rows, Index cols, double b, RngSeed seed);

/// Zero-mean noise with standard deviation sigma.
Matrix sample_noise(Index rows, Index cols, double sigma, NoiseKind kind, Rng& rng);

double realized_snr_db(const Matrix& clean, const Matrix& noisy);

}  // namespace l1ksvd
