#pragma once

#include "l1ksvd/image.hpp"
#include "l1ksvd/types.hpp"

#include <vector>

namespace l1ksvd {

struct MatchedPair {
  Index true_index;
  Index estimated_index;
  double abs_inner;
};

struct RecoveryReport {
  double adr = 0.0;
  double kappa = 0.0;
  /// Best estimated atom for every recovered true atom.
  std::vector<MatchedPair> matched_pairs;
};

inline constexpr double kDetectionThreshold = 0.99;

/// Fraction of true atoms d_i with max_j |d_i' dhat_j| > 0.99 (strict).
/// One estimated atom may certify several true atoms.
double atom_detection_rate(const Dictionary& truth, const Dictionary& estimate);

/// (1/K) sum_i min_j (1 - |d_i' dhat_j|).
double dictionary_distance(const Dictionary& truth, const Dictionary& estimate);

RecoveryReport recovery_report(const Dictionary& truth, const Dictionary& estimate);

/// 10 log10(peak^2 / MSE); +infinity for identical images.
double psnr(const GrayImage& reference, const GrayImage& test, double peak = 255.0);

inline constexpr Index kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

/// Mean SSIM over all fully contained 11x11 windows (Gaussian weights,
/// sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 255).
double ssim(const GrayImage& reference, const GrayImage& test);

/// Normalized 1-D Gaussian taps for the SSIM window.
std::vector<double> ssim_kernel();

}  // namespace l1ksvd
