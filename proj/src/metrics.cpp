#include "l1ksvd/metrics.hpp"

#include <cmath>
#include <limits>

namespace l1ksvd {
namespace {

Matrix abs_gram(const Dictionary& truth, const Dictionary& estimate) {
  if (truth.signal_dim() != estimate.signal_dim() || truth.atom_count() != estimate.atom_count()) {
    throw InvalidArgument("dictionary metrics: dictionaries must have equal shape");
  }
  return (truth.atoms().transpose() * estimate.atoms()).cwiseAbs();
}

void check_same_shape(const GrayImage& a, const GrayImage& b, const char* who) {
  if (!a.same_shape(b)) throw InvalidArgument(std::string(who) + ": image dimensions differ");
}

}  // namespace

double atom_detection_rate(const Dictionary& truth, const Dictionary& estimate) {
  return recovery_report(truth, estimate).adr;
}

double dictionary_distance(const Dictionary& truth, const Dictionary& estimate) {
  return recovery_report(truth, estimate).kappa;
}

RecoveryReport recovery_report(const Dictionary& truth, const Dictionary& estimate) {
  const Matrix g = abs_gram(truth, estimate);
  RecoveryReport report;
  double distance = 0.0;
  for (Index i = 0; i < g.rows(); ++i) {
    Index best = 0;
    double top = g.row(i).maxCoeff(&best);
    // Inner products of unit atoms are only accurate to rounding.
    if (top > 1.0 - 1e-12) top = 1.0;
    distance += 1.0 - top;
    if (top > kDetectionThreshold) report.matched_pairs.push_back({i, best, top});
  }
  const auto k = static_cast<double>(g.rows());
  report.adr = static_cast<double>(report.matched_pairs.size()) / k;
  report.kappa = distance / k;
  return report;
}

double psnr(const GrayImage& reference, const GrayImage& test, double peak) {
  check_same_shape(reference, test, "psnr");
  double sum = 0.0;
  for (std::size_t i = 0; i < reference.pixels.size(); ++i) {
    const double d = reference.pixels[i] - test.pixels[i];
    sum += d * d;
  }
  if (sum == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sum / static_cast<double>(reference.pixels.size());
  return 10.0 * std::log10(peak * peak / mse);
}

std::vector<double> ssim_kernel() {
  std::vector<double> taps(static_cast<std::size_t>(kSsimWindow));
  const double centre = static_cast<double>(kSsimWindow - 1) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const double t = static_cast<double>(i) - centre;
    taps[i] = std::exp(-t * t / (2.0 * kSsimSigma * kSsimSigma));
    total += taps[i];
  }
  for (double& t : taps) t /= total;
  return taps;
}

double ssim(const GrayImage& reference, const GrayImage& test) {
  check_same_shape(reference, test, "ssim");
  if (reference.width < kSsimWindow || reference.height < kSsimWindow) {
    throw InvalidArgument("ssim: image is smaller than the 11x11 window");
  }
  const std::vector<double> taps = ssim_kernel();
  const Index w = reference.width;
  const Index h = reference.height;
  const Index out_w = w - kSsimWindow + 1;
  const Index out_h = h - kSsimWindow + 1;

  // Five moment images, filtered horizontally then vertically ("valid").
  auto filter = [&](auto&& value) {
    Matrix horiz(h, out_w);
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < out_w; ++x) {
        double s = 0.0;
        for (Index t = 0; t < kSsimWindow; ++t) s += taps[static_cast<std::size_t>(t)] * value(x + t, y);
        horiz(y, x) = s;
      }
    Matrix out(out_h, out_w);
    for (Index y = 0; y < out_h; ++y)
      for (Index x = 0; x < out_w; ++x) {
        double s = 0.0;
        for (Index t = 0; t < kSsimWindow; ++t) s += taps[static_cast<std::size_t>(t)] * horiz(y + t, x);
        out(y, x) = s;
      }
    return out;
  };
  const auto& a = reference;
  const auto& b = test;
  const Matrix mu_a = filter([&](Index x, Index y) { return a.at(x, y); });
  const Matrix mu_b = filter([&](Index x, Index y) { return b.at(x, y); });
  const Matrix aa = filter([&](Index x, Index y) { return a.at(x, y) * a.at(x, y); });
  const Matrix bb = filter([&](Index x, Index y) { return b.at(x, y) * b.at(x, y); });
  const Matrix ab = filter([&](Index x, Index y) { return a.at(x, y) * b.at(x, y); });

  const double c1 = (kSsimK1 * 255.0) * (kSsimK1 * 255.0);
  const double c2 = (kSsimK2 * 255.0) * (kSsimK2 * 255.0);
  double total = 0.0;
  for (Index y = 0; y < out_h; ++y)
    for (Index x = 0; x < out_w; ++x) {
      const double ma = mu_a(y, x);
      const double mb = mu_b(y, x);
      const double va = aa(y, x) - ma * ma;
      const double vb = bb(y, x) - mb * mb;
      const double cov = ab(y, x) - ma * mb;
      total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
  return total / static_cast<double>(out_w * out_h);
}

}  // namespace l1ksvd
