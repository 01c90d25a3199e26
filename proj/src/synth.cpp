#include "l1ksvd/synth.hpp"

#include <cmath>

namespace l1ksvd {

const char* to_string(NoiseKind k) { return k == NoiseKind::Gaussian ? "gaussian" : "laplacian"; }

NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "gaussian") return NoiseKind::Gaussian;
  if (s == "laplacian") return NoiseKind::Laplacian;
  throw InvalidArgument("unknown noise kind '" + s + "' (expected gaussian or laplacian)");
}

void validate(const SynthSpec& spec) {
  if (spec.m < 1 || spec.k < 1 || spec.n < 1) throw InvalidArgument("SynthSpec: m, K, N must be positive");
  if (spec.s < 1 || spec.s > spec.m || spec.s > spec.k) throw InvalidArgument("SynthSpec: need 1 <= s <= min(m, K)");
  if (spec.n < spec.k) throw InvalidArgument("SynthSpec: N must be at least K");
  if (!std::isfinite(spec.snr_db)) throw InvalidArgument("SynthSpec: snr_db must be finite");
}

double laplace_inverse_cdf(double p, double b) {
  const double c = p - 0.5;
  const double sign = (c > 0.0) - (c < 0.0);
  return -b * sign * std::log(1.0 - 2.0 * std::abs(c));
}

Matrix sample_laplacian(Index rows, Index cols, double b, Rng& rng) {
  if (!(b > 0.0)) throw InvalidArgument("sample_laplacian: scale must be positive");
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = laplace_inverse_cdf(rng.uniform(), b);
  return out;
}

Matrix sample_laplacian(Index rows, Index cols, double b, RngSeed seed) {
  Rng rng(seed);
  return sample_laplacian(rows, cols, b, rng);
}

Matrix sample_noise(Index rows, Index cols, double sigma, NoiseKind kind, Rng& rng) {
  if (kind == NoiseKind::Gaussian) return sigma * gaussian_matrix(rng, rows, cols);
  return sample_laplacian(rows, cols, sigma / std::sqrt(2.0), rng);
}

double realized_snr_db(const Matrix& clean, const Matrix& noisy) {
  return 10.0 * std::log10(clean.squaredNorm() / (noisy - clean).squaredNorm());
}

SynthInstance generate_instance(const SynthSpec& spec) {
  validate(spec);
  const Rng root(spec.seed);
  Rng dict_rng = root.split(1);
  Rng code_rng = root.split(2);
  Rng noise_rng = root.split(3);

  SynthInstance inst;
  inst.d_true = Dictionary(gaussian_matrix(dict_rng, spec.m, spec.k));

  inst.x_true = CoefficientMatrix::Zero(spec.k, spec.n);
  std::vector<Index> slots(static_cast<std::size_t>(spec.k));
  for (Index n = 0; n < spec.n; ++n) {
    for (Index j = 0; j < spec.k; ++j) slots[static_cast<std::size_t>(j)] = j;
    // Partial Fisher-Yates: the first s slots are a uniform s-subset.
    for (Index i = 0; i < spec.s; ++i) {
      const Index pick = i + code_rng.uniform_index(spec.k - i);
      std::swap(slots[static_cast<std::size_t>(i)], slots[static_cast<std::size_t>(pick)]);
      double amp = 0.0;
      while (amp == 0.0) amp = code_rng.normal();
      inst.x_true(slots[static_cast<std::size_t>(i)], n) = amp;
    }
  }
  inst.y_clean = inst.d_true.atoms() * inst.x_true;

  Matrix noise = sample_noise(spec.m, spec.n, 1.0, spec.noise, noise_rng);
  const double target_ratio = std::pow(10.0, spec.snr_db / 10.0);
  noise *= std::sqrt(inst.y_clean.squaredNorm() / (noise.squaredNorm() * target_ratio));
  inst.y_noisy = inst.y_clean + noise;
  return inst;
}

}  // namespace l1ksvd
