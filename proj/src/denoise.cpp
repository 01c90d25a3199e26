#include "l1ksvd/denoise.hpp"

#include <algorithm>
#include <cmath>

namespace l1ksvd {
namespace {

std::vector<Index> axis_offsets(Index dim, Index patch, Index stride) {
  std::vector<Index> out;
  for (Index o = 0; o + patch <= dim; o += stride) out.push_back(o);
  if (out.back() != dim - patch) out.push_back(dim - patch);
  return out;
}

void check_geometry(const PatchGeometry& g) {
  if (g.patch < 1 || g.stride < 1 || g.stride > g.patch) {
    throw InvalidArgument("patch geometry: need 1 <= stride <= patch");
  }
  if (g.width < g.patch || g.height < g.patch) {
    throw InvalidArgument("patch geometry: image is smaller than one patch");
  }
}

}  // namespace

std::vector<Index> PatchGeometry::x_offsets() const { return axis_offsets(width, patch, stride); }
std::vector<Index> PatchGeometry::y_offsets() const { return axis_offsets(height, patch, stride); }
Index PatchGeometry::count() const {
  return static_cast<Index>(x_offsets().size() * y_offsets().size());
}

PatchGeometry make_geometry(const GrayImage& img, Index patch, Index stride) {
  PatchGeometry g{img.width, img.height, patch, stride};
  check_geometry(g);
  return g;
}

TrainingSet extract_patches(const GrayImage& img, const PatchGeometry& geom) {
  check_geometry(geom);
  if (img.width != geom.width || img.height != geom.height) {
    throw InvalidArgument("extract_patches: geometry does not match image");
  }
  const auto xs = geom.x_offsets();
  const auto ys = geom.y_offsets();
  const Index p = geom.patch;
  TrainingSet out(p * p, geom.count());
  Index col = 0;
  for (Index ox : xs)
    for (Index oy : ys) {
      for (Index c = 0; c < p; ++c)
        for (Index r = 0; r < p; ++r) out(r + c * p, col) = img.at(ox + c, oy + r);
      ++col;
    }
  return out;
}

TrainingSet extract_patches(const GrayImage& img, Index patch, Index stride) {
  return extract_patches(img, make_geometry(img, patch, stride));
}

GrayImage reconstruct_from_patches(const TrainingSet& patches, const PatchGeometry& geom, bool clamp) {
  check_geometry(geom);
  const Index p = geom.patch;
  if (patches.rows() != p * p || patches.cols() != geom.count()) {
    throw InvalidArgument("reconstruct_from_patches: patch matrix does not match geometry");
  }
  const auto xs = geom.x_offsets();
  const auto ys = geom.y_offsets();
  const auto n_pix = static_cast<std::size_t>(geom.width * geom.height);
  std::vector<double> sum(n_pix, 0.0);
  std::vector<double> comp(n_pix, 0.0);
  std::vector<int> hits(n_pix, 0);
  Index col = 0;
  for (Index ox : xs)
    for (Index oy : ys) {
      for (Index c = 0; c < p; ++c)
        for (Index r = 0; r < p; ++r) {
          const auto idx = static_cast<std::size_t>((oy + r) * geom.width + ox + c);
          // Neumaier summation.
          const double v = patches(r + c * p, col);
          const double t = sum[idx] + v;
          comp[idx] += std::abs(sum[idx]) >= std::abs(v) ? (sum[idx] - t) + v : (v - t) + sum[idx];
          sum[idx] = t;
          ++hits[idx];
        }
      ++col;
    }
  GrayImage out(geom.width, geom.height);
  for (std::size_t i = 0; i < n_pix; ++i) {
    const double v = (sum[i] + comp[i]) / hits[i];
    out.pixels[i] = clamp ? std::clamp(v, 0.0, 255.0) : v;
  }
  return out;
}

const char* to_string(Backend b) { return b == Backend::KSVD ? "ksvd" : "l1ksvd"; }

Backend parse_backend(const std::string& s) {
  if (s == "ksvd") return Backend::KSVD;
  if (s == "l1ksvd") return Backend::L1KSVD;
  throw InvalidArgument("unknown backend '" + s + "' (expected ksvd or l1ksvd)");
}

const std::vector<DenoisePreset>& denoise_presets() {
  static const std::vector<DenoisePreset> presets = {
      {NoiseKind::Laplacian, 15, 1.0, 0.18}, {NoiseKind::Laplacian, 25, 1.0, 0.08},
      {NoiseKind::Laplacian, 35, 8.0, 0.05}, {NoiseKind::Gaussian, 15, 1.0, 0.15},
      {NoiseKind::Gaussian, 25, 1.0, 0.05},  {NoiseKind::Gaussian, 35, 8.0, 0.04},
  };
  return presets;
}

std::optional<DenoisePreset> find_preset(NoiseKind noise, double sigma) {
  for (const auto& p : denoise_presets())
    if (p.noise == noise && std::abs(p.sigma - sigma) < 1e-9) return p;
  return std::nullopt;
}

void validate(const DenoiseParams& p) {
  if (p.patch < 1 || p.stride < 1 || p.stride > p.patch) throw InvalidArgument("denoise: need 1 <= stride <= patch");
  if (p.dict_atoms < 1) throw InvalidArgument("denoise: dict_atoms must be positive");
  if (p.iters < 1) throw InvalidArgument("denoise: iters must be positive");
  if (!(p.sigma >= 0.0) || !std::isfinite(p.sigma)) throw InvalidArgument("denoise: sigma must be >= 0");
  if (p.backend == Backend::L1KSVD) {
    if (!(p.lambda > 0.0)) throw InvalidArgument("denoise: lambda must be positive");
    if (!(p.keep_fraction > 0.0 && p.keep_fraction <= 1.0)) {
      throw InvalidArgument("denoise: keep fraction must lie in (0, 1]");
    }
  }
}

double omp_residual_target(const DenoiseParams& p) {
  return p.omp_gain * p.sigma * static_cast<double>(p.patch);
}

DenoiseResult denoise_image(const GrayImage& noisy, const DenoiseParams& params) {
  validate(params);
  const PatchGeometry geom = make_geometry(noisy, params.patch, params.stride);
  TrainingSet patches = extract_patches(noisy, geom);

  Eigen::RowVectorXd means = Eigen::RowVectorXd::Zero(patches.cols());
  if (params.subtract_mean) {
    means = patches.colwise().mean();
    patches.rowwise() -= means;
  }

  LearnConfig cfg;
  cfg.n_atoms = params.dict_atoms;
  cfg.outer_iters = params.iters;
  cfg.irls = params.irls;
  cfg.rank1 = params.rank1;
  cfg.seed = params.seed;
  Algorithm algorithm = Algorithm::KSVD;
  if (params.backend == Backend::KSVD) {
    cfg.coder = OmpResidual{omp_residual_target(params)};
  } else {
    algorithm = Algorithm::L1KSVD;
    cfg.coder = IrlsPenalized{{params.lambda}};
    cfg.prune_rule = KeepFraction{params.keep_fraction};
  }

  LearnResult learned = learn(patches, cfg, algorithm);

  CoefficientMatrix codes = sparse_code_all(patches, learned.dict, cfg.coder, cfg.irls);
  if (cfg.prune_rule) codes = prune(codes, *cfg.prune_rule);
  TrainingSet estimate = learned.dict.atoms() * codes;
  if (params.subtract_mean) estimate.rowwise() += means;

  return DenoiseResult{reconstruct_from_patches(estimate, geom, true), std::move(learned.dict),
                       std::move(learned.trace)};
}

GrayImage add_noise(const GrayImage& img, double sigma, NoiseKind kind, RngSeed seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("add_noise: sigma must be >= 0");
  if (sigma == 0.0) return img;
  Rng rng(seed);
  const Matrix noise = sample_noise(static_cast<Index>(img.pixels.size()), 1, sigma, kind, rng);
  GrayImage out = img;
  for (std::size_t i = 0; i < out.pixels.size(); ++i) out.pixels[i] += noise(static_cast<Index>(i), 0);
  return out;
}

GrayImage dictionary_mosaic(const Dictionary& dict, Index patch) {
  if (dict.signal_dim() != patch * patch) throw InvalidArgument("dictionary_mosaic: atoms are not patch-sized");
  const Index k = dict.atom_count();
  const auto per_row = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(k))));
  const Index rows = (k + per_row - 1) / per_row;
  const Index cell = patch + 1;
  GrayImage out(per_row * cell + 1, rows * cell + 1, 255.0);
  for (Index j = 0; j < k; ++j) {
    const auto atom = dict.atom(j);
    const double lo = atom.minCoeff();
    const double span = atom.maxCoeff() - lo;
    const Index ox = (j % per_row) * cell + 1;
    const Index oy = (j / per_row) * cell + 1;
    for (Index c = 0; c < patch; ++c)
      for (Index r = 0; r < patch; ++r) {
        const double v = span > 0.0 ? (atom(r + c * patch) - lo) / span : 0.5;
        out.at(ox + c, oy + r) = 255.0 * v;
      }
  }
  return out;
}

}  // namespace l1ksvd
