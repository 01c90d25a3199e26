#include "l1ksvd/learner.hpp"

#include "l1ksvd/metrics.hpp"
#include "l1ksvd/rng.hpp"

#include <cmath>
#include <limits>

namespace l1ksvd {
namespace {

double per_example(const std::vector<double>& values, Index n, const char* what) {
  if (values.size() == 1) return values.front();
  if (static_cast<Index>(values.size()) <= n) {
    throw InvalidArgument(std::string("coder: ") + what + " list shorter than the training set");
  }
  return values[static_cast<std::size_t>(n)];
}

void check_coder(const Coder& coder, Index n_examples, Algorithm algorithm) {
  auto check_list = [&](const std::vector<double>& v, const char* what) {
    if (v.empty()) throw InvalidArgument(std::string("coder: empty ") + what + " list");
    if (v.size() != 1 && static_cast<Index>(v.size()) != n_examples) {
      throw InvalidArgument(std::string("coder: ") + what + " list must have 1 or N entries");
    }
    for (double x : v)
      if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument(std::string("coder: ") + what + " must be positive");
  };
  const bool irls = std::holds_alternative<IrlsPenalized>(coder) || std::holds_alternative<IrlsConstrained>(coder);
  if (algorithm == Algorithm::L1KSVD && !irls) throw InvalidArgument("learn: l1-K-SVD needs an IRLS coder");
  if (algorithm == Algorithm::KSVD && irls) throw InvalidArgument("learn: K-SVD needs an OMP coder");
  if (const auto* p = std::get_if<IrlsPenalized>(&coder)) check_list(p->lambdas, "lambda");
  if (const auto* c = std::get_if<IrlsConstrained>(&coder)) check_list(c->taus, "tau");
  if (const auto* s = std::get_if<OmpSparsity>(&coder); s && s->s < 1) {
    throw InvalidArgument("coder: sparsity must be >= 1");
  }
  if (const auto* r = std::get_if<OmpResidual>(&coder); r && !(r->r >= 0.0)) {
    throw InvalidArgument("coder: residual bound must be >= 0");
  }
}

}  // namespace

const char* to_string(Algorithm a) { return a == Algorithm::L1KSVD ? "l1ksvd" : "ksvd"; }

Dictionary init_from_data(const TrainingSet& y, Index n_atoms, RngSeed seed) {
  if (n_atoms < 1) throw InvalidArgument("init_from_data: need at least one atom");
  std::vector<Index> nonzero;
  for (Index n = 0; n < y.cols(); ++n)
    if (y.col(n).squaredNorm() > 0.0) nonzero.push_back(n);
  if (static_cast<Index>(nonzero.size()) < n_atoms) {
    throw InvalidArgument("init_from_data: " + std::to_string(nonzero.size()) +
                          " nonzero columns, need " + std::to_string(n_atoms));
  }
  Rng rng(seed);
  const std::vector<Index> order = random_permutation(rng, static_cast<Index>(nonzero.size()));
  Matrix atoms(y.rows(), n_atoms);
  for (Index j = 0; j < n_atoms; ++j) {
    atoms.col(j) = y.col(nonzero[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])]);
  }
  return Dictionary(atoms);
}

SweepResult atom_sweep(Dictionary dict, CoefficientMatrix coeffs, const TrainingSet& y,
                       UpdateMode mode, const L1RankOneParams& rank1) {
  const Index m = dict.signal_dim();
  const Index k = dict.atom_count();
  if (y.rows() != m || coeffs.rows() != k || coeffs.cols() != y.cols()) {
    throw InvalidArgument("atom_sweep: dimension mismatch");
  }
  Matrix residual = y - dict.atoms() * coeffs;
  std::vector<char> used_for_replacement(static_cast<std::size_t>(y.cols()), 0);
  Index replaced = 0;

  for (Index j = 0; j < k; ++j) {
    const Support support = support_of_row(coeffs, j);
    if (support.empty()) {
      // Re-seed from the worst-represented example not already used this sweep.
      Index worst = -1;
      double worst_norm = -1.0;
      for (Index n = 0; n < y.cols(); ++n) {
        if (used_for_replacement[static_cast<std::size_t>(n)]) continue;
        if (y.col(n).squaredNorm() == 0.0) continue;
        const double r = residual.col(n).squaredNorm();
        if (r > worst_norm) {
          worst_norm = r;
          worst = n;
        }
      }
      if (worst >= 0) {
        used_for_replacement[static_cast<std::size_t>(worst)] = 1;
        dict.set_atom(j, y.col(worst));
        ++replaced;
      }
      continue;
    }

    const auto cols = static_cast<Index>(support.size());
    Matrix block(m, cols);
    for (Index c = 0; c < cols; ++c) {
      const Index n = support[static_cast<std::size_t>(c)];
      block.col(c) = residual.col(n) + dict.atom(j) * coeffs(j, n);
    }
    const RankOneFactor f = mode == UpdateMode::L1 ? l1_rank_one(block, rank1) : svd_rank_one(block);
    if (f.degenerate) continue;

    dict.set_atom(j, f.u);
    for (Index c = 0; c < cols; ++c) {
      const Index n = support[static_cast<std::size_t>(c)];
      coeffs(j, n) = f.v(c);
      residual.col(n) = block.col(c) - dict.atom(j) * f.v(c);
    }
  }
  return SweepResult{std::move(dict), std::move(coeffs), replaced};
}

CoefficientMatrix sparse_code_all(const TrainingSet& y, const Dictionary& dict, const Coder& coder,
                                  const IrlsParams& irls, std::vector<double>* lambda_hints) {
  if (y.rows() != dict.signal_dim()) throw InvalidArgument("sparse_code_all: dimension mismatch");
  const Index n_examples = y.cols();
  const Index k = dict.atom_count();

  if (const auto* s = std::get_if<OmpSparsity>(&coder)) return omp_batch(y, dict, Sparsity{s->s});
  if (const auto* r = std::get_if<OmpResidual>(&coder)) return omp_batch(y, dict, ResidualNorm{r->r});

  CoefficientMatrix x(k, n_examples);
  if (const auto* p = std::get_if<IrlsPenalized>(&coder)) {
    for (double l : p->lambdas)
      if (!(l > 0.0)) throw InvalidArgument("sparse_code_all: lambda must be positive");
#pragma omp parallel for schedule(dynamic, 8)
    for (Index n = 0; n < n_examples; ++n) {
      x.col(n) = irls_sparse_code(y.col(n), dict, per_example(p->lambdas, n, "lambda"), irls);
    }
    return x;
  }

  const auto& c = std::get<IrlsConstrained>(coder);
  if (lambda_hints && static_cast<Index>(lambda_hints->size()) != n_examples) {
    lambda_hints->assign(static_cast<std::size_t>(n_examples), std::numeric_limits<double>::quiet_NaN());
  }
#pragma omp parallel for schedule(dynamic, 8)
  for (Index n = 0; n < n_examples; ++n) {
    std::optional<double> hint;
    if (lambda_hints) {
      const double h = (*lambda_hints)[static_cast<std::size_t>(n)];
      if (h > 0.0) hint = h;
    }
    ConstrainedResult res =
        irls_sparse_code_constrained(y.col(n), dict, per_example(c.taus, n, "tau"), irls, hint);
    if (lambda_hints && res.lambda > 0.0) (*lambda_hints)[static_cast<std::size_t>(n)] = res.lambda;
    x.col(n) = std::move(res.x);
  }
  return x;
}

DataError data_error(const TrainingSet& y, const Dictionary& dict, const CoefficientMatrix& coeffs) {
  const Matrix r = y - dict.atoms() * coeffs;
  DataError e;
  const auto n = static_cast<double>(y.cols());
  e.mean_l1 = r.cwiseAbs().colwise().sum().sum() / n;
  e.mean_l2 = r.colwise().norm().sum() / n;
  e.frobenius = r.norm();
  return e;
}

LearnResult learn(const TrainingSet& y, const LearnConfig& cfg, Algorithm algorithm,
                  const std::optional<Dictionary>& ground_truth) {
  if (cfg.outer_iters < 1) throw InvalidArgument("learn: outer_iters must be >= 1");
  if (!y.allFinite()) throw InvalidArgument("learn: training set contains NaN or Inf");
  check_coder(cfg.coder, y.cols(), algorithm);
  validate(cfg.irls);
  validate(cfg.rank1);
  if (cfg.prune_rule) validate(*cfg.prune_rule);

  Dictionary dict;
  if (cfg.initial) {
    dict = *cfg.initial;
    if (dict.signal_dim() != y.rows()) throw InvalidArgument("learn: initial dictionary has wrong signal size");
  } else {
    dict = init_from_data(y, cfg.n_atoms, cfg.seed);
  }
  if (ground_truth && (ground_truth->signal_dim() != dict.signal_dim() ||
                       ground_truth->atom_count() != dict.atom_count())) {
    throw InvalidArgument("learn: ground truth shape differs from the learned dictionary");
  }

  const UpdateMode mode = algorithm == Algorithm::L1KSVD ? UpdateMode::L1 : UpdateMode::L2;
  CoefficientMatrix coeffs;
  std::vector<double> lambda_hints;
  LearnTrace trace;

  for (int it = 0; it < cfg.outer_iters; ++it) {
    coeffs = sparse_code_all(y, dict, cfg.coder, cfg.irls, &lambda_hints);
    if (algorithm == Algorithm::L1KSVD && cfg.prune_rule) coeffs = prune(coeffs, *cfg.prune_rule);
    if (coeffs.isZero(0.0)) {
      throw NumericalError("learn: iteration " + std::to_string(it + 1) + " produced an all-zero code");
    }

    TraceRecord rec;
    rec.iteration = it + 1;
    rec.fro_after_coding = data_error(y, dict, coeffs).frobenius;

    SweepResult sweep = atom_sweep(std::move(dict), std::move(coeffs), y, mode, cfg.rank1);
    dict = std::move(sweep.dict);
    coeffs = std::move(sweep.coeffs);
    rec.replaced_atoms = sweep.replaced;

    const DataError err = data_error(y, dict, coeffs);
    rec.l1_err = err.mean_l1;
    rec.l2_err = err.mean_l2;
    rec.fro_after_update = err.frobenius;
    if (ground_truth) {
      const RecoveryReport r = recovery_report(*ground_truth, dict);
      rec.adr = r.adr;
      rec.kappa = r.kappa;
    }
    trace.records.push_back(rec);
  }
  return LearnResult{std::move(dict), std::move(coeffs), std::move(trace)};
}

}  // namespace l1ksvd
