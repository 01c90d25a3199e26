#pragma once

#include "l1ksvd/dict_update.hpp"
#include "l1ksvd/sparse_coding.hpp"
#include "l1ksvd/types.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace l1ksvd {

/// Penalized l1 coding. One entry means a shared lambda; otherwise one per example.
struct IrlsPenalized {
  std::vector<double> lambdas;
};
/// l1-ball constrained coding with one radius per example (or one shared).
struct IrlsConstrained {
  std::vector<double> taus;
};
struct OmpSparsity {
  Index s;
};
struct OmpResidual {
  double r;
};
using Coder = std::variant<IrlsPenalized, IrlsConstrained, OmpSparsity, OmpResidual>;

enum class Algorithm { L1KSVD, KSVD };
enum class UpdateMode { L1, L2 };

const char* to_string(Algorithm a);

struct LearnConfig {
  Index n_atoms = 0;
  int outer_iters = 1;
  Coder coder = OmpSparsity{1};
  /// Applied after every coding step (l1-K-SVD only).
  std::optional<PruneRule> prune_rule;
  IrlsParams irls;
  L1RankOneParams rank1;
  RngSeed seed;
  /// Starting dictionary; drawn from the data when empty.
  std::optional<Dictionary> initial;
};

struct TraceRecord {
  int iteration = 0;
  /// Mean over examples of ||y_n - D x_n||_1 and ||y_n - D x_n||_2 at the end of the iteration.
  double l1_err = 0.0;
  double l2_err = 0.0;
  std::optional<double> adr;
  std::optional<double> kappa;
  /// ||Y - D X||_F after coding (and pruning), then after the atom sweep.
  double fro_after_coding = 0.0;
  double fro_after_update = 0.0;
  Index replaced_atoms = 0;
};

struct LearnTrace {
  std::vector<TraceRecord> records;
};

struct LearnResult {
  Dictionary dict;
  CoefficientMatrix coeffs;
  LearnTrace trace;
};

/// K distinct nonzero columns of `y`, picked uniformly without replacement
/// and normalized.
Dictionary init_from_data(const TrainingSet& y, Index n_atoms, RngSeed seed);

struct SweepResult {
  Dictionary dict;
  CoefficientMatrix coeffs;
  /// Atoms with empty support that were re-seeded from the data.
  Index replaced = 0;
};

/// One sequential pass over the atoms. For each j, the residual without
/// atom j restricted to the examples that use it is fitted by a rank-1
/// factor (l1 or SVD), which replaces d_j and the nonzeros of row j. An atom
/// nobody uses is replaced by the worst-represented training example.
SweepResult atom_sweep(Dictionary dict, CoefficientMatrix coeffs, const TrainingSet& y,
                       UpdateMode mode, const L1RankOneParams& rank1 = {});

/// Codes every column of `y`. `lambda_hints` (may be null) carries the
/// per-example penalty found by the constrained coder between calls.
CoefficientMatrix sparse_code_all(const TrainingSet& y, const Dictionary& dict, const Coder& coder,
                                  const IrlsParams& irls, std::vector<double>* lambda_hints = nullptr);

struct DataError {
  double mean_l1 = 0.0;
  double mean_l2 = 0.0;
  double frobenius = 0.0;
};
DataError data_error(const TrainingSet& y, const Dictionary& dict, const CoefficientMatrix& coeffs);

/// Alternating minimization: code, prune (l1-K-SVD), sweep atoms; repeated
/// `outer_iters` times. With a ground truth, every trace record carries ADR
/// and kappa.
LearnResult learn(const TrainingSet& y, const LearnConfig& cfg, Algorithm algorithm,
                  const std::optional<Dictionary>& ground_truth = std::nullopt);

}  // namespace l1ksvd
