#pragma once

#include "l1ksvd/types.hpp"

#include <optional>
#include <variant>

namespace l1ksvd {

/// Settings for the reweighted least-squares l1 solvers.
///
/// With `relative_epsilon` set, the floor actually used is
/// `max(epsilon * median|data|, 1e-10)`, so the weights 1/(|t| + eps) stay on
/// the same scale whatever the signal amplitude.
struct IrlsParams {
  double epsilon = 1e-6;
  bool relative_epsilon = true;
  int max_inner_iters = 50;
  double rel_tol = 1e-6;
};

void validate(const IrlsParams& params);

/// The stability floor for `data` under `params`.
double effective_epsilon(const IrlsParams& params, const Eigen::Ref<const Matrix>& data);

/// |t| - eps * log(1 + |t| / eps): the convex function that the reweighting
/// scheme with weights 1/(|t| + eps) minimizes monotonically.
double smoothed_abs(double t, double eps);

struct IrlsResult {
  Vector x;
  int iterations = 0;
  bool converged = false;
  double epsilon = 0.0;
  /// Smoothed objective after each inner iteration.
  std::vector<double> objective_trace;
};

/// Approximately minimizes ||y - D x||_1 + lambda ||x||_1.
///
/// Each inner step solves the weighted normal equations
///   (D' W1 D + lambda W2) x = D' W1 y
/// with W1 = diag(1 / (|y - D x| + eps)) and W2 = diag(1 / (|x| + eps)),
/// both starting at the identity. The K x K system is solved through the
/// equivalent m x m form x = W2^-1 D' (D W2^-1 D' + lambda W1^-1)^-1 y, whose
/// matrix stays bounded as weights blow up at sparse iterates.
/// `x0` is the reference iterate for the first convergence test.
IrlsResult irls_sparse_code_detailed(const Vector& y, const Dictionary& dict, double lambda,
                                     const IrlsParams& params, const Vector& x0);

Vector irls_sparse_code(const Vector& y, const Dictionary& dict, double lambda,
                        const IrlsParams& params, const Vector& x0);
Vector irls_sparse_code(const Vector& y, const Dictionary& dict, double lambda,
                        const IrlsParams& params = {});

struct ConstrainedResult {
  Vector x;
  /// Penalty weight that produced `x` (0 when `x` is the zero fallback).
  double lambda = 0.0;
  /// False when the search ran out of steps before landing in
  /// [0.95 tau, tau]; `x` is then the best feasible iterate seen.
  bool bracketed = true;
  int solves = 0;
};

inline constexpr double kLambdaMin = 1e-8;
inline constexpr double kLambdaMax = 1e4;
inline constexpr int kMaxBisections = 60;
/// The search stops once ||x||_1 lands in [window_lower * tau, tau].
inline constexpr double kDefaultWindowLower = 0.95;

/// min ||y - D x||_1 s.t. ||x||_1 <= tau, by log-space bisection on the
/// penalty weight of irls_sparse_code. `lambda_hint` (e.g. the value found
/// for the same example on a previous pass) seeds the bracket.
ConstrainedResult irls_sparse_code_constrained(const Vector& y, const Dictionary& dict, double tau,
                                               const IrlsParams& params = {},
                                               std::optional<double> lambda_hint = std::nullopt,
                                               double window_lower = kDefaultWindowLower);

struct Sparsity {
  Index s;
};
struct ResidualNorm {
  double r;
};
using OmpStop = std::variant<Sparsity, ResidualNorm>;

/// Orthogonal matching pursuit. Least squares on the active set uses the
/// normal equations; exact correlation ties go to the lowest atom index.
Vector omp(const Vector& y, const Dictionary& dict, const OmpStop& stop);

/// Same as `omp` with a precomputed Gram matrix D'D.
Vector omp(const Vector& y, const Dictionary& dict, const Matrix& gram, const OmpStop& stop);

/// Codes every column of `y`.
CoefficientMatrix omp_batch(const TrainingSet& y, const Dictionary& dict, const OmpStop& stop);

struct AbsoluteThreshold {
  double t0;
};
struct KeepFraction {
  double fraction;
};
using PruneRule = std::variant<AbsoluteThreshold, KeepFraction>;

void validate(const PruneRule& rule);

/// Number of entries kept per column by KeepFraction: ceil(fraction * K).
Index kept_per_column(double fraction, Index atom_count);

/// AbsoluteThreshold zeroes |X_ij| < t0. KeepFraction keeps the
/// ceil(fraction * K) largest magnitudes in each column; on equal magnitude
/// the lower row index is kept.
CoefficientMatrix prune(const CoefficientMatrix& x, const PruneRule& rule);

}  // namespace l1ksvd
