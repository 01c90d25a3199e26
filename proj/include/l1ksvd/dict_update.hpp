#pragma once

#include "l1ksvd/types.hpp"

namespace l1ksvd {

/// u (unit l2 norm) and v such that u v' approximates a residual block.
struct RankOneFactor {
  Vector u;
  Vector v;
  /// Set when the input carried no usable signal (all-zero block).
  bool degenerate = false;
};

struct L1RankOneParams {
  /// Reweighting passes J.
  int passes = 10;
  /// Stability floor; relative to median|E| when `relative_epsilon` is set.
  double epsilon = 1e-6;
  bool relative_epsilon = true;
};

void validate(const L1RankOneParams& params);

struct SingularTriple {
  Vector left;
  double sigma = 0.0;
  Vector right;
  bool degenerate = false;
};

inline constexpr int kPowerIterations = 200;
inline constexpr double kPowerTolerance = 1e-12;

/// Leading singular triple by alternating power iteration, started from the
/// column of `e` with the largest norm. A zero matrix yields sigma = 0,
/// left = e_1, right = e_1 and `degenerate`.
SingularTriple top_singular_pair(const Matrix& e);

/// Sum of |E - u v'| over all entries.
double l1_fit_error(const Matrix& e, const Vector& u, const Vector& v);

/// Flips (u, v) so that the first nonzero entry of u is positive.
void canonicalize_sign(RankOneFactor& f);

/// Rank-1 least-absolute-deviation fit min ||E - u v'||_1, ||u||_2 = 1.
///
/// Starts from the truncated SVD, then runs `passes` rounds of
///   w_n(j) <- 1 / (|(e_n - v_n u)_j| + eps)
///   u      <- [sum_n v_n^2 W_n]^-1 [sum_n v_n W_n e_n]
///   v_n    <- (u' W_n e_n) / (u' W_n u)
/// using the freshly updated weights for both factor updates. The sum
/// sum_n v_n^2 W_n is diagonal, so the u-update is entrywise. The iterate
/// with the lowest l1 error (the SVD start included) is returned, rescaled
/// so that ||u||_2 = 1.
RankOneFactor l1_rank_one(const Matrix& e, const L1RankOneParams& params = {});

/// Truncated SVD: u = left, v = sigma * right.
RankOneFactor svd_rank_one(const Matrix& e);

}  // namespace l1ksvd
