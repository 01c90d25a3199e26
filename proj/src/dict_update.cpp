#include "l1ksvd/dict_update.hpp"

#include <algorithm>
#include <cmath>

namespace l1ksvd {
namespace {

void check_block(const Matrix& e, const char* who) {
  if (e.rows() < 1 || e.cols() < 1) {
    throw InvalidArgument(std::string(who) + ": block must have at least one row and column");
  }
  if (!e.allFinite()) throw InvalidArgument(std::string(who) + ": block contains NaN or Inf");
}

}  // namespace

void validate(const L1RankOneParams& params) {
  if (params.passes < 1) throw InvalidArgument("L1RankOneParams: passes must be >= 1");
  if (!(params.epsilon > 0.0)) throw InvalidArgument("L1RankOneParams: epsilon must be positive");
}

SingularTriple top_singular_pair(const Matrix& e) {
  check_block(e, "top_singular_pair");
  SingularTriple out;
  Index start = 0;
  const double start_norm = std::sqrt(e.colwise().squaredNorm().maxCoeff(&start));
  if (start_norm == 0.0) {
    out.left = Vector::Unit(e.rows(), 0);
    out.right = Vector::Unit(e.cols(), 0);
    out.degenerate = true;
    return out;
  }

  Vector left = e.col(start) / start_norm;
  Vector right(e.cols());
  for (int it = 0; it < kPowerIterations; ++it) {
    right.noalias() = e.transpose() * left;
    right /= right.norm();
    Vector next = e * right;
    next /= next.norm();
    const double change = (next - left).norm();
    left = std::move(next);
    if (change < kPowerTolerance) break;
  }
  right.noalias() = e.transpose() * left;
  out.sigma = right.norm();
  out.right = right / out.sigma;
  out.left = std::move(left);
  return out;
}

double l1_fit_error(const Matrix& e, const Vector& u, const Vector& v) {
  return (e - u * v.transpose()).cwiseAbs().sum();
}

void canonicalize_sign(RankOneFactor& f) {
  for (Index i = 0; i < f.u.size(); ++i) {
    if (f.u(i) == 0.0) continue;
    if (f.u(i) < 0.0) {
      f.u = -f.u;
      f.v = -f.v;
    }
    return;
  }
}

RankOneFactor svd_rank_one(const Matrix& e) {
  const SingularTriple t = top_singular_pair(e);
  RankOneFactor f{t.left, t.sigma * t.right, t.degenerate};
  canonicalize_sign(f);
  return f;
}

RankOneFactor l1_rank_one(const Matrix& e, const L1RankOneParams& params) {
  validate(params);
  check_block(e, "l1_rank_one");
  const SingularTriple init = top_singular_pair(e);

  RankOneFactor best{init.left, init.sigma * init.right, init.degenerate};
  if (init.degenerate || best.v.isZero(0.0)) {
    best.v.setZero();
    best.degenerate = true;
    return best;
  }

  const double eps =
      params.relative_epsilon ? std::max(params.epsilon * median_abs(e), 1e-10) : params.epsilon;

  double best_error = l1_fit_error(e, best.u, best.v);
  Vector u = best.u;
  Vector v = best.v;
  Matrix weights(e.rows(), e.cols());

  for (int pass = 0; pass < params.passes; ++pass) {
    weights = ((e - u * v.transpose()).cwiseAbs().array() + eps).inverse().matrix();

    const Vector v_sq = v.cwiseAbs2();
    const Vector diag = weights * v_sq;
    const Vector rhs = weights.cwiseProduct(e) * v;
    const double top = diag.maxCoeff();
    if (!(top > 0.0)) break;
    const double floor = 1e-12 * top;
    Vector u_next = rhs.array() / (diag.array() + floor);
    if (!u_next.allFinite() || u_next.isZero(0.0)) break;

    const Vector num = weights.cwiseProduct(e).transpose() * u_next;
    const Vector den = weights.transpose() * u_next.cwiseAbs2();
    Vector v_next = (den.array() > 0.0).select(num.array() / den.array(), 0.0);
    if (!v_next.allFinite()) break;

    u = std::move(u_next);
    v = std::move(v_next);
    const double err = l1_fit_error(e, u, v);
    if (err < best_error) {
      best_error = err;
      best.u = u;
      best.v = v;
    }
  }

  const double scale = best.u.norm();
  best.u /= scale;
  best.v *= scale;
  canonicalize_sign(best);
  return best;
}

}  // namespace l1ksvd
