#include "l1ksvd/sparse_coding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace l1ksvd {
namespace {

void check_coding_inputs(const Vector& y, const Dictionary& dict) {
  if (y.size() != dict.signal_dim()) {
    throw InvalidArgument("sparse coding: signal has " + std::to_string(y.size()) +
                          " entries, dictionary atoms have " + std::to_string(dict.signal_dim()));
  }
  if (!y.allFinite()) throw InvalidArgument("sparse coding: signal contains NaN or Inf");
}

double smoothed_objective(const Vector& residual, const Vector& x, double lambda, double eps) {
  double data = 0.0;
  for (Index i = 0; i < residual.size(); ++i) data += smoothed_abs(residual(i), eps);
  double penalty = 0.0;
  for (Index i = 0; i < x.size(); ++i) penalty += smoothed_abs(x(i), eps);
  return data + lambda * penalty;
}

}  // namespace

void validate(const IrlsParams& params) {
  if (!(params.epsilon > 0.0)) throw InvalidArgument("IrlsParams: epsilon must be positive");
  if (params.max_inner_iters < 1) throw InvalidArgument("IrlsParams: max_inner_iters must be >= 1");
  if (!(params.rel_tol >= 0.0)) throw InvalidArgument("IrlsParams: rel_tol must be nonnegative");
}

double effective_epsilon(const IrlsParams& params, const Eigen::Ref<const Matrix>& data) {
  if (!params.relative_epsilon) return params.epsilon;
  return std::max(params.epsilon * median_abs(data), 1e-10);
}

double smoothed_abs(double t, double eps) {
  const double a = std::abs(t);
  return a - eps * std::log1p(a / eps);
}

IrlsResult irls_sparse_code_detailed(const Vector& y, const Dictionary& dict, double lambda,
                                     const IrlsParams& params, const Vector& x0) {
  check_coding_inputs(y, dict);
  validate(params);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("irls_sparse_code: lambda must be positive and finite");
  }
  const Matrix& d = dict.atoms();
  const Index m = d.rows();
  const Index k = d.cols();
  if (x0.size() != k) throw InvalidArgument("irls_sparse_code: x0 has wrong length");

  IrlsResult result;
  result.epsilon = effective_epsilon(params, y);
  const double eps = result.epsilon;

  // Inverse weights: x_scale = W2^-1, r_scale = W1^-1.
  Vector x_scale = Vector::Ones(k);
  Vector r_scale = Vector::Ones(m);
  Vector x = x0;
  Matrix scaled_atoms(m, k);
  Matrix system(m, m);

  for (int it = 0; it < params.max_inner_iters; ++it) {
    scaled_atoms = d * x_scale.asDiagonal();
    system.noalias() = scaled_atoms * d.transpose();
    system.diagonal() += lambda * r_scale;
    const double ridge = 1e-12 * system.trace() / static_cast<double>(m);
    system.diagonal().array() += ridge;

    Eigen::LLT<Matrix> llt(system);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("irls_sparse_code: weighted system is not positive definite");
    }
    Vector x_next = scaled_atoms.transpose() * llt.solve(y);
    if (!x_next.allFinite()) throw NumericalError("irls_sparse_code: non-finite iterate");

    const Vector residual = y - d * x_next;
    r_scale = residual.cwiseAbs().array() + eps;
    x_scale = x_next.cwiseAbs().array() + eps;

    const double step = (x_next - x).norm();
    x = std::move(x_next);
    result.iterations = it + 1;
    result.objective_trace.push_back(smoothed_objective(residual, x, lambda, eps));
    if (step < params.rel_tol * (1.0 + x.norm())) {
      result.converged = true;
      break;
    }
  }
  result.x = std::move(x);
  return result;
}

Vector irls_sparse_code(const Vector& y, const Dictionary& dict, double lambda,
                        const IrlsParams& params, const Vector& x0) {
  return irls_sparse_code_detailed(y, dict, lambda, params, x0).x;
}

Vector irls_sparse_code(const Vector& y, const Dictionary& dict, double lambda,
                        const IrlsParams& params) {
  return irls_sparse_code(y, dict, lambda, params, Vector::Zero(dict.atom_count()));
}

ConstrainedResult irls_sparse_code_constrained(const Vector& y, const Dictionary& dict, double tau,
                                               const IrlsParams& params,
                                               std::optional<double> lambda_hint, double window_lower) {
  check_coding_inputs(y, dict);
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw InvalidArgument("irls_sparse_code_constrained: tau must be positive and finite");
  }
  if (!(window_lower > 0.0 && window_lower <= 1.0)) {
    throw InvalidArgument("irls_sparse_code_constrained: window_lower must lie in (0, 1]");
  }
  const Matrix& d = dict.atoms();
  const Vector zero = Vector::Zero(d.cols());

  ConstrainedResult best;
  best.x = zero;
  best.lambda = 0.0;
  best.bracketed = false;
  double best_data = y.lpNorm<1>();

  int solves = 0;
  auto solve = [&](double log_lambda) {
    ++solves;
    return irls_sparse_code(y, dict, std::exp(log_lambda), params, zero);
  };
  auto consider = [&](const Vector& x, double log_lambda) {
    if (x.lpNorm<1>() > tau) return;
    const double data = (y - d * x).lpNorm<1>();
    if (data < best_data) {
      best_data = data;
      best.x = x;
      best.lambda = std::exp(log_lambda);
    }
  };
  auto in_window = [&](const Vector& x) {
    const double n1 = x.lpNorm<1>();
    return n1 <= tau && n1 >= window_lower * tau;
  };

  const double log_min = std::log(kLambdaMin);
  const double log_max = std::log(kLambdaMax);

  // Inactive constraint: the vanishing-penalty solution is already feasible.
  {
    Vector x = irls_sparse_code(y, dict, kLambdaMin, params, zero);
    if (x.lpNorm<1>() <= tau) {
      return ConstrainedResult{std::move(x), kLambdaMin, true, 1};
    }
  }

  // Invariant: ||x(lo)||_1 > tau; hi is feasible or the upper limit.
  double lo = log_min;
  double hi = log_max;

  auto accept = [&](Vector x, double log_lambda) {
    best.x = std::move(x);
    best.lambda = std::exp(log_lambda);
    best.bracketed = true;
    best.solves = solves + 1;
    return best;
  };

  if (lambda_hint && *lambda_hint > 0.0 && std::isfinite(*lambda_hint)) {
    // Walk away from the hint in factors of 4 until the feasibility
    // boundary is bracketed.
    const double step = std::log(4.0);
    const double start = std::clamp(std::log(*lambda_hint), log_min, log_max);
    Vector x = solve(start);
    if (x.lpNorm<1>() > tau) {
      lo = start;
      for (double p = start + step; p < log_max && solves < kMaxBisections; p += step) {
        x = solve(p);
        if (x.lpNorm<1>() > tau) {
          lo = p;
          continue;
        }
        consider(x, p);
        if (in_window(x)) return accept(std::move(x), p);
        hi = p;
        break;
      }
    } else {
      consider(x, start);
      if (in_window(x)) return accept(std::move(x), start);
      hi = start;
      for (double p = start - step; p > log_min && solves < kMaxBisections; p -= step) {
        x = solve(p);
        if (x.lpNorm<1>() > tau) {
          lo = p;
          break;
        }
        consider(x, p);
        if (in_window(x)) return accept(std::move(x), p);
        hi = p;
      }
    }
  }

  while (solves < kMaxBisections) {
    const double mid = 0.5 * (lo + hi);
    Vector x = solve(mid);
    if (x.lpNorm<1>() > tau) {
      lo = mid;
    } else {
      consider(x, mid);
      if (in_window(x)) return accept(std::move(x), mid);
      hi = mid;
    }
  }
  best.solves = solves + 1;
  return best;
}

Vector omp(const Vector& y, const Dictionary& dict, const Matrix& gram, const OmpStop& stop) {
  check_coding_inputs(y, dict);
  const Matrix& d = dict.atoms();
  const Index m = d.rows();
  const Index k = d.cols();
  const Index max_atoms = std::min(m, k);

  Index target_size = max_atoms;
  double target_residual = 0.0;
  bool by_sparsity = false;
  if (const auto* sp = std::get_if<Sparsity>(&stop)) {
    if (sp->s < 0 || sp->s > max_atoms) {
      throw InvalidArgument("omp: sparsity must lie in [0, min(m, K)]");
    }
    target_size = sp->s;
    by_sparsity = true;
  } else {
    target_residual = std::get<ResidualNorm>(stop).r;
    if (!(target_residual >= 0.0)) throw InvalidArgument("omp: residual bound must be >= 0");
  }

  const Vector dty = d.transpose() * y;
  Vector x = Vector::Zero(k);
  Vector residual = y;
  std::vector<Index> active;
  std::vector<char> selected(static_cast<std::size_t>(k), 0);
  Vector coeffs;

  while (static_cast<Index>(active.size()) < target_size) {
    if (!by_sparsity && residual.norm() <= target_residual) break;

    const Vector corr = d.transpose() * residual;
    Index best = -1;
    double best_abs = 0.0;
    for (Index j = 0; j < k; ++j) {
      if (selected[static_cast<std::size_t>(j)]) continue;
      const double a = std::abs(corr(j));
      if (best < 0 || a > best_abs) {
        best = j;
        best_abs = a;
      }
    }
    // Residual is orthogonal to every remaining atom.
    if (best < 0 || best_abs == 0.0) break;

    active.push_back(best);
    selected[static_cast<std::size_t>(best)] = 1;
    const auto n_active = static_cast<Index>(active.size());
    Matrix sub_gram(n_active, n_active);
    Vector rhs(n_active);
    for (Index a = 0; a < n_active; ++a) {
      rhs(a) = dty(active[static_cast<std::size_t>(a)]);
      for (Index b = 0; b < n_active; ++b) {
        sub_gram(a, b) = gram(active[static_cast<std::size_t>(a)], active[static_cast<std::size_t>(b)]);
      }
    }
    coeffs = sub_gram.ldlt().solve(rhs);
    residual = y;
    for (Index a = 0; a < n_active; ++a) {
      residual.noalias() -= coeffs(a) * d.col(active[static_cast<std::size_t>(a)]);
    }
  }

  for (std::size_t a = 0; a < active.size(); ++a) x(active[a]) = coeffs(static_cast<Index>(a));
  return x;
}

Vector omp(const Vector& y, const Dictionary& dict, const OmpStop& stop) {
  const Matrix gram = dict.atoms().transpose() * dict.atoms();
  return omp(y, dict, gram, stop);
}

CoefficientMatrix omp_batch(const TrainingSet& y, const Dictionary& dict, const OmpStop& stop) {
  if (y.rows() != dict.signal_dim()) throw InvalidArgument("omp_batch: dimension mismatch");
  const Matrix gram = dict.atoms().transpose() * dict.atoms();
  CoefficientMatrix x(dict.atom_count(), y.cols());
#pragma omp parallel for schedule(dynamic, 16)
  for (Index n = 0; n < y.cols(); ++n) {
    x.col(n) = omp(y.col(n), dict, gram, stop);
  }
  return x;
}

void validate(const PruneRule& rule) {
  if (const auto* t = std::get_if<AbsoluteThreshold>(&rule)) {
    if (!(t->t0 >= 0.0)) throw InvalidArgument("prune: threshold must be nonnegative");
  } else {
    const double f = std::get<KeepFraction>(rule).fraction;
    if (!(f > 0.0 && f <= 1.0)) throw InvalidArgument("prune: keep fraction must lie in (0, 1]");
  }
}

Index kept_per_column(double fraction, Index atom_count) {
  // The slack absorbs products such as 0.07 * 100 = 7.000000000000001.
  const double raw = fraction * static_cast<double>(atom_count);
  const auto keep = static_cast<Index>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::clamp<Index>(keep, 1, atom_count);
}

CoefficientMatrix prune(const CoefficientMatrix& x, const PruneRule& rule) {
  validate(rule);
  CoefficientMatrix out = x;
  if (const auto* t = std::get_if<AbsoluteThreshold>(&rule)) {
    out = (x.array().abs() < t->t0).select(0.0, x);
    return out;
  }
  const Index keep = kept_per_column(std::get<KeepFraction>(rule).fraction, x.rows());
  std::vector<Index> order(static_cast<std::size_t>(x.rows()));
  for (Index n = 0; n < x.cols(); ++n) {
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return std::abs(x(a, n)) > std::abs(x(b, n));
    });
    for (std::size_t r = static_cast<std::size_t>(keep); r < order.size(); ++r) out(order[r], n) = 0.0;
  }
  return out;
}

}  // namespace l1ksvd
