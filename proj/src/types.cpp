#include "l1ksvd/types.hpp"

#include <algorithm>
#include <cmath>

namespace l1ksvd {

Matrix normalize_columns(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (Index j = 0; j < m.cols(); ++j) {
    const double norm = m.col(j).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw InvalidArgument("normalize_columns: column " + std::to_string(j) +
                            " has zero or non-finite norm");
    }
    out.col(j) = m.col(j) / norm;
  }
  return out;
}

Dictionary::Dictionary(const Matrix& atoms) {
  if (atoms.rows() < 1 || atoms.cols() < 1) {
    throw InvalidArgument("Dictionary: needs at least one row and one column");
  }
  atoms_ = normalize_columns(atoms);
}

void Dictionary::set_atom(Index j, const Vector& direction) {
  if (direction.size() != atoms_.rows()) {
    throw InvalidArgument("Dictionary::set_atom: dimension mismatch");
  }
  const double norm = direction.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InvalidArgument("Dictionary::set_atom: zero or non-finite atom " + std::to_string(j));
  }
  atoms_.col(j) = direction / norm;
}

Support support_of_row(const CoefficientMatrix& x, Index row) {
  Support s;
  for (Index n = 0; n < x.cols(); ++n) {
    if (x(row, n) != 0.0) s.push_back(n);
  }
  return s;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

double median_abs(const Eigen::Ref<const Matrix>& m) {
  const Index count = m.size();
  if (count == 0) return 0.0;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(count));
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) values.push_back(std::abs(m(i, j)));
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  double upper = *mid;
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace l1ksvd
