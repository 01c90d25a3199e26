#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace l1ksvd {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// K x N coefficients. Column n is the code of example n, row j is the
/// usage of atom j across examples.
using CoefficientMatrix = Eigen::MatrixXd;

/// m x N matrix of training examples, one per column.
using TrainingSet = Eigen::MatrixXd;

/// Diagonal of an IRLS weight matrix. Entries are strictly positive.
using DiagonalWeights = Eigen::VectorXd;

/// Strictly increasing column indices into one row of a CoefficientMatrix.
using Support = std::vector<Index>;

/// Thrown when an operation's preconditions on shapes or values are violated.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical routine cannot produce a finite result.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RngSeed {
  std::uint64_t value = 0;
  friend bool operator==(RngSeed, RngSeed) = default;
};

/// Divides every column by its l2 norm. Throws InvalidArgument naming the
/// first zero column.
Matrix normalize_columns(const Matrix& m);

/// An m x K matrix whose columns (atoms) have unit l2 norm.
class Dictionary {
public:
  Dictionary() = default;

  /// Normalizes the columns of `atoms`; throws if any column is zero.
  explicit Dictionary(const Matrix& atoms);

  Index signal_dim() const { return atoms_.rows(); }
  Index atom_count() const { return atoms_.cols(); }

  const Matrix& atoms() const { return atoms_; }
  auto atom(Index j) const { return atoms_.col(j); }

  /// Replaces atom j with `direction / ||direction||`.
  void set_atom(Index j, const Vector& direction);

private:
  Matrix atoms_;
};

/// Indices n with X(row, n) != 0.
Support support_of_row(const CoefficientMatrix& x, Index row);

bool all_finite(const Matrix& m);

/// Median of |entries|. Returns 0 for an empty input.
double median_abs(const Eigen::Ref<const Matrix>& m);

}  // namespace l1ksvd
