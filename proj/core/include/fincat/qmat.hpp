#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace fincat {

/// Exact rational scalar. GMP keeps values reduced with positive denominator.
using Rat = mpq_class;

/// Dense matrix over the rationals. All arithmetic is exact.
class QMat {
 public:
  QMat() : rows_(0), cols_(0) {}
  QMat(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * cols, Rat(0)) {}

  static QMat identity(int n);
  static QMat zero(int rows, int cols) { return QMat(rows, cols); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Rat& at(int i, int j) { return a_[size_t(i) * cols_ + j]; }
  const Rat& at(int i, int j) const { return a_[size_t(i) * cols_ + j]; }

  bool operator==(const QMat& o) const = default;

  QMat operator*(const QMat& o) const;
  QMat operator+(const QMat& o) const;
  QMat operator-(const QMat& o) const;
  QMat scaled(const Rat& c) const;
  QMat transpose() const;
  QMat kronecker(const QMat& o) const;

  bool is_zero() const;
  bool is_identity() const;

  /// Columns of `o` appended to the right.
  QMat hcat(const QMat& o) const;
  /// Rows of `o` appended below.
  QMat vcat(const QMat& o) const;
  QMat col(int j) const;

  int rank() const;
  /// Basis of the null space, one column per basis vector. Deterministic:
  /// free columns in ascending index, unit entry at the free column.
  QMat kernel_basis() const;
  /// Indices of the pivot columns of the reduced row echelon form.
  std::vector<int> pivot_columns() const;
  std::optional<QMat> inverse() const;
  bool invertible() const;

  /// Solves self * x = b for all columns of b. Empty if inconsistent.
  std::optional<QMat> solve(const QMat& b) const;

  std::string str() const;

 private:
  int rows_, cols_;
  std::vector<Rat> a_;
};

/// A direct sum of matrices along the diagonal.
QMat block_diag(const std::vector<QMat>& blocks);

}  // namespace fincat
