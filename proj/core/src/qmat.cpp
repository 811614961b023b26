#include "fincat/qmat.hpp"

#include <sstream>
#include <stdexcept>

namespace fincat {

QMat QMat::identity(int n) {
  QMat m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

QMat QMat::operator*(const QMat& o) const {
  if (cols_ != o.rows_) throw std::invalid_argument("QMat: shape mismatch in product");
  QMat r(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      const Rat& v = at(i, k);
      if (v == 0) continue;
      for (int j = 0; j < o.cols_; ++j) {
        if (o.at(k, j) == 0) continue;
        r.at(i, j) += v * o.at(k, j);
      }
    }
  return r;
}

QMat QMat::operator+(const QMat& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("QMat: shape mismatch in sum");
  QMat r(rows_, cols_);
  for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] + o.a_[i];
  return r;
}

QMat QMat::operator-(const QMat& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("QMat: shape mismatch in difference");
  QMat r(rows_, cols_);
  for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] - o.a_[i];
  return r;
}

QMat QMat::scaled(const Rat& c) const {
  QMat r(rows_, cols_);
  for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] * c;
  return r;
}

QMat QMat::transpose() const {
  QMat r(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
  return r;
}

QMat QMat::kronecker(const QMat& o) const {
  QMat r(rows_ * o.rows_, cols_ * o.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) {
      if (at(i, j) == 0) continue;
      for (int p = 0; p < o.rows_; ++p)
        for (int q = 0; q < o.cols_; ++q)
          r.at(i * o.rows_ + p, j * o.cols_ + q) = at(i, j) * o.at(p, q);
    }
  return r;
}

bool QMat::is_zero() const {
  for (const auto& v : a_)
    if (v != 0) return false;
  return true;
}

bool QMat::is_identity() const {
  if (rows_ != cols_) return false;
  return *this == identity(rows_);
}

QMat QMat::hcat(const QMat& o) const {
  if (rows_ != o.rows_) throw std::invalid_argument("QMat: hcat row mismatch");
  QMat r(rows_, cols_ + o.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) r.at(i, j) = at(i, j);
    for (int j = 0; j < o.cols_; ++j) r.at(i, cols_ + j) = o.at(i, j);
  }
  return r;
}

QMat QMat::vcat(const QMat& o) const {
  if (cols_ != o.cols_) throw std::invalid_argument("QMat: vcat column mismatch");
  QMat r(rows_ + o.rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(i, j) = at(i, j);
  for (int i = 0; i < o.rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(rows_ + i, j) = o.at(i, j);
  return r;
}

QMat QMat::col(int j) const {
  QMat r(rows_, 1);
  for (int i = 0; i < rows_; ++i) r.at(i, 0) = at(i, j);
  return r;
}

namespace {

// Reduced row echelon form in place; returns pivot column indices.
std::vector<int> rref(QMat& m) {
  std::vector<int> pivots;
  int r = 0;
  for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
    int p = -1;
    for (int i = r; i < m.rows(); ++i)
      if (m.at(i, c) != 0) { p = i; break; }
    if (p < 0) continue;
    if (p != r)
      for (int j = 0; j < m.cols(); ++j) std::swap(m.at(p, j), m.at(r, j));
    Rat inv = 1 / m.at(r, c);
    for (int j = c; j < m.cols(); ++j) m.at(r, j) *= inv;
    for (int i = 0; i < m.rows(); ++i) {
      if (i == r || m.at(i, c) == 0) continue;
      Rat f = m.at(i, c);
      for (int j = c; j < m.cols(); ++j) m.at(i, j) -= f * m.at(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace

int QMat::rank() const {
  QMat m = *this;
  return int(rref(m).size());
}

std::vector<int> QMat::pivot_columns() const {
  QMat m = *this;
  return rref(m);
}

QMat QMat::kernel_basis() const {
  QMat m = *this;
  std::vector<int> pivots = rref(m);
  std::vector<bool> is_pivot(cols_, false);
  for (int c : pivots) is_pivot[c] = true;
  QMat basis(cols_, cols_ - int(pivots.size()));
  int k = 0;
  for (int c = 0; c < cols_; ++c) {
    if (is_pivot[c]) continue;
    basis.at(c, k) = 1;
    for (size_t i = 0; i < pivots.size(); ++i) basis.at(pivots[i], k) = -m.at(int(i), c);
    ++k;
  }
  return basis;
}

std::optional<QMat> QMat::inverse() const {
  if (rows_ != cols_) return std::nullopt;
  if (rows_ == 0) return QMat(0, 0);
  QMat m = hcat(identity(rows_));
  std::vector<int> pivots = rref(m);
  if (int(pivots.size()) != rows_ || pivots.back() >= rows_) {
    // A pivot escaped the left block, so the left block is singular.
    for (int c : pivots)
      if (c >= rows_) return std::nullopt;
    if (int(pivots.size()) != rows_) return std::nullopt;
  }
  QMat inv(rows_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < rows_; ++j) inv.at(i, j) = m.at(i, rows_ + j);
  return inv;
}

bool QMat::invertible() const { return rows_ == cols_ && rank() == rows_; }

std::optional<QMat> QMat::solve(const QMat& b) const {
  if (b.rows() != rows_) throw std::invalid_argument("QMat: solve rhs mismatch");
  QMat m = hcat(b);
  std::vector<int> pivots = rref(m);
  for (int c : pivots)
    if (c >= cols_) return std::nullopt;  // inconsistent
  QMat x(cols_, b.cols());
  for (size_t i = 0; i < pivots.size(); ++i)
    for (int j = 0; j < b.cols(); ++j) x.at(pivots[i], j) = m.at(int(i), cols_ + j);
  return x;
}

std::string QMat::str() const {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < rows_; ++i) {
    os << (i ? "; " : "");
    for (int j = 0; j < cols_; ++j) os << (j ? " " : "") << at(i, j).get_str();
  }
  os << "]";
  return os.str();
}

QMat block_diag(const std::vector<QMat>& blocks) {
  int r = 0, c = 0;
  for (const auto& b : blocks) { r += b.rows(); c += b.cols(); }
  QMat m(r, c);
  int i0 = 0, j0 = 0;
  for (const auto& b : blocks) {
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < b.cols(); ++j) m.at(i0 + i, j0 + j) = b.at(i, j);
    i0 += b.rows();
    j0 += b.cols();
  }
  return m;
}

}  // namespace fincat
