#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fincat/qmat.hpp"

namespace fincat::coeff {

/// Raised when an operation needs structure the active coefficient system
/// lacks (residuation outside a quantale, inverses in the naturals, ...).
struct UnsupportedCoefficientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LabelMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class Variant {
  RationalField,
  IntegerRing,
  NaturalSemiring,
  BooleanQuantale,
  TropicalQuantale,
  FiniteLatticeQuantale,
};

/// A coefficient value. Numeric variants use `q`; finite carriers use `idx`.
struct Coeff {
  Rat q = 0;
  int idx = -1;
};

class CoeffSystem;
using CSPtr = std::shared_ptr<const CoeffSystem>;

/// A commutative semiring, possibly with quantale structure (complete join
/// semilattice, tensor distributing over joins, residuation). Immutable.
class CoeffSystem : public std::enable_shared_from_this<CoeffSystem> {
 public:
  static CSPtr rationals();
  static CSPtr integers();
  static CSPtr naturals();
  static CSPtr boolean_quantale();
  static CSPtr tropical(int cap);
  /// Finite lattice quantale from explicit tables. Validates the laws
  /// exhaustively and throws std::invalid_argument on the first violation.
  static CSPtr finite_lattice(std::vector<std::string> labels,
                              std::vector<std::vector<int>> join,
                              std::vector<std::vector<int>> tensor, int unit);

  Variant variant() const { return variant_; }
  bool is_quantale() const;
  bool is_finite() const { return is_quantale(); }
  int carrier_size() const;
  int tropical_cap() const { return cap_; }

  Coeff zero() const;  // additive unit; bottom of the join order for quantales
  Coeff one() const;   // multiplicative unit
  Coeff add(const Coeff& a, const Coeff& b) const;  // join for quantales
  Coeff mul(const Coeff& a, const Coeff& b) const;  // tensor for quantales
  bool eq(const Coeff& a, const Coeff& b) const;
  /// The quantale order: a <= b iff add(a,b) == b. Quantale variants only.
  bool leq(const Coeff& a, const Coeff& b) const;
  /// Largest x with mul(x, a) <= b in the quantale order.
  Coeff residuate(const Coeff& a, const Coeff& b) const;
  /// Whether some x satisfies mul(x, a) == one().
  bool invertible(const Coeff& a) const;

  Coeff from_int(long n) const;
  Coeff from_rat(const Rat& q) const;
  Coeff carrier_elem(int i) const;
  /// Parses a value in this system ("3/4", "-2", "0"/"1", "inf", lattice label).
  Coeff parse(const std::string& s) const;
  std::string str(const Coeff& a) const;

  /// Commutative-semiring laws on all triples (exhaustive for finite
  /// carriers); join-semilattice + distributivity + residuation for
  /// quantales. Throws std::invalid_argument with a witness on failure.
  void validate_laws() const;

 private:
  CoeffSystem() = default;
  Variant variant_ = Variant::RationalField;
  int cap_ = 0;  // tropical
  std::vector<std::string> labels_;
  std::vector<std::vector<int>> join_, tensor_;
  int unit_ = 0, bottom_ = 0;
};

/// Labeled matrix over a coefficient system.
struct Matrix {
  CSPtr cs;
  std::vector<std::string> row_labels, col_labels;
  std::vector<Coeff> entries;  // row-major

  Matrix() = default;
  Matrix(CSPtr cs, std::vector<std::string> rows, std::vector<std::string> cols);
  static Matrix identity(CSPtr cs, std::vector<std::string> labels);

  int rows() const { return int(row_labels.size()); }
  int cols() const { return int(col_labels.size()); }
  Coeff& at(int i, int j) { return entries[size_t(i) * col_labels.size() + j]; }
  const Coeff& at(int i, int j) const { return entries[size_t(i) * col_labels.size() + j]; }
  bool same_entries(const Matrix& o) const;
  std::string str() const;
};

/// Semiring matrix product. Throws LabelMismatchError unless the column
/// labels of `a` equal the row labels of `b` and the systems agree.
Matrix mat_mul(const Matrix& a, const Matrix& b);

struct QSolveResult {
  int rank = 0;
  Matrix kernel;  // rows labeled by the columns of A; one column per basis vector
  Matrix image;   // the pivot columns of A, labels preserved
};

/// Exact rank / null space / column space over the rational field.
/// Pivots are chosen by ascending column label.
QSolveResult q_linear_solve(const Matrix& a);

/// Converts a rational-field Matrix to its raw QMat (and back).
QMat to_qmat(const Matrix& a);
Matrix from_qmat(const CSPtr& cs, const QMat& m, std::vector<std::string> rows,
                 std::vector<std::string> cols);

}  // namespace fincat::coeff
