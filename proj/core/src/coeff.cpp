#include "fincat/coeff.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace fincat::coeff {

namespace {
constexpr const char* kNotQuantale = "operation requires a quantale coefficient system";
}

CSPtr CoeffSystem::rationals() {
  auto cs = std::shared_ptr<CoeffSystem>(new CoeffSystem());
  cs->variant_ = Variant::RationalField;
  return cs;
}

CSPtr CoeffSystem::integers() {
  auto cs = std::shared_ptr<CoeffSystem>(new CoeffSystem());
  cs->variant_ = Variant::IntegerRing;
  return cs;
}

CSPtr CoeffSystem::naturals() {
  auto cs = std::shared_ptr<CoeffSystem>(new CoeffSystem());
  cs->variant_ = Variant::NaturalSemiring;
  return cs;
}

CSPtr CoeffSystem::boolean_quantale() {
  auto cs = std::shared_ptr<CoeffSystem>(new CoeffSystem());
  cs->variant_ = Variant::BooleanQuantale;
  return cs;
}

CSPtr CoeffSystem::tropical(int cap) {
  if (cap < 0) throw std::invalid_argument("tropical cap must be nonnegative");
  auto cs = std::shared_ptr<CoeffSystem>(new CoeffSystem());
  cs->variant_ = Variant::TropicalQuantale;
  cs->cap_ = cap;
  return cs;
}

CSPtr CoeffSystem::finite_lattice(std::vector<std::string> labels,
                                  std::vector<std::vector<int>> join,
                                  std::vector<std::vector<int>> tensor, int unit) {
  auto cs = std::shared_ptr<CoeffSystem>(new CoeffSystem());
  cs->variant_ = Variant::FiniteLatticeQuantale;
  cs->labels_ = std::move(labels);
  cs->join_ = std::move(join);
  cs->tensor_ = std::move(tensor);
  cs->unit_ = unit;
  int n = int(cs->labels_.size());
  if (int(cs->join_.size()) != n || int(cs->tensor_.size()) != n || unit < 0 || unit >= n)
    throw std::invalid_argument("finite lattice: malformed tables");
  // The join identity (bottom) must exist.
  int bottom = -1;
  for (int z = 0; z < n; ++z) {
    bool ok = true;
    for (int x = 0; x < n && ok; ++x) ok = cs->join_[z][x] == x;
    if (ok) { bottom = z; break; }
  }
  if (bottom < 0) throw std::invalid_argument("finite lattice: no bottom element");
  cs->bottom_ = bottom;
  cs->validate_laws();
  return cs;
}

bool CoeffSystem::is_quantale() const {
  switch (variant_) {
    case Variant::BooleanQuantale:
    case Variant::TropicalQuantale:
    case Variant::FiniteLatticeQuantale:
      return true;
    default:
      return false;
  }
}

int CoeffSystem::carrier_size() const {
  switch (variant_) {
    case Variant::BooleanQuantale: return 2;
    case Variant::TropicalQuantale: return cap_ + 2;  // {0..cap} and infinity
    case Variant::FiniteLatticeQuantale: return int(labels_.size());
    default: throw UnsupportedCoefficientError("infinite carrier");
  }
}

Coeff CoeffSystem::zero() const {
  switch (variant_) {
    case Variant::BooleanQuantale: return {.idx = 0};
    case Variant::TropicalQuantale: return {.idx = cap_ + 1};  // infinity
    case Variant::FiniteLatticeQuantale: return {.idx = bottom_};
    default: return {.q = 0};
  }
}

Coeff CoeffSystem::one() const {
  switch (variant_) {
    case Variant::BooleanQuantale: return {.idx = 1};
    case Variant::TropicalQuantale: return {.idx = 0};
    case Variant::FiniteLatticeQuantale: return {.idx = unit_};
    default: return {.q = 1};
  }
}

Coeff CoeffSystem::add(const Coeff& a, const Coeff& b) const {
  switch (variant_) {
    case Variant::BooleanQuantale: return {.idx = a.idx | b.idx};
    case Variant::TropicalQuantale: return {.idx = std::min(a.idx, b.idx)};  // min, inf largest
    case Variant::FiniteLatticeQuantale: return {.idx = join_[a.idx][b.idx]};
    default: return {.q = a.q + b.q};
  }
}

Coeff CoeffSystem::mul(const Coeff& a, const Coeff& b) const {
  switch (variant_) {
    case Variant::BooleanQuantale: return {.idx = a.idx & b.idx};
    case Variant::TropicalQuantale: {
      int inf = cap_ + 1;
      if (a.idx == inf || b.idx == inf) return {.idx = inf};
      return {.idx = std::min(a.idx + b.idx, cap_)};
    }
    case Variant::FiniteLatticeQuantale: return {.idx = tensor_[a.idx][b.idx]};
    default: return {.q = a.q * b.q};
  }
}

bool CoeffSystem::eq(const Coeff& a, const Coeff& b) const {
  return is_quantale() ? a.idx == b.idx : a.q == b.q;
}

bool CoeffSystem::leq(const Coeff& a, const Coeff& b) const {
  if (!is_quantale()) throw UnsupportedCoefficientError(kNotQuantale);
  return eq(add(a, b), b);
}

Coeff CoeffSystem::residuate(const Coeff& a, const Coeff& b) const {
  switch (variant_) {
    case Variant::BooleanQuantale: return {.idx = (a.idx == 0 || b.idx == 1) ? 1 : 0};
    case Variant::TropicalQuantale: {
      int inf = cap_ + 1;
      if (a.idx == inf) return {.idx = 0};              // x (x)inf = inf <= b always
      if (b.idx == inf) return {.idx = inf};            // finite a: only inf reaches inf
      return {.idx = std::max(0, b.idx - a.idx)};
    }
    case Variant::FiniteLatticeQuantale: {
      Coeff r = {.idx = bottom_};
      for (int x = 0; x < carrier_size(); ++x)
        if (leq(mul({.idx = x}, a), b)) r = add(r, {.idx = x});
      return r;
    }
    default:
      throw UnsupportedCoefficientError(kNotQuantale);
  }
}

bool CoeffSystem::invertible(const Coeff& a) const {
  switch (variant_) {
    case Variant::RationalField: return a.q != 0;
    case Variant::IntegerRing: return a.q == 1 || a.q == -1;
    case Variant::NaturalSemiring: return a.q == 1;
    default: {
      for (int x = 0; x < carrier_size(); ++x)
        if (eq(mul({.idx = x}, a), one())) return true;
      return false;
    }
  }
}

Coeff CoeffSystem::from_int(long n) const {
  switch (variant_) {
    case Variant::NaturalSemiring:
      if (n < 0) throw UnsupportedCoefficientError("negative value in the naturals");
      return {.q = Rat(n)};
    case Variant::RationalField:
    case Variant::IntegerRing:
      return {.q = Rat(n)};
    default: {
      // n-fold sum of the unit.
      Coeff r = zero();
      for (long i = 0; i < n; ++i) r = add(r, one());
      return r;
    }
  }
}

Coeff CoeffSystem::from_rat(const Rat& q) const {
  switch (variant_) {
    case Variant::RationalField: return {.q = q};
    case Variant::IntegerRing:
      if (q.get_den() != 1) throw UnsupportedCoefficientError("non-integer value in the integers");
      return {.q = q};
    case Variant::NaturalSemiring:
      if (q.get_den() != 1 || q < 0)
        throw UnsupportedCoefficientError("value outside the naturals");
      return {.q = q};
    default:
      throw UnsupportedCoefficientError("rational literal in a finite quantale");
  }
}

Coeff CoeffSystem::carrier_elem(int i) const {
  if (!is_quantale() || i < 0 || i >= carrier_size())
    throw std::invalid_argument("carrier_elem out of range");
  return {.idx = i};
}

Coeff CoeffSystem::parse(const std::string& s) const {
  switch (variant_) {
    case Variant::BooleanQuantale:
      if (s == "0" || s == "false") return {.idx = 0};
      if (s == "1" || s == "true") return {.idx = 1};
      throw std::invalid_argument("bad boolean literal: " + s);
    case Variant::TropicalQuantale: {
      if (s == "inf" || s == "oo") return {.idx = cap_ + 1};
      int v = std::stoi(s);
      if (v < 0 || v > cap_) throw std::invalid_argument("tropical literal out of range: " + s);
      return {.idx = v};
    }
    case Variant::FiniteLatticeQuantale: {
      auto it = std::find(labels_.begin(), labels_.end(), s);
      if (it == labels_.end()) throw std::invalid_argument("unknown lattice element: " + s);
      return {.idx = int(it - labels_.begin())};
    }
    default: {
      Rat q(s);
      q.canonicalize();
      return from_rat(q);
    }
  }
}

std::string CoeffSystem::str(const Coeff& a) const {
  switch (variant_) {
    case Variant::BooleanQuantale: return a.idx ? "1" : "0";
    case Variant::TropicalQuantale: return a.idx > cap_ ? "inf" : std::to_string(a.idx);
    case Variant::FiniteLatticeQuantale: return labels_[a.idx];
    default: return a.q.get_str();
  }
}

void CoeffSystem::validate_laws() const {
  if (!is_quantale()) return;  // numeric variants carry the laws structurally
  int n = carrier_size();
  auto el = [&](int i) { return Coeff{.idx = i}; };
  auto fail = [&](const std::string& law, int a, int b, int c) {
    std::ostringstream os;
    os << "quantale law violated (" << law << ") at (" << str(el(a)) << ", " << str(el(b))
       << ", " << str(el(c)) << ")";
    throw std::invalid_argument(os.str());
  };
  for (int a = 0; a < n; ++a) {
    if (!eq(mul(one(), el(a)), el(a))) fail("unit", a, a, a);
    if (!eq(add(zero(), el(a)), el(a))) fail("bottom", a, a, a);
    for (int b = 0; b < n; ++b) {
      if (!eq(add(el(a), el(b)), add(el(b), el(a)))) fail("join commutativity", a, b, b);
      if (!eq(mul(el(a), el(b)), mul(el(b), el(a)))) fail("tensor commutativity", a, b, b);
      for (int c = 0; c < n; ++c) {
        if (!eq(add(add(el(a), el(b)), el(c)), add(el(a), add(el(b), el(c)))))
          fail("join associativity", a, b, c);
        if (!eq(mul(mul(el(a), el(b)), el(c)), mul(el(a), mul(el(b), el(c)))))
          fail("tensor associativity", a, b, c);
        if (!eq(mul(el(a), add(el(b), el(c))), add(mul(el(a), el(b)), mul(el(a), el(c)))))
          fail("distributivity", a, b, c);
      }
      // Residuation adjunction: x (x) a <= b iff x <= a -o b.
      Coeff r = residuate(el(a), el(b));
      for (int x = 0; x < n; ++x)
        if (leq(mul(el(x), el(a)), el(b)) != leq(el(x), r)) fail("residuation", a, b, x);
    }
  }
}

// ---------------------------------------------------------------------------

Matrix::Matrix(CSPtr cs_, std::vector<std::string> rows, std::vector<std::string> cols)
    : cs(std::move(cs_)), row_labels(std::move(rows)), col_labels(std::move(cols)) {
  entries.assign(row_labels.size() * col_labels.size(), cs->zero());
}

Matrix Matrix::identity(CSPtr cs, std::vector<std::string> labels) {
  Matrix m(cs, labels, labels);
  for (int i = 0; i < m.rows(); ++i) m.at(i, i) = cs->one();
  return m;
}

bool Matrix::same_entries(const Matrix& o) const {
  if (rows() != o.rows() || cols() != o.cols()) return false;
  for (size_t i = 0; i < entries.size(); ++i)
    if (!cs->eq(entries[i], o.entries[i])) return false;
  return true;
}

std::string Matrix::str() const {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < rows(); ++i) {
    os << (i ? "; " : "");
    for (int j = 0; j < cols(); ++j) os << (j ? " " : "") << cs->str(at(i, j));
  }
  os << "]";
  return os.str();
}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
  if (a.cs->variant() != b.cs->variant())
    throw LabelMismatchError("mat_mul: different coefficient systems");
  if (a.col_labels != b.row_labels)
    throw LabelMismatchError("mat_mul: column labels of the left factor must equal row labels of the right");
  Matrix r(a.cs, a.row_labels, b.col_labels);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      Coeff s = a.cs->zero();
      for (int k = 0; k < a.cols(); ++k) s = a.cs->add(s, a.cs->mul(a.at(i, k), b.at(k, j)));
      r.at(i, j) = s;
    }
  return r;
}

QMat to_qmat(const Matrix& a) {
  if (a.cs->is_quantale())
    throw UnsupportedCoefficientError("to_qmat: numeric coefficients required");
  QMat m(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m.at(i, j) = a.at(i, j).q;
  return m;
}

Matrix from_qmat(const CSPtr& cs, const QMat& m, std::vector<std::string> rows,
                 std::vector<std::string> cols) {
  Matrix r(cs, std::move(rows), std::move(cols));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r.at(i, j) = cs->from_rat(m.at(i, j));
  return r;
}

QSolveResult q_linear_solve(const Matrix& a) {
  if (a.cs->variant() != Variant::RationalField)
    throw UnsupportedCoefficientError("q_linear_solve: rational field required");
  // Pivot order by ascending column label.
  std::vector<int> order(a.cols());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a.col_labels[i] < a.col_labels[j]; });
  QMat p(a.rows(), a.cols());
  for (int j = 0; j < a.cols(); ++j)
    for (int i = 0; i < a.rows(); ++i) p.at(i, j) = a.at(i, order[j]).q;

  QSolveResult res;
  res.rank = p.rank();
  QMat kb = p.kernel_basis();  // rows indexed by permuted columns
  std::vector<std::string> kcols;
  for (int k = 0; k < kb.cols(); ++k) kcols.push_back("k" + std::to_string(k));
  Matrix kernel(a.cs, a.col_labels, kcols);
  for (int j = 0; j < a.cols(); ++j)
    for (int k = 0; k < kb.cols(); ++k) kernel.at(order[j], k) = {.q = kb.at(j, k)};
  res.kernel = std::move(kernel);

  std::vector<int> pivots = p.pivot_columns();
  std::vector<std::string> icols;
  for (int c : pivots) icols.push_back(a.col_labels[order[c]]);
  Matrix image(a.cs, a.row_labels, icols);
  for (size_t k = 0; k < pivots.size(); ++k)
    for (int i = 0; i < a.rows(); ++i) image.at(i, int(k)) = a.at(i, order[pivots[k]]);
  res.image = std::move(image);
  return res;
}

}  // namespace fincat::coeff
