#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fincat/coeff.hpp"
#include "helpers.hpp"

using namespace fincat;
using coeff::Coeff;
using coeff::CSPtr;
using coeff::CoeffSystem;
using coeff::Matrix;

namespace {

// Independent residuation oracle: enumerate the carrier and take the join of
// every x with x (x) a <= b, using only add/mul/leq.
Coeff residuate_oracle(const CSPtr& cs, const Coeff& a, const Coeff& b) {
  Coeff acc = cs->zero();
  for (int i = 0; i < cs->carrier_size(); ++i) {
    Coeff x = cs->carrier_elem(i);
    if (cs->leq(cs->mul(x, a), b)) acc = cs->add(acc, x);
  }
  return acc;
}

Matrix rat_matrix(const CSPtr& cs, std::vector<std::string> rows, std::vector<std::string> cols,
                  const std::vector<std::vector<long>>& vals) {
  Matrix m(cs, std::move(rows), std::move(cols));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m.at(i, j) = cs->from_int(vals[i][j]);
  return m;
}

CSPtr chain3_lattice() {
  // b < u < t with unit u; t (x) t = t, b absorbing.
  return CoeffSystem::finite_lattice(
      {"b", "u", "t"}, {{0, 1, 2}, {1, 1, 2}, {2, 2, 2}},
      {{0, 0, 0}, {0, 1, 2}, {0, 2, 2}}, 1);
}

CSPtr diamond_frame() {
  // 0 < a,b < 1 with tensor = meet, unit = 1 (a frame).
  std::vector<std::vector<int>> join = {{0, 1, 2, 3}, {1, 1, 3, 3}, {2, 3, 2, 3}, {3, 3, 3, 3}};
  std::vector<std::vector<int>> meet = {{0, 0, 0, 0}, {0, 1, 0, 1}, {0, 0, 2, 2}, {0, 1, 2, 3}};
  return CoeffSystem::finite_lattice({"0", "a", "b", "1"}, join, meet, 3);
}

std::vector<CSPtr> quantale_pool() {
  std::vector<CSPtr> out = {CoeffSystem::boolean_quantale(), chain3_lattice(), diamond_frame()};
  for (int cap = 0; cap <= 5; ++cap) out.push_back(CoeffSystem::tropical(cap));
  return out;
}

}  // namespace

TEST_CASE("validate_laws passes for every built-in system") {
  for (const auto& cs :
       {CoeffSystem::rationals(), CoeffSystem::integers(), CoeffSystem::naturals(),
        CoeffSystem::boolean_quantale(), CoeffSystem::tropical(4), chain3_lattice(),
        diamond_frame()}) {
    CHECK_NOTHROW(cs->validate_laws());
  }
}

TEST_CASE("invalid lattice tables are rejected with a witness") {
  // Non-associative "join" table.
  CHECK_THROWS_AS(CoeffSystem::finite_lattice({"x", "y"}, {{0, 1}, {1, 1}},
                                              {{1, 0}, {0, 0}}, 0),
                  std::invalid_argument);
}

TEST_CASE("residuation examples") {
  auto b = CoeffSystem::boolean_quantale();
  CHECK(b->eq(b->residuate(b->from_int(0), b->from_int(1)), b->one()));
  CHECK(b->eq(b->residuate(b->from_int(1), b->from_int(0)), b->zero()));

  auto t = CoeffSystem::tropical(9);
  CHECK(t->str(t->residuate(t->parse("2"), t->parse("5"))) == "3");
}

TEST_CASE("residuation adjunction, exhaustive on finite quantales") {
  for (const auto& cs : quantale_pool()) {
    int n = cs->carrier_size();
    for (int ai = 0; ai < n; ++ai)
      for (int bi = 0; bi < n; ++bi) {
        Coeff a = cs->carrier_elem(ai), b = cs->carrier_elem(bi);
        Coeff r = cs->residuate(a, b);
        CHECK(cs->eq(r, residuate_oracle(cs, a, b)));
        // x <= a\b  iff  x (x) a <= b, for every x.
        for (int xi = 0; xi < n; ++xi) {
          Coeff x = cs->carrier_elem(xi);
          CHECK(cs->leq(x, r) == cs->leq(cs->mul(x, a), b));
        }
      }
  }
}

TEST_CASE("residuation is unsupported outside quantales") {
  auto n = CoeffSystem::naturals();
  CHECK_THROWS_AS(n->residuate(n->from_int(2), n->from_int(1)),
                  coeff::UnsupportedCoefficientError);
}

TEST_CASE("invertibility") {
  auto q = CoeffSystem::rationals();
  CHECK(q->invertible(q->from_rat(Rat(3, 7))));
  CHECK_FALSE(q->invertible(q->zero()));
  auto z = CoeffSystem::integers();
  CHECK(z->invertible(z->from_int(-1)));
  CHECK_FALSE(z->invertible(z->from_int(2)));
  auto t = CoeffSystem::tropical(5);
  CHECK(t->invertible(t->one()));
  CHECK_FALSE(t->invertible(t->parse("1")));
}

TEST_CASE("parse / str round trips") {
  auto q = CoeffSystem::rationals();
  CHECK(q->str(q->parse("3/4")) == "3/4");
  CHECK(q->str(q->parse("-2")) == "-2");
  auto t = CoeffSystem::tropical(3);
  CHECK(t->str(t->parse("inf")) == "inf");
  CHECK(t->str(t->zero()) == "inf");
  CHECK(t->str(t->one()) == "0");
  auto l = chain3_lattice();
  CHECK(l->str(l->parse("t")) == "t");
}

TEST_CASE("mat_mul rational example") {
  auto q = CoeffSystem::rationals();
  Matrix a = rat_matrix(q, {"r0", "r1"}, {"c0", "c1"}, {{1, 2}, {0, 1}});
  Matrix b = rat_matrix(q, {"c0", "c1"}, {"d0", "d1"}, {{1, 0}, {3, 1}});
  Matrix ab = coeff::mat_mul(a, b);
  Matrix want = rat_matrix(q, {"r0", "r1"}, {"d0", "d1"}, {{7, 2}, {3, 1}});
  CHECK(ab.same_entries(want));
  CHECK(ab.row_labels == std::vector<std::string>{"r0", "r1"});
  CHECK(ab.col_labels == std::vector<std::string>{"d0", "d1"});
}

TEST_CASE("mat_mul label mismatch raises") {
  auto q = CoeffSystem::rationals();
  Matrix a = rat_matrix(q, {"r"}, {"x"}, {{1}});
  Matrix b = rat_matrix(q, {"y"}, {"c"}, {{1}});
  CHECK_THROWS_AS(coeff::mat_mul(a, b), coeff::LabelMismatchError);
}

TEST_CASE("boolean adjacency squaring is two-step reachability") {
  auto bq = CoeffSystem::boolean_quantale();
  // Path graph A - B - C.
  Matrix m(bq, {"A", "B", "C"}, {"A", "B", "C"});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m.at(i, j) = bq->from_int(std::abs(i - j) == 1 ? 1 : 0);
  Matrix m2 = coeff::mat_mul(m, m);
  // Two-step reachability oracle on the path.
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      bool reach2 = false;
      for (int k = 0; k < 3; ++k) reach2 |= (std::abs(i - k) == 1 && std::abs(k - j) == 1);
      CHECK(bq->eq(m2.at(i, j), bq->from_int(reach2 ? 1 : 0)));
    }
}

TEST_CASE("mat_mul is associative and unital (randomized)") {
  testutil::Rng r(42);
  std::vector<CSPtr> systems = {CoeffSystem::rationals(), CoeffSystem::naturals(),
                                CoeffSystem::boolean_quantale(), CoeffSystem::tropical(6),
                                chain3_lattice()};
  std::vector<std::string> L = {"l0", "l1", "l2"};
  for (const auto& cs : systems) {
    for (int trial = 0; trial < 30; ++trial) {
      auto rand_mat = [&](std::vector<std::string> rows, std::vector<std::string> cols) {
        Matrix m(cs, std::move(rows), std::move(cols));
        for (auto& e : m.entries) {
          if (cs->is_quantale())
            e = cs->carrier_elem(int(testutil::rnd(r, 0, cs->carrier_size() - 1)));
          else
            e = cs->from_int(testutil::rnd(r, 0, 4));
        }
        return m;
      };
      Matrix a = rand_mat({"a0", "a1"}, L), b = rand_mat(L, {"b0", "b1"});
      Matrix c = rand_mat({"b0", "b1"}, {"c0", "c1", "c2"});
      CHECK(coeff::mat_mul(coeff::mat_mul(a, b), c)
                .same_entries(coeff::mat_mul(a, coeff::mat_mul(b, c))));
      Matrix idl = Matrix::identity(cs, {"a0", "a1"});
      Matrix idr = Matrix::identity(cs, L);
      CHECK(coeff::mat_mul(idl, a).same_entries(a));
      CHECK(coeff::mat_mul(a, idr).same_entries(a));
    }
  }
}

TEST_CASE("q_linear_solve examples") {
  auto q = CoeffSystem::rationals();
  SUBCASE("zero 2x2: rank 0, nullity 2") {
    Matrix z = rat_matrix(q, {"r0", "r1"}, {"c0", "c1"}, {{0, 0}, {0, 0}});
    auto res = coeff::q_linear_solve(z);
    CHECK(res.rank == 0);
    CHECK(res.kernel.cols() == 2);
    CHECK(res.image.cols() == 0);
  }
  SUBCASE("all-ones 2x2: rank 1") {
    Matrix m = rat_matrix(q, {"r0", "r1"}, {"c0", "c1"}, {{1, 1}, {1, 1}});
    auto res = coeff::q_linear_solve(m);
    CHECK(res.rank == 1);
    CHECK(res.kernel.cols() == 1);
    CHECK(res.image.col_labels == std::vector<std::string>{"c0"});
  }
  SUBCASE("averaging projector of the Z/2 regular representation has rank 1") {
    // rho(e) = I, rho(g) = swap; P = (1/2)(rho(e) + rho(g)).
    Matrix p(q, {"e", "g"}, {"e", "g"});
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) p.at(i, j) = q->from_rat(Rat(1, 2));
    auto res = coeff::q_linear_solve(p);
    CHECK(res.rank == 1);
    // P is idempotent: the image is the invariant line.
    QMat pm = coeff::to_qmat(p);
    CHECK(pm * pm == pm);
  }
}

TEST_CASE("kernel and rank laws (randomized)") {
  auto q = CoeffSystem::rationals();
  testutil::Rng r(7);
  for (int trial = 0; trial < 120; ++trial) {
    int rows = int(testutil::rnd(r, 1, 5)), cols = int(testutil::rnd(r, 1, 5));
    std::vector<std::string> rl, cl;
    for (int i = 0; i < rows; ++i) rl.push_back("r" + std::to_string(i));
    for (int j = 0; j < cols; ++j) cl.push_back("c" + std::to_string(j));
    Matrix m(q, rl, cl);
    for (auto& e : m.entries) e = q->from_int(testutil::rnd(r, -3, 3));
    auto res = coeff::q_linear_solve(m);
    CHECK(res.rank + res.kernel.cols() == cols);
    CHECK(res.image.cols() == res.rank);
    if (res.kernel.cols() > 0) {
      QMat prod = coeff::to_qmat(m) * coeff::to_qmat(res.kernel);
      CHECK(prod.is_zero());
    }
    // Image columns are literally pivot columns of m, so rank is preserved.
    if (res.rank > 0) CHECK(coeff::to_qmat(res.image).rank() == res.rank);
  }
}

TEST_CASE("tropical arithmetic saturates at the cap") {
  auto t = CoeffSystem::tropical(3);
  CHECK(t->str(t->mul(t->parse("2"), t->parse("2"))) == "3");   // 4 saturates to cap
  CHECK(t->str(t->mul(t->parse("2"), t->parse("inf"))) == "inf");  // inf absorbs
  CHECK(t->str(t->add(t->parse("2"), t->parse("1"))) == "1");   // join = min
  CHECK(t->str(t->residuate(t->parse("inf"), t->parse("1"))) == "0");
  CHECK(t->str(t->residuate(t->parse("1"), t->parse("inf"))) == "inf");
}
