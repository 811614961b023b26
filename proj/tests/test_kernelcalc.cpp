#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fincat/kernelcalc.hpp"
#include "helpers.hpp"

using namespace fincat;
using namespace fincat::kernel;
using groupoid::FinGroup;
using groupoid::FinGroupoid;
using groupoid::GPtr;
using groupoid::GroupoidMap;
using sheaf::Bundle;

namespace {

GPtr pt() { return FinGroupoid::point(); }

// Matrix-product oracle for convolutions of discrete kernels.
std::vector<std::vector<int>> dims_product(const Kernel& a, const Kernel& b) {
  std::vector<std::vector<int>> out(a.y1->size(), std::vector<int>(b.y2->size(), 0));
  for (int i = 0; i < a.y1->size(); ++i)
    for (int j = 0; j < b.y2->size(); ++j)
      for (int k = 0; k < a.y2->size(); ++k) out[i][j] += a.stalk(i, k) * b.stalk(k, j);
  return out;
}

std::vector<std::vector<int>> stalk_dims(const Kernel& k) {
  std::vector<std::vector<int>> out(k.y1->size(), std::vector<int>(k.y2->size()));
  for (int i = 0; i < k.y1->size(); ++i)
    for (int j = 0; j < k.y2->size(); ++j) out[i][j] = k.stalk(i, j);
  return out;
}

// Canonical sigma for a square with A*G and F*B literally equal composites,
// built from unitors when one leg is a unit kernel.
KernelMap canonical_unit_square_sigma(const Kernel& k) {
  // sigma: K * U -> U * K through K.
  KernelMap ru = right_unitor(k);
  KernelMap lu_inv = left_unitor(k).inverse();
  return kernel_compose(ru, lu_inv);
}

}  // namespace

TEST_CASE("identity kernel examples") {
  SUBCASE("discrete: the identity dimension matrix") {
    auto d3 = testutil::discrete(3);
    IdKernel u = identity_kernel(d3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(u.k.stalk(i, j) == (i == j ? 1 : 0));
  }
  SUBCASE("pt//G: the group algebra") {
    auto y = FinGroupoid::one_point(FinGroup::symmetric(3));
    CHECK(identity_kernel(y).k.stalk(0, 0) == 6);
  }
  SUBCASE("unit laws via unitors") {
    testutil::Rng r(3);
    auto a = testutil::discrete(2, "a"), b = testutil::discrete(3, "b");
    Kernel k = testutil::random_discrete_kernel(a, b, r);
    CHECK(left_unitor(k).is_iso());
    CHECK(right_unitor(k).is_iso());
    auto y = FinGroupoid::one_point(FinGroup::cyclic(3));
    Kernel u = identity_kernel(y).k;
    CHECK(left_unitor(u).is_iso());
  }
}

TEST_CASE("convolution examples") {
  auto d2 = testutil::discrete(2);
  SUBCASE("matrix-product oracle") {
    Kernel a = Kernel::from_dims(d2, d2, {{1, 2}, {0, 1}});
    Kernel b = Kernel::from_dims(d2, d2, {{1, 0}, {3, 1}});
    Kernel c = convolve(a, b);
    CHECK(stalk_dims(c) == std::vector<std::vector<int>>{{7, 2}, {3, 1}});
    CHECK(stalk_dims(c) == dims_product(a, b));
  }
  SUBCASE("random discrete convolutions match the oracle") {
    testutil::Rng r(21);
    for (int trial = 0; trial < 25; ++trial) {
      auto x = testutil::discrete(int(testutil::rnd(r, 1, 3)), "x");
      auto y = testutil::discrete(int(testutil::rnd(r, 1, 3)), "y");
      auto z = testutil::discrete(int(testutil::rnd(r, 1, 3)), "z");
      Kernel a = testutil::random_discrete_kernel(x, y, r);
      Kernel b = testutil::random_discrete_kernel(y, z, r);
      CHECK(stalk_dims(convolve(a, b)) == dims_product(a, b));
    }
  }
  SUBCASE("associator is an isomorphism") {
    testutil::Rng r(22);
    auto x = testutil::discrete(2, "x");
    Kernel a = testutil::random_discrete_kernel(x, x, r, 1);
    Kernel b = testutil::random_discrete_kernel(x, x, r, 2);
    Kernel c = testutil::random_discrete_kernel(x, x, r, 1);
    CHECK(associator(a, b, c).is_iso());
    auto y = FinGroupoid::one_point(FinGroup::cyclic(2));
    Kernel u = identity_kernel(y).k;
    CHECK(associator(u, u, u).is_iso());
  }
  SUBCASE("normalize_iso on a 3-chain") {
    testutil::Rng r(23);
    auto x = testutil::discrete(2, "x");
    std::vector<Kernel> ks = {testutil::random_discrete_kernel(x, x, r, 1),
                              testutil::random_discrete_kernel(x, x, r, 1),
                              testutil::random_discrete_kernel(x, x, r, 1)};
    CHECK(normalize_iso(ks).is_iso());
  }
}

TEST_CASE("kernel action examples") {
  SUBCASE("the unit acts as the identity") {
    for (const auto& y : {testutil::discrete(3), FinGroupoid::one_point(FinGroup::cyclic(3))}) {
      Kernel u = identity_kernel(y).k;
      Bundle v = Bundle::trivial(y, 2);
      Bundle w = act(u, v);
      CHECK(w.total_dim() == v.total_dim());
      CHECK(sheaf::find_iso(w, v).has_value());
    }
  }
  SUBCASE("discrete action is the matrix-vector product on dimensions") {
    testutil::Rng r(33);
    auto x = testutil::discrete(2, "x"), y = testutil::discrete(3, "y");
    Kernel k = testutil::random_discrete_kernel(x, y, r);
    Bundle v = testutil::random_discrete_bundle(x, r);
    Bundle w = act(k, v);
    for (int j = 0; j < 3; ++j) {
      int expect = 0;
      for (int i = 0; i < 2; ++i) expect += v.dims[i] * k.stalk(i, j);
      CHECK(w.dims[j] == expect);
    }
  }
  SUBCASE("action is functorial along convolution") {
    testutil::Rng r(34);
    auto x = testutil::discrete(2, "x"), y = testutil::discrete(2, "y"),
         z = testutil::discrete(2, "z");
    Kernel a = testutil::random_discrete_kernel(x, y, r, 1);
    Kernel b = testutil::random_discrete_kernel(y, z, r, 1);
    Bundle v = testutil::random_discrete_bundle(x, r, 1);
    Bundle lhs = act(convolve(a, b), v);
    Bundle rhs = act(b, act(a, v));
    CHECK(lhs.total_dim() == rhs.total_dim());
    CHECK(sheaf::find_iso(lhs, rhs).has_value());
  }
}

TEST_CASE("column kernels") {
  auto y = FinGroupoid::one_point(FinGroup::cyclic(2));
  Bundle v = Bundle::regular_rep(FinGroup::cyclic(2));
  Kernel c = column_kernel(v);
  CHECK(c.y1->size() == 1);
  CHECK(c.stalk(0, 0) == 2);
  Bundle back = column_to_bundle(c.payload, y);
  CHECK(sheaf::find_iso(back, v).has_value());
}

TEST_CASE("duality data") {
  SUBCASE("discrete two points: the S-composite contracts to the unit") {
    auto d2 = testutil::discrete(2);
    DualityData dd = duality_data(d2);
    CHECK(dd.to_unit.is_iso());
  }
  SUBCASE("pt//Z2") {
    auto y = FinGroupoid::one_point(FinGroup::cyclic(2));
    CHECK(duality_data(y).to_unit.is_iso());
  }
  SUBCASE("counit of the unit kernel counts classes") {
    auto y = FinGroupoid::one_point(FinGroup::symmetric(3));
    CHECK(trace_lt_ag(identity_kernel(y).k).dim == 3);
  }
}

TEST_CASE("trace examples") {
  auto d2 = testutil::discrete(2);
  SUBCASE("diagonal sum oracle") {
    Kernel k = Kernel::from_dims(d2, d2, {{5, 1}, {2, 7}});
    CHECK(trace_lt_ag(k).dim == 12);
    DualityTrace t = trace_via_duality(k);
    CHECK(t.dim == 12);
    CHECK(t.lt.invertible());
  }
  SUBCASE("unit kernel on pt//S3: class functions") {
    auto y = FinGroupoid::one_point(FinGroup::symmetric(3));
    TraceSpace t = trace_lt_ag(identity_kernel(y).k);
    CHECK(t.dim == 3);
    CHECK(t.labels.size() == 3);
    CHECK(trace_via_duality(identity_kernel(y).k).dim == 3);
  }
  SUBCASE("zero kernel has trace zero") {
    Kernel z = Kernel::from_dims(d2, d2, {{1, 0}, {0, 1}}).zero_like();
    CHECK(trace_lt_ag(z).dim == 0);
    CHECK(trace_via_duality(z).dim == 0);
  }
  SUBCASE("graph of the permutation (1 2)(3): one fixed point") {
    auto d3 = testutil::discrete(3);
    Kernel k = testutil::graph_kernel(d3, d3, {1, 0, 2});
    CHECK(trace_lt_ag(k).dim == 1);
    CHECK(trace_via_duality(k).dim == 1);
  }
}

TEST_CASE("right adjoints") {
  SUBCASE("unit kernel is self-adjoint") {
    auto y = FinGroupoid::one_point(FinGroup::cyclic(2));
    Kernel u = identity_kernel(y).k;
    AdjointResult ar = kernel_right_adjoint(u);
    REQUIRE(ar.data.has_value());
    CHECK(stalk_dims(ar.data->adjoint) == stalk_dims(u));
    CHECK(ar.data->unit.is_iso());
    CHECK(ar.data->counit.is_iso());
  }
  SUBCASE("permutation kernels have the transpose as adjoint") {
    auto d3 = testutil::discrete(3);
    Kernel k = testutil::graph_kernel(d3, d3, {2, 0, 1});
    AdjointResult ar = kernel_right_adjoint(k);
    REQUIRE(ar.data.has_value());
    CHECK(stalk_dims(ar.data->adjoint) == stalk_dims(swap_feet(k)));
  }
  SUBCASE("column kernels: adjoint dims are the transposed dual") {
    testutil::Rng r(41);
    auto d2 = testutil::discrete(2);
    Bundle v = testutil::random_discrete_bundle(d2, r, 2);
    Kernel c = column_kernel(v);
    AdjointResult ar = kernel_right_adjoint(c);
    REQUIRE(ar.data.has_value());
    Bundle dual = sheaf::verdier_dual(v);
    for (int x = 0; x < 2; ++x) CHECK(ar.data->adjoint.stalk(x, 0) == dual.dims[x]);
  }
}

TEST_CASE("beck-chevalley") {
  auto d2 = testutil::discrete(2);
  SUBCASE("identity squares pass") {
    testutil::Rng r(55);
    Kernel k = testutil::random_discrete_kernel(d2, d2, r);
    Kernel u1 = identity_kernel(d2).k;
    // Square A = K, G = U, F = U? Feet demand A: Y1->Y2, G: Y2->Y4,
    // F: Y1->Y3, B: Y3->Y4 with Y3 = Y1, Y4 = Y2: F = U_{Y1}, G = U_{Y2},
    // A = B = K; sigma: K * U -> U * K.
    KernelMap sigma = canonical_unit_square_sigma(k);
    BCResult res = beck_chevalley_check(k, u1, u1, k, sigma, BCSide::Right);
    CHECK(res.pass);
    REQUIRE(res.mate.has_value());
    CHECK(res.mate->is_iso());
  }
  SUBCASE("set pullback squares pass, non-pullbacks fail") {
    // b: {c0,c1} -> {*}, g: {y0} -> {*}; pullback has one point per (c, y).
    auto c2 = testutil::discrete(2, "c");
    auto one = testutil::discrete(1, "y");
    Kernel b = testutil::graph_kernel(c2, pt(), {0, 0});
    Kernel g = testutil::graph_kernel(one, pt(), {0});
    {
      // Pullback: two points mapping correctly.
      auto p = testutil::discrete(2, "p");
      Kernel f = testutil::graph_kernel(p, c2, {0, 1});  // to c
      Kernel a = testutil::graph_kernel(p, one, {0, 0});  // to y
      auto sigma = kernel_iso(convolve(a, g), convolve(f, b));
      REQUIRE(sigma.has_value());
      CHECK(beck_chevalley_check(a, g, f, b, *sigma, BCSide::Right).pass);
    }
    {
      // Not a pullback: the apex hits only one sheet.
      auto p = testutil::discrete(1, "p");
      Kernel f = testutil::graph_kernel(p, c2, {0});
      Kernel a = testutil::graph_kernel(p, one, {0});
      auto sigma = kernel_iso(convolve(a, g), convolve(f, b));
      REQUIRE(sigma.has_value());
      BCResult res = beck_chevalley_check(a, g, f, b, *sigma, BCSide::Right);
      CHECK_FALSE(res.pass);
      CHECK_FALSE(res.witness.empty());
    }
  }
}

TEST_CASE("class_of examples") {
  SUBCASE("unit class on the point") {
    Kernel u = identity_kernel(pt()).k;
    Bundle g = Bundle::trivial(pt(), 1);
    Bundle kg = act(u, g);
    REQUIRE(kg.dims == std::vector<int>{1});
    std::vector<QMat> alpha = {QMat::identity(1)};
    QMat cls = class_of(g, alpha, u);
    REQUIRE(cls.rows() == 1);
    CHECK(cls.at(0, 0) == Rat(1));
  }
  SUBCASE("delta classes on a discrete diagonal kernel") {
    auto d2 = testutil::discrete(2);
    Kernel k = Kernel::from_dims(d2, d2, {{1, 0}, {0, 1}});
    for (int x = 0; x < 2; ++x) {
      std::vector<int> dims = {x == 0 ? 1 : 0, x == 1 ? 1 : 0};
      Bundle g = sheaf::Bundle::from_action(d2, dims, [&dims](int, int p) {
        return QMat::identity(dims[p]);
      });
      std::vector<QMat> alpha;
      for (int p = 0; p < 2; ++p) {
        QMat m(dims[p], dims[p]);
        if (dims[p] == 1) m.at(0, 0) = 5;
        alpha.push_back(m);
      }
      QMat cls = class_of(g, alpha, k);
      REQUIRE(cls.rows() == 2);
      for (int p = 0; p < 2; ++p) CHECK(cls.at(p, 0) == (p == x ? Rat(5) : Rat(0)));
    }
  }
  SUBCASE("additivity in the sheaf argument") {
    auto d2 = testutil::discrete(2);
    Kernel k = Kernel::from_dims(d2, d2, {{1, 0}, {0, 1}});
    std::vector<int> dims = {1, 1};
    Bundle g = sheaf::Bundle::from_action(d2, dims, [](int, int) { return QMat::identity(1); });
    auto alpha_scalar = [&](Rat c0, Rat c1) {
      std::vector<QMat> a(2, QMat(1, 1));
      a[0].at(0, 0) = c0;
      a[1].at(0, 0) = c1;
      return a;
    };
    QMat c1 = class_of(g, alpha_scalar(2, 3), k);
    QMat c2 = class_of(g, alpha_scalar(-1, 4), k);
    Bundle gg = sheaf::direct_sum(g, g);
    std::vector<QMat> alpha;
    for (int p = 0; p < 2; ++p) {
      QMat m(2, 2);
      m.at(0, 0) = (p == 0) ? 2 : 3;
      m.at(1, 1) = (p == 0) ? -1 : 4;
      alpha.push_back(m);
    }
    QMat csum = class_of(gg, alpha, k);
    CHECK(csum == c1 + c2);
  }
}

TEST_CASE("rotation isomorphism") {
  testutil::Rng r(61);
  auto x = testutil::discrete(2, "x"), y = testutil::discrete(2, "y");
  Kernel a = testutil::random_discrete_kernel(x, y, r);
  Kernel b = testutil::random_discrete_kernel(y, x, r);
  QMat rot = rotation_iso(a, b);
  CHECK(rot.invertible());
  CHECK(rot.rows() == trace_lt_ag(convolve(b, a)).dim);
  CHECK(rot.cols() == trace_lt_ag(convolve(a, b)).dim);
}

TEST_CASE("trace functoriality") {
  SUBCASE("along the identity kernel") {
    auto d2 = testutil::discrete(2);
    Kernel u = identity_kernel(d2).k;
    testutil::Rng r(62);
    Kernel f = Kernel::from_dims(d2, d2, {{1, 0}, {0, 2}});
    AdjointResult ar = kernel_right_adjoint(u);
    REQUIRE(ar.data.has_value());
    KernelMap alpha = canonical_unit_square_sigma(f);  // F*U -> U*F
    QMat m = trace_functoriality(u, *ar.data, f, f, alpha);
    CHECK(m.is_identity());
  }
  SUBCASE("along a proper map: sums over fibers") {
    auto d2 = testutil::discrete(2);
    Kernel h = testutil::graph_kernel(d2, pt(), {0, 0});
    Kernel f1 = identity_kernel(d2).k;
    Kernel f2 = identity_kernel(pt()).k;
    AdjointResult ar = kernel_right_adjoint(h);
    REQUIRE(ar.data.has_value());
    auto alpha = kernel_iso(convolve(f1, h), convolve(h, f2));
    REQUIRE(alpha.has_value());
    QMat m = trace_functoriality(h, *ar.data, f1, f2, *alpha);
    REQUIRE(m.rows() == 1);
    REQUIRE(m.cols() == 2);
    // Up to the scaling of the chosen iso, both fibers contribute equally.
    CHECK(m.at(0, 0) == m.at(0, 1));
    CHECK(m.at(0, 0) != Rat(0));
  }
}

TEST_CASE("whisker and kernel hom spaces") {
  auto d2 = testutil::discrete(2);
  Kernel k = Kernel::from_dims(d2, d2, {{1, 1}, {0, 1}});
  auto homs = kernel_hom(k, k);
  CHECK(homs.size() == 3);  // one scalar per nonzero stalk
  KernelMap id = kernel_identity(k);
  Kernel u = identity_kernel(d2).k;
  KernelMap w = whisker({u}, id, {});
  CHECK(w.is_iso());
}
