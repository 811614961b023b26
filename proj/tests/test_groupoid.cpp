#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "fincat/groupoid.hpp"
#include "helpers.hpp"

using namespace fincat;
using namespace fincat::groupoid;

namespace {

// Brute-force conjugacy class count.
int conjugacy_classes(const FinGroup& g) {
  std::vector<bool> seen(g.size(), false);
  int classes = 0;
  for (int a = 0; a < g.size(); ++a) {
    if (seen[a]) continue;
    ++classes;
    for (int h = 0; h < g.size(); ++h) seen[g.mul(g.mul(h, a), g.inv(h))] = true;
  }
  return classes;
}

GPtr swap_groupoid() {
  // {1,2} // Z2 with the nontrivial element swapping the points.
  return std::make_shared<FinGroupoid>(std::vector<std::string>{"1", "2"}, FinGroup::cyclic(2),
                                       std::vector<std::vector<int>>{{0, 1}, {1, 0}});
}

}  // namespace

TEST_CASE("group constructors and laws") {
  auto s3 = FinGroup::symmetric(3);
  CHECK(s3->size() == 6);
  for (int a = 0; a < 6; ++a) {
    CHECK(s3->mul(a, s3->inv(a)) == s3->id());
    CHECK(s3->mul(s3->id(), a) == a);
  }
  auto z6 = FinGroup::cyclic(6);
  CHECK(conjugacy_classes(*z6) == 6);
  CHECK(conjugacy_classes(*s3) == 3);

  auto prod = FinGroup::direct_product({FinGroup::cyclic(2), FinGroup::cyclic(3)});
  CHECK(prod->size() == 6);
  for (int a = 0; a < 6; ++a) CHECK(prod->join(prod->split(a)) == a);
  // Generators generate the whole group.
  for (const auto& g : testutil::group_pool()) {
    std::set<int> closure = {g->id()};
    bool grew = true;
    while (grew) {
      grew = false;
      for (int a : closure)
        for (int s : g->generators()) {
          if (closure.insert(g->mul(a, s)).second) {
            grew = true;
            break;
          }
        }
    }
    CHECK(long(closure.size()) == g->size());
  }
}

TEST_CASE("pi0 examples") {
  SUBCASE("discrete three points") {
    auto y = FinGroupoid::discrete({"1", "2", "3"});
    auto orbits = pi0_with_aut(*y);
    REQUIRE(orbits.size() == 3);
    for (const auto& o : orbits) CHECK(o.automorphism_order == 1);
  }
  SUBCASE("pt // S3") {
    auto y = FinGroupoid::one_point(FinGroup::symmetric(3));
    auto orbits = pi0_with_aut(*y);
    REQUIRE(orbits.size() == 1);
    CHECK(orbits[0].automorphism_order == 6);
  }
  SUBCASE("{1,2} with the swap action") {
    auto orbits = pi0_with_aut(*swap_groupoid());
    REQUIRE(orbits.size() == 1);
    CHECK(orbits[0].members == std::vector<int>{0, 1});
    CHECK(orbits[0].automorphism_order == 1);
  }
}

TEST_CASE("orbit-stabilizer: |orbit| * |Stab| = |G| on the pool") {
  for (const auto& y : testutil::groupoid_pool()) {
    long gsize = y->group()->size();
    for (const auto& o : pi0_with_aut(*y))
      CHECK(long(o.members.size()) * o.automorphism_order == gsize);
  }
}

TEST_CASE("products") {
  SUBCASE("Y x point has the component structure of Y") {
    for (const auto& y : testutil::groupoid_pool()) {
      auto p = product(y, FinGroupoid::point());
      CHECK(p->size() == y->size());
      auto po = pi0_with_aut(*p);
      auto yo = pi0_with_aut(*y);
      REQUIRE(po.size() == yo.size());
      for (size_t i = 0; i < po.size(); ++i)
        CHECK(po[i].automorphism_order == yo[i].automorphism_order);
    }
  }
  SUBCASE("components multiply") {
    auto pool = testutil::groupoid_pool();
    for (size_t i = 0; i < pool.size(); i += 2)
      for (size_t j = 0; j < pool.size(); j += 3) {
        auto p = product(pool[i], pool[j]);
        CHECK(pi0_with_aut(*p).size() ==
              pi0_with_aut(*pool[i]).size() * pi0_with_aut(*pool[j]).size());
      }
  }
  SUBCASE("(pt//A) x (pt//B) = pt // (A x B)") {
    auto a = FinGroup::cyclic(2), b = FinGroup::symmetric(3);
    auto p = product(FinGroupoid::one_point(a), FinGroupoid::one_point(b));
    CHECK(p->size() == 1);
    CHECK(p->group()->size() == a->size() * b->size());
    CHECK(p->group()->same_as(*FinGroup::direct_product({a, b})));
  }
  SUBCASE("projections are valid maps") {
    auto y1 = swap_groupoid();
    auto y2 = testutil::discrete(2);
    std::vector<GPtr> fs = {y1, y2};
    auto p = product(fs);
    for (int w = 0; w < 2; ++w) CHECK_NOTHROW(projection(p, fs, w).validate());
  }
}

TEST_CASE("iso-comma squares") {
  SUBCASE("discrete maps give the set fiber product") {
    testutil::Rng r(11);
    for (int trial = 0; trial < 40; ++trial) {
      int n1 = int(testutil::rnd(r, 1, 4)), n2 = int(testutil::rnd(r, 1, 4)),
          n0 = int(testutil::rnd(r, 1, 4));
      auto a = testutil::discrete(n1, "a"), b = testutil::discrete(n2, "b"),
           c = testutil::discrete(n0, "c");
      GroupoidMap f{a, c, {0}, {}}, g{b, c, {0}, {}};
      for (int i = 0; i < n1; ++i) f.obj.push_back(int(testutil::rnd(r, 0, n0 - 1)));
      for (int i = 0; i < n2; ++i) g.obj.push_back(int(testutil::rnd(r, 0, n0 - 1)));
      f.validate();
      g.validate();
      auto sq = iso_comma_square(f, g);
      long fib = 0;
      for (int x = 0; x < n1; ++x)
        for (int y = 0; y < n2; ++y)
          if (f.obj[x] == g.obj[y]) ++fib;
      CHECK(long(sq.apex->size()) == fib);
      CHECK(sq.apex->group()->size() == 1);
    }
  }
  SUBCASE("pt over pt//G along itself has |G| points with trivial isotropy") {
    auto g = FinGroup::symmetric(3);
    auto ptg = FinGroupoid::one_point(g);
    GroupoidMap f{FinGroupoid::point(), ptg, {g->id()}, {0}};
    f.validate();
    auto sq = iso_comma_square(f, f);
    CHECK(sq.apex->size() == g->size());
    auto orbits = pi0_with_aut(*sq.apex);
    REQUIRE(orbits.size() == size_t(g->size()));
    for (const auto& o : orbits) CHECK(o.automorphism_order == 1);
  }
  SUBCASE("pulling back an isomorphism gives the domain of the other leg") {
    auto y = swap_groupoid();
    GroupoidMap idy = GroupoidMap::identity(y);
    GroupoidMap f = testutil::to_point(y);
    // Square of f against the identity of its codomain.
    GroupoidMap idc = GroupoidMap::identity(f.cod);
    auto sq = iso_comma_square(f, idc);
    // Apex components must match the domain of f.
    auto ao = pi0_with_aut(*sq.apex);
    auto yo = pi0_with_aut(*y);
    REQUIRE(ao.size() == yo.size());
    for (size_t i = 0; i < ao.size(); ++i)
      CHECK(ao[i].automorphism_order == yo[i].automorphism_order);
  }
  SUBCASE("mismatched codomains are rejected") {
    auto y = testutil::discrete(2);
    GroupoidMap f = GroupoidMap::identity(y);
    GroupoidMap g = GroupoidMap::identity(testutil::discrete(3));
    CHECK_THROWS_AS(iso_comma_square(f, g), std::invalid_argument);
  }
}

TEST_CASE("twisted fixed points examples") {
  SUBCASE("discrete {1,2,3} with the transposition (1 2)") {
    auto y = FinGroupoid::discrete({"1", "2", "3"});
    GroupoidMap f{y, y, {0}, {1, 0, 2}};
    f.validate();
    auto tfp = twisted_fixed_points(y, f);
    REQUIRE(tfp.points.size() == 1);
    CHECK(tfp.points[0] == std::pair<int, int>{2, 0});  // only "3" is fixed
    CHECK(pi0_with_aut(*tfp.groupoid).size() == 1);
  }
  SUBCASE("pt//S3 with the identity: conjugacy classes with centralizer orders") {
    auto y = FinGroupoid::one_point(FinGroup::symmetric(3));
    auto tfp = twisted_fixed_points(y, GroupoidMap::identity(y));
    auto orbits = pi0_with_aut(*tfp.groupoid);
    REQUIRE(orbits.size() == 3);
    std::multiset<long> orders;
    for (const auto& o : orbits) orders.insert(o.automorphism_order);
    CHECK(orders == std::multiset<long>{2, 3, 6});
  }
  SUBCASE("pt//(Z2 x Z2) with the factor swap has two classes") {
    auto z2 = FinGroup::cyclic(2);
    auto g = FinGroup::direct_product({z2, z2});
    auto y = FinGroupoid::one_point(g);
    std::vector<int> theta(4);
    for (int a = 0; a < 4; ++a) {
      auto parts = g->split(a);
      std::swap(parts[0], parts[1]);
      theta[a] = g->join(parts);
    }
    GroupoidMap f{y, y, theta, {0}};
    f.validate();
    auto tfp = twisted_fixed_points(y, f);
    CHECK(pi0_with_aut(*tfp.groupoid).size() == 2);
  }
}

TEST_CASE("twisted fixed points of the identity count conjugacy classes") {
  for (const auto& g : testutil::group_pool()) {
    auto y = FinGroupoid::one_point(g);
    auto tfp = twisted_fixed_points(y, GroupoidMap::identity(y));
    CHECK(long(pi0_with_aut(*tfp.groupoid).size()) == conjugacy_classes(*g));
  }
}

TEST_CASE("map composition and validation") {
  auto y = swap_groupoid();
  GroupoidMap f = testutil::to_point(y);
  GroupoidMap idp = GroupoidMap::identity(f.cod);
  GroupoidMap c = compose(f, idp);
  CHECK(c.obj == f.obj);
  CHECK(c.theta == f.theta);
  // Non-equivariant map rejected.
  GroupoidMap bad{y, y, {0, 1}, {0, 0}};
  CHECK_THROWS(bad.validate());
}
