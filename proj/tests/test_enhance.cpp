#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fincat/enhance.hpp"
#include "helpers.hpp"

using namespace fincat;
using namespace fincat::enhance;
using coeff::CoeffSystem;
using coeff::CSPtr;

namespace {

int idx_of(const CSPtr& a, const std::string& s) {
  coeff::Coeff c = a->parse(s);
  for (int i = 0; i < a->carrier_size(); ++i)
    if (a->eq(a->carrier_elem(i), c)) return i;
  REQUIRE(false);
  return -1;
}

int unit_idx(const CSPtr& a) {
  for (int i = 0; i < a->carrier_size(); ++i)
    if (a->eq(a->carrier_elem(i), a->one())) return i;
  REQUIRE(false);
  return -1;
}

// The discrete symmetric monoidal poset on Z/2 = {e, g}.
SMPosetO z2_poset() {
  SMPosetO o;
  o.objs = {"e", "g"};
  o.leq = {{true, false}, {false, true}};
  o.tensor = {{0, 1}, {1, 0}};
  o.unit = 0;
  o.ihom = {{0, 1}, {1, 0}};
  o.dual = {0, 1};
  o.validate();
  return o;
}

// The one-object SM poset (just the unit).
SMPosetO unit_poset() {
  SMPosetO o;
  o.objs = {"1"};
  o.leq = {{true}};
  o.tensor = {{0}};
  o.unit = 0;
  o.ihom = {{0}};
  o.dual = {0};
  o.validate();
  return o;
}

// A 3-element chain quantale b < u < t with unit u (so the unit is not top).
CSPtr chain3() {
  return CoeffSystem::finite_lattice({"b", "u", "t"}, {{0, 1, 2}, {1, 1, 2}, {2, 2, 2}},
                                     {{0, 0, 0}, {0, 1, 2}, {0, 2, 2}}, 1);
}

LaxFunctorF identity_functor(const CSPtr& a, const SMPosetO& o) {
  LaxFunctorF f{a, {}};
  f.map.resize(o.n());
  for (int i = 0; i < o.n(); ++i) f.map[i] = i;  // from_quantale keeps carrier order
  f.validate(o);
  return f;
}

LaxFunctorF constant_unit_functor(const CSPtr& a, const SMPosetO& o) {
  LaxFunctorF f{a, std::vector<int>(o.n(), unit_idx(a))};
  f.validate(o);
  return f;
}

}  // namespace

TEST_CASE("SM poset validation") {
  CHECK_NOTHROW(z2_poset());
  CHECK_NOTHROW(unit_poset());
  SUBCASE("from a quantale") {
    for (const auto& a : {CoeffSystem::boolean_quantale(), CoeffSystem::tropical(3), chain3()}) {
      SMPosetO o = SMPosetO::from_quantale(a);
      CHECK_NOTHROW(o.validate());
    }
    // In the boolean quantale only the unit is invertible: no dual for 0.
    CHECK_FALSE(SMPosetO::from_quantale(CoeffSystem::boolean_quantale()).has_all_duals());
    CHECK(z2_poset().has_all_duals());
  }
  SUBCASE("a broken adjunction is rejected") {
    SMPosetO o = z2_poset();
    o.ihom = {{1, 0}, {0, 1}};
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  }
}

TEST_CASE("build_enh examples") {
  SUBCASE("boolean into tropical: explicit hom table") {
    auto bq = CoeffSystem::boolean_quantale();
    auto t9 = CoeffSystem::tropical(9);
    SMPosetO o = SMPosetO::from_quantale(bq);
    int o0 = idx_of(bq, "0"), o1 = idx_of(bq, "1");
    LaxFunctorF f{t9, std::vector<int>(2)};
    f.map[o1] = idx_of(t9, "0");
    f.map[o0] = idx_of(t9, "inf");
    f.validate(o);
    enriched::EnrichedCat e = build_enh(o, f);
    auto s = [&](int i, int j) { return t9->str(t9->carrier_elem(e.at(i, j))); };
    CHECK(s(o0, o0) == "0");
    CHECK(s(o0, o1) == "0");
    CHECK(s(o1, o0) == "inf");
    CHECK(s(o1, o1) == "0");
  }
  SUBCASE("the strict identity recovers the self-enrichment") {
    for (const auto& a : {CoeffSystem::boolean_quantale(), CoeffSystem::tropical(2)}) {
      SMPosetO o = SMPosetO::from_quantale(a);
      enriched::EnrichedCat e = build_enh(o, identity_functor(a, o));
      CHECK(e.hom == enriched::self_enrichment(a).hom);
    }
  }
  SUBCASE("a constant-unit functor gives the codiscrete enrichment") {
    auto a = CoeffSystem::tropical(3);
    SMPosetO o = SMPosetO::from_quantale(a);
    enriched::EnrichedCat e = build_enh(o, constant_unit_functor(a, o));
    for (int h : e.hom) CHECK(a->eq(a->carrier_elem(h), a->one()));
  }
}

TEST_CASE("build_Enh structure") {
  SUBCASE("unit source: Enh is the target quantale") {
    auto a = CoeffSystem::tropical(3);
    SMPosetO o = unit_poset();
    LaxFunctorF f = constant_unit_functor(a, o);
    EnhResult r = build_Enh(o, f);
    CHECK(r.p.size() == a->carrier_size());
    // iota and epsilon are mutually inverse here.
    for (const auto& phi : r.p.elems) CHECK(r.iota(r.epsilon(phi)) == phi);
  }
  SUBCASE("hom between Yoneda images is F of the internal hom") {
    std::vector<std::pair<SMPosetO, LaxFunctorF>> instances;
    {
      auto a = CoeffSystem::tropical(2);
      SMPosetO o = SMPosetO::from_quantale(a);
      instances.push_back({o, identity_functor(a, o)});
    }
    {
      auto a = CoeffSystem::boolean_quantale();
      instances.push_back({z2_poset(), constant_unit_functor(a, z2_poset())});
    }
    for (const auto& [o, f] : instances) {
      EnhResult r = build_Enh(o, f);
      for (int i = 0; i < o.n(); ++i)
        for (int j = 0; j < o.n(); ++j)
          CHECK(enriched::hom_presheaf(r.enh, r.ulf[i], r.ulf[j]) == r.enh.at(i, j));
      // Evaluation-at-unit requirement: epsilon of a Yoneda image is F(o).
      for (int i = 0; i < o.n(); ++i) CHECK(r.epsilon(r.ulf[i]) == f.map[i]);
      // Day unit laws.
      for (const auto& phi : r.p.elems) {
        CHECK(r.day_tensor(r.day_unit, phi) == phi);
        CHECK(r.day_tensor(phi, r.day_unit) == phi);
      }
      // The Day unit is the Yoneda image of the monoidal unit.
      CHECK(r.day_unit == r.ulf[o.unit]);
    }
  }
}

TEST_CASE("strict-unital functors are fully faithful") {
  SUBCASE("strict instances pass") {
    auto a = CoeffSystem::tropical(2);
    SMPosetO o = SMPosetO::from_quantale(a);
    EnhResult r = build_Enh(o, identity_functor(a, o));
    FFReport rep = check_strict_unital_ff(r);
    CHECK(rep.strictly_unital);
    CHECK(rep.fully_faithful);
  }
  SUBCASE("a unit-inflating functor is reported") {
    auto a = chain3();
    SMPosetO o = unit_poset();
    LaxFunctorF f{a, {idx_of(a, "t")}};  // F(1) = top > unit
    f.validate(o);
    CHECK_FALSE(f.strictly_unital(o));
    EnhResult r = build_Enh(o, f);
    CHECK_FALSE(check_strict_unital_ff(r).strictly_unital);
  }
}

TEST_CASE("ambidexterity and collapse") {
  SUBCASE("the Z/2 group instance passes both") {
    auto a = CoeffSystem::boolean_quantale();
    EnhResult r = build_Enh(z2_poset(), constant_unit_functor(a, z2_poset()));
    AmbiReport amb = check_ambidexterity(r);
    CHECK(amb.pass);
    AmbiReport col = check_collapse(r);
    CHECK(col.pass);
  }
  SUBCASE("the unit instance passes") {
    auto a = CoeffSystem::tropical(2);
    EnhResult r = build_Enh(unit_poset(), constant_unit_functor(a, unit_poset()));
    CHECK(check_ambidexterity(r).pass);
    CHECK(check_collapse(r).pass);
  }
  SUBCASE("missing duals fail the precondition with a diagnostic") {
    auto a = CoeffSystem::boolean_quantale();
    SMPosetO o = SMPosetO::from_quantale(a);
    EnhResult r = build_Enh(o, identity_functor(a, o));
    AmbiReport amb = check_ambidexterity(r);
    CHECK_FALSE(amb.pass);
    CHECK_FALSE(amb.detail.empty());
  }
  SUBCASE("a non-strict-unital functor fails the precondition") {
    auto a = chain3();
    SMPosetO o = unit_poset();
    LaxFunctorF f{a, {idx_of(a, "t")}};
    f.validate(o);
    EnhResult r = build_Enh(o, f);
    CHECK_FALSE(check_ambidexterity(r).pass);
    CHECK_FALSE(check_collapse(r).pass);
  }
}

TEST_CASE("change of source") {
  auto a = CoeffSystem::boolean_quantale();
  SMPosetO z2 = z2_poset();
  EnhResult r2 = build_Enh(z2, constant_unit_functor(a, z2));
  SUBCASE("the identity is hom-preserving") {
    ChangeSourceResult res = change_source(r2, r2, {0, 1});
    CHECK(res.hom_preserving);
    for (size_t i = 0; i < res.image.size(); ++i) CHECK(res.image[i] == int(i));
  }
  SUBCASE("the unit inclusion is hom-preserving") {
    SMPosetO u = unit_poset();
    EnhResult r1 = build_Enh(u, constant_unit_functor(a, u));
    ChangeSourceResult res = change_source(r1, r2, {z2.unit});
    CHECK(res.hom_preserving);
  }
}

TEST_CASE("target insensitivity") {
  SUBCASE("strict unital instances coincide with their F(1)-reduction") {
    auto a = CoeffSystem::tropical(2);
    SMPosetO o = SMPosetO::from_quantale(a);
    CHECK(check_target_insensitivity(o, identity_functor(a, o)));
  }
  SUBCASE("unit source") {
    auto a = CoeffSystem::boolean_quantale();
    SMPosetO o = unit_poset();
    CHECK(check_target_insensitivity(o, constant_unit_functor(a, o)));
  }
  SUBCASE("an F with inflated unit still agrees after reduction") {
    auto a = chain3();
    SMPosetO o = unit_poset();
    LaxFunctorF f{a, {idx_of(a, "t")}};
    f.validate(o);
    CHECK(check_target_insensitivity(o, f));
  }
}
