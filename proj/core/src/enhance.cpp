#include "fincat/enhance.hpp"

#include <algorithm>
#include <stdexcept>

namespace fincat::enhance {

using coeff::Coeff;

namespace {

int cmul(const CSPtr& a, int x, int y) {
  return a->mul(a->carrier_elem(x), a->carrier_elem(y)).idx;
}
int cadd(const CSPtr& a, int x, int y) {
  return a->add(a->carrier_elem(x), a->carrier_elem(y)).idx;
}
bool cleq(const CSPtr& a, int x, int y) {
  return a->leq(a->carrier_elem(x), a->carrier_elem(y));
}
int cres(const CSPtr& a, int x, int y) {
  return a->residuate(a->carrier_elem(x), a->carrier_elem(y)).idx;
}

}  // namespace

void SMPosetO::validate() const {
  int m = n();
  if (int(leq.size()) != m || int(tensor.size()) != m || int(ihom.size()) != m ||
      int(dual.size()) != m || unit < 0 || unit >= m)
    throw std::invalid_argument("sm poset: table sizes are wrong");
  for (int x = 0; x < m; ++x) {
    if (!leq[x][x]) throw std::invalid_argument("sm poset: order not reflexive");
    for (int y = 0; y < m; ++y) {
      if (x != y && leq[x][y] && leq[y][x])
        throw std::invalid_argument("sm poset: order not antisymmetric");
      for (int z = 0; z < m; ++z)
        if (leq[x][y] && leq[y][z] && !leq[x][z])
          throw std::invalid_argument("sm poset: order not transitive");
    }
  }
  for (int x = 0; x < m; ++x) {
    if (tensor[x][unit] != x || tensor[unit][x] != x)
      throw std::invalid_argument("sm poset: unit law violated");
    for (int y = 0; y < m; ++y) {
      if (tensor[x][y] != tensor[y][x])
        throw std::invalid_argument("sm poset: tensor not symmetric");
      for (int z = 0; z < m; ++z) {
        if (tensor[tensor[x][y]][z] != tensor[x][tensor[y][z]])
          throw std::invalid_argument("sm poset: tensor not associative");
        // Monotonicity in the first variable (symmetry covers the second).
        if (leq[x][y] && !leq[tensor[x][z]][tensor[y][z]])
          throw std::invalid_argument("sm poset: tensor not monotone");
      }
    }
  }
  for (int x = 0; x < m; ++x)
    for (int y = 0; y < m; ++y)
      for (int c = 0; c < m; ++c)
        if (leq[tensor[c][x]][y] != leq[c][ihom[x][y]])
          throw std::invalid_argument("sm poset: tensor-hom adjunction violated");
  for (int x = 0; x < m; ++x) {
    if (dual[x] < 0) continue;
    if (dual[x] >= m) throw std::invalid_argument("sm poset: dual index out of range");
    if (!leq[tensor[x][dual[x]]][unit] || !leq[unit][tensor[dual[x]][x]])
      throw std::invalid_argument("sm poset: dual inequalities violated at " + objs[x]);
  }
}

bool SMPosetO::has_all_duals() const {
  for (int d : dual)
    if (d < 0) return false;
  return true;
}

SMPosetO SMPosetO::from_quantale(const CSPtr& a) {
  if (!a->is_quantale()) throw std::invalid_argument("from_quantale: needs a finite quantale");
  SMPosetO o;
  int k = a->carrier_size();
  for (int i = 0; i < k; ++i) o.objs.push_back(a->str(a->carrier_elem(i)));
  o.leq.assign(k, std::vector<bool>(k));
  o.tensor.assign(k, std::vector<int>(k));
  o.ihom.assign(k, std::vector<int>(k));
  o.dual.assign(k, -1);
  o.unit = a->one().idx;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      o.leq[i][j] = cleq(a, i, j);
      o.tensor[i][j] = cmul(a, i, j);
      o.ihom[i][j] = cres(a, i, j);
    }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (o.tensor[i][j] == o.unit) o.dual[i] = j;
  o.validate();
  return o;
}

void LaxFunctorF::validate(const SMPosetO& o) const {
  if (!a || !a->is_quantale()) throw std::invalid_argument("lax functor: needs a quantale target");
  if (int(map.size()) != o.n()) throw std::invalid_argument("lax functor: table size is wrong");
  for (int x = 0; x < o.n(); ++x)
    for (int y = 0; y < o.n(); ++y) {
      if (o.leq[x][y] && !cleq(a, map[x], map[y]))
        throw std::invalid_argument("lax functor: not monotone");
      if (!cleq(a, cmul(a, map[x], map[y]), map[o.tensor[x][y]]))
        throw std::invalid_argument("lax functor: lax multiplicativity violated");
    }
  if (!cleq(a, a->one().idx, map[o.unit]))
    throw std::invalid_argument("lax functor: unit witness violated");
}

bool LaxFunctorF::strictly_unital(const SMPosetO& o) const {
  return map[o.unit] == a->one().idx;
}

bool LaxFunctorF::strict(const SMPosetO& o) const {
  if (!strictly_unital(o)) return false;
  for (int x = 0; x < o.n(); ++x)
    for (int y = 0; y < o.n(); ++y)
      if (cmul(a, map[x], map[y]) != map[o.tensor[x][y]]) return false;
  return true;
}

EnrichedCat build_enh(const SMPosetO& o, const LaxFunctorF& f) {
  o.validate();
  f.validate(o);
  std::vector<int> hom;
  for (int x = 0; x < o.n(); ++x)
    for (int y = 0; y < o.n(); ++y) hom.push_back(f.map[o.ihom[x][y]]);
  return enriched::validate_enriched_cat(f.a, o.objs, std::move(hom));
}

std::vector<int> EnhResult::iota(int v) const { return p.tensor(v, day_unit); }

int EnhResult::epsilon(const std::vector<int>& phi) const { return phi[o.unit]; }

std::vector<int> EnhResult::day_tensor(const std::vector<int>& p1,
                                       const std::vector<int>& p2) const {
  const CSPtr& a = f.a;
  int m = o.n();
  std::vector<int> out(m, a->zero().idx);
  for (int x = 0; x < m; ++x)
    for (int o1 = 0; o1 < m; ++o1)
      for (int o2 = 0; o2 < m; ++o2)
        out[x] = cadd(a, out[x],
                      cmul(a, enh.at(x, o.tensor[o1][o2]), cmul(a, p1[o1], p2[o2])));
  return out;
}

EnhResult build_Enh(const SMPosetO& o, const LaxFunctorF& f, long bound) {
  EnhResult r;
  r.o = o;
  r.f = f;
  r.enh = build_enh(o, f);
  r.p = enriched::presheaves(r.enh, bound);
  for (int x = 0; x < o.n(); ++x) r.ulf.push_back(enriched::yoneda(r.enh, x));
  r.day_unit = r.ulf[o.unit];
  // epsilon(ulF(o)) = Hom(1, o) = F([1, o]) = F(o): asserted at construction.
  for (int x = 0; x < o.n(); ++x)
    if (r.epsilon(r.ulf[x]) != f.map[x])
      throw std::logic_error("build_Enh: epsilon . ulF differs from F");
  for (const auto& u : r.ulf)
    if (r.p.find(u) < 0) throw std::logic_error("build_Enh: representable missing from module");
  return r;
}

FFReport check_strict_unital_ff(const EnhResult& r) {
  FFReport rep;
  rep.strictly_unital = r.f.strictly_unital(r.o);
  rep.fully_faithful = true;
  const CSPtr& a = r.f.a;
  for (int v = 0; v < a->carrier_size() && rep.fully_faithful; ++v)
    for (int w = 0; w < a->carrier_size(); ++w)
      if (enriched::hom_presheaf(r.enh, r.iota(v), r.iota(w)) != cres(a, v, w)) {
        rep.fully_faithful = false;
        break;
      }
  return rep;
}

AmbiReport check_ambidexterity(const EnhResult& r) {
  const CSPtr& a = r.f.a;
  if (!r.o.has_all_duals()) return {false, "condition (1) fails: an object has no dual"};
  if (!r.f.strictly_unital(r.o)) return {false, "condition (2) fails: F is not strictly unital"};
  for (int x = 0; x < r.o.n(); ++x)
    if (cmul(a, r.f.map[x], r.f.map[r.o.dual[x]]) != a->one().idx)
      return {false, "condition (3) fails (strict reading F(o)F(o^v) = 1) at " + r.o.objs[x]};
  for (const auto& phi : r.p.elems)
    for (int v = 0; v < a->carrier_size(); ++v) {
      if (enriched::hom_presheaf(r.enh, r.iota(v), phi) != cres(a, v, r.epsilon(phi)))
        return {false, "i -| e hom comparison fails"};
      if (enriched::hom_presheaf(r.enh, phi, r.iota(v)) != cres(a, r.epsilon(phi), v))
        return {false, "e -| i hom comparison fails"};
    }
  return {true, "conditions (1)-(3) hold, strict reading of (3); both adjunctions verified"};
}

AmbiReport check_collapse(const EnhResult& r) {
  const CSPtr& a = r.f.a;
  if (!r.o.has_all_duals()) return {false, "precondition fails: an object has no dual"};
  if (!r.f.strict(r.o)) return {false, "precondition fails: F is not strict monoidal"};
  for (int v = 0; v < a->carrier_size(); ++v)
    if (r.epsilon(r.iota(v)) != v) return {false, "epsilon . iota is not the identity"};
  for (const auto& phi : r.p.elems)
    if (r.iota(r.epsilon(phi)) != phi) return {false, "iota . epsilon is not the identity"};
  return {true, "iota and epsilon are mutually inverse"};
}

ChangeSourceResult change_source(const EnhResult& r1, const EnhResult& r2,
                                 const std::vector<int>& phi_obj) {
  const CSPtr& a = r1.f.a;
  if (r2.f.a->variant() != a->variant())
    throw std::invalid_argument("change_source: target quantales differ");
  if (int(phi_obj.size()) != r1.o.n())
    throw std::invalid_argument("change_source: object map size is wrong");
  for (int x = 0; x < r1.o.n(); ++x) {
    if (phi_obj[x] < 0 || phi_obj[x] >= r2.o.n())
      throw std::invalid_argument("change_source: object map out of range");
    for (int y = 0; y < r1.o.n(); ++y) {
      if (r1.o.leq[x][y] && !r2.o.leq[phi_obj[x]][phi_obj[y]])
        throw std::invalid_argument("change_source: object map not monotone");
      if (phi_obj[r1.o.tensor[x][y]] != r2.o.tensor[phi_obj[x]][phi_obj[y]])
        throw std::invalid_argument("change_source: object map not monoidal");
    }
  }
  if (phi_obj[r1.o.unit] != r2.o.unit)
    throw std::invalid_argument("change_source: object map not unital");
  for (int x = 0; x < r1.o.n(); ++x)
    if (!cleq(a, r1.f.map[x], r2.f.map[phi_obj[x]]))
      throw std::invalid_argument("change_source: transformation F1 <= F2.phi violated");

  ChangeSourceResult out;
  // Left Kan along the hom transport: (Lan Psi)(o2) = join over o1 of
  // Hom_2(o2, phi(o1)) (x) Psi(o1).
  auto lan = [&](const std::vector<int>& psi) {
    std::vector<int> img(r2.o.n(), a->zero().idx);
    for (int o2 = 0; o2 < r2.o.n(); ++o2)
      for (int o1 = 0; o1 < r1.o.n(); ++o1)
        img[o2] = cadd(a, img[o2], cmul(a, r2.enh.at(o2, phi_obj[o1]), psi[o1]));
    return img;
  };
  for (const auto& psi : r1.p.elems) {
    int idx = r2.p.find(lan(psi));
    if (idx < 0) throw std::logic_error("change_source: image is not a presheaf");
    out.image.push_back(idx);
  }
  out.hom_preserving = true;
  for (size_t i = 0; i < r1.p.elems.size() && out.hom_preserving; ++i)
    for (size_t j = 0; j < r1.p.elems.size(); ++j)
      if (enriched::hom_presheaf(r1.enh, r1.p.elems[i], r1.p.elems[j]) !=
          enriched::hom_presheaf(r2.enh, r2.p.elems[out.image[i]], r2.p.elems[out.image[j]])) {
        out.hom_preserving = false;
        break;
      }
  return out;
}

bool check_target_insensitivity(const SMPosetO& o, const LaxFunctorF& f, long bound) {
  o.validate();
  f.validate(o);
  const CSPtr& a = f.a;
  int r = f.map[o.unit];
  // F(1)-mod inside A: the r-closed elements (r is idempotent and >= 1).
  std::vector<int> sub;
  for (int x = 0; x < a->carrier_size(); ++x)
    if (cmul(a, r, x) == x) sub.push_back(x);
  std::vector<int> pos(a->carrier_size(), -1);
  for (size_t i = 0; i < sub.size(); ++i) pos[sub[i]] = int(i);
  int k = int(sub.size());
  std::vector<std::string> labels;
  std::vector<std::vector<int>> join(k, std::vector<int>(k)), tens(k, std::vector<int>(k));
  for (int i = 0; i < k; ++i) {
    labels.push_back(a->str(a->carrier_elem(sub[i])));
    for (int j = 0; j < k; ++j) {
      join[i][j] = pos[cadd(a, sub[i], sub[j])];
      tens[i][j] = pos[cmul(a, sub[i], sub[j])];
      if (join[i][j] < 0 || tens[i][j] < 0)
        throw std::logic_error("target insensitivity: F(1)-closed elements not closed");
    }
  }
  CSPtr amod = coeff::CoeffSystem::finite_lattice(labels, join, tens, pos[r]);

  LaxFunctorF fmod;
  fmod.a = amod;
  for (int x = 0; x < o.n(); ++x) {
    if (pos[f.map[x]] < 0) throw std::logic_error("target insensitivity: F(o) not F(1)-closed");
    fmod.map.push_back(pos[f.map[x]]);
  }
  EnhResult big = build_Enh(o, f, bound);
  EnhResult small = build_Enh(o, fmod, bound);

  // The canonical comparison sends an F(1)-mod-valued presheaf to itself.
  if (big.p.elems.size() != small.p.elems.size()) return false;
  std::vector<std::vector<int>> mapped;
  for (const auto& e : small.p.elems) {
    std::vector<int> v;
    for (int x : e) v.push_back(sub[x]);
    mapped.push_back(std::move(v));
  }
  std::sort(mapped.begin(), mapped.end());
  if (mapped != big.p.elems) return false;
  // Hom-preserving on representables (enriched Yoneda on both sides).
  for (int x = 0; x < o.n(); ++x)
    for (int y = 0; y < o.n(); ++y) {
      int hsmall = enriched::hom_presheaf(small.enh, small.ulf[x], small.ulf[y]);
      int hbig = enriched::hom_presheaf(big.enh, big.ulf[x], big.ulf[y]);
      if (sub[hsmall] != hbig) return false;
    }
  return true;
}

}  // namespace fincat::enhance
