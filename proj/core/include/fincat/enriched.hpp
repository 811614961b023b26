#pragma once

#include <string>
#include <vector>

#include "fincat/coeff.hpp"

namespace fincat::enriched {

using coeff::CSPtr;

/// A quantale-enriched category on a finite flagging: a hom table of carrier
/// indices. Unit and composition are order properties, validated exhaustively.
struct EnrichedCat {
  CSPtr a;
  std::vector<std::string> objs;
  std::vector<int> hom;  // row-major, carrier indices of `a`

  int n() const { return int(objs.size()); }
  int at(int i, int j) const { return hom[size_t(i) * objs.size() + j]; }
};

/// Validates unit (1 <= Hom(s,s)) and composition
/// (Hom(b,c) (x) Hom(a,b) <= Hom(a,c)); throws std::invalid_argument with the
/// first violated inequality.
EnrichedCat validate_enriched_cat(const CSPtr& a, std::vector<std::string> objs,
                                  std::vector<int> hom);

/// Objects = carrier of A, Hom(a,b) = residuate(a,b).
EnrichedCat self_enrichment(const CSPtr& a);

/// Transpose of the hom table (commutative bases only, so no reverse tensor).
EnrichedCat opposite(const EnrichedCat& c);

/// A lax monoidal, monotone map of finite quantales, by carrier table.
struct LaxMap {
  CSPtr a1, a2;
  std::vector<int> map;

  void validate() const;  // monotone; F(a)F(b) <= F(ab); 1 <= F(1)
  int apply(int i) const { return map[i]; }
};

EnrichedCat change_enrichment(const LaxMap& f, const EnrichedCat& c);

/// s1 <= s2 iff 1_A <= Hom(s1, s2).
std::vector<std::vector<bool>> underlying_category(const EnrichedCat& c);

/// The finite set of admissible presheaves Phi: S -> A with
/// Phi(c2) (x) Hom(c1,c2) <= Phi(c1), as value vectors of carrier indices,
/// sorted lexicographically. Enumerated directly, or materialized as the
/// join-closure of the tensored representables when |A|^n exceeds the bound.
struct PresheafModule {
  EnrichedCat c;
  std::vector<std::vector<int>> elems;

  int size() const { return int(elems.size()); }
  bool admissible(const std::vector<int>& phi) const;
  int find(const std::vector<int>& phi) const;  // -1 if absent
  std::vector<int> join(const std::vector<int>& p, const std::vector<int>& q) const;
  std::vector<int> tensor(int a, const std::vector<int>& p) const;  // a (x) Phi
};

PresheafModule presheaves(const EnrichedCat& c, long bound = 1L << 16);
std::vector<int> yoneda(const EnrichedCat& c, int obj);  // Hom(-, obj)

/// uHom of presheaves: the meet over objects of residuate(f1(c), f2(c)).
int hom_presheaf(const EnrichedCat& c, const std::vector<int>& f1, const std::vector<int>& f2);

/// Meet in a finite quantale: the join of all common lower bounds.
int quantale_meet(const CSPtr& a, int x, int y);
int quantale_meet_all(const CSPtr& a, const std::vector<int>& xs);  // empty -> top

/// A finite module over a finite quantale: a join-semilattice with bottom and
/// a join-preserving action, by tables over carrier indices.
struct QuantaleModule {
  CSPtr a;
  std::vector<std::string> labels;
  std::vector<std::vector<int>> join;  // M x M
  std::vector<std::vector<int>> act;   // act[a][m]
  int bottom = 0;

  int size() const { return int(labels.size()); }
  void validate() const;  // lattice + action laws, exhaustive
  bool leq(int x, int y) const { return join[x][y] == y; }
  int join_all(const std::vector<int>& xs) const;  // empty -> bottom
  int meet_all(const std::vector<int>& xs) const;  // empty -> top
  /// Largest m' with a (x) m' <= m.
  int cotensor(int a_idx, int m) const;
  /// A-valued hom: largest a with a (x) m1 <= m2.
  int uhom(int m1, int m2) const;
};

QuantaleModule module_from_quantale(const CSPtr& a);
QuantaleModule module_from_presheaves(const PresheafModule& p);

/// Weighted limit (covariant weight, meet of cotensors) and colimit
/// (contravariant weight, join of tensors). Functoriality of the weight and
/// the diagram is validated; throws std::invalid_argument on failure.
int weighted_limit(const EnrichedCat& c, const std::vector<int>& w, const QuantaleModule& m,
                   const std::vector<int>& phi);
int weighted_colimit(const EnrichedCat& c, const std::vector<int>& w, const QuantaleModule& m,
                     const std::vector<int>& phi);

/// Bousfield-Kan term: BK_n(Psi)(x) = join over chains (c0..cn) of
/// Hom(x,c0) (x) Hom(c0,c1) (x) ... (x) Psi(cn), for n in {0,1,2}.
std::vector<int> bk_term(const EnrichedCat& c, const std::vector<int>& psi, int n);
/// The realization of the BK resolution (its coequalizer) equals Psi.
bool bk_reconstruct(const EnrichedCat& c, const std::vector<int>& psi);

/// Whether a |-> a (x) m admits a join-preserving, action-compatible right
/// adjoint (uhom(m, -) preserves bottom, joins and the action).
bool totally_compact_check(const QuantaleModule& m, int elem);

}  // namespace fincat::enriched
