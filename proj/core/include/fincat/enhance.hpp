#pragma once

#include <string>
#include <vector>

#include "fincat/enriched.hpp"

namespace fincat::enhance {

using coeff::CSPtr;
using enriched::EnrichedCat;
using enriched::PresheafModule;

/// A finite closed symmetric monoidal poset given by tables, with optional
/// duals per object.
struct SMPosetO {
  std::vector<std::string> objs;
  std::vector<std::vector<bool>> leq;
  std::vector<std::vector<int>> tensor;
  int unit = 0;
  std::vector<std::vector<int>> ihom;
  std::vector<int> dual;  // -1 when absent

  int n() const { return int(objs.size()); }
  /// Order axioms, monoidal laws, the tensor-hom adjunction, and the dual
  /// inequalities (exhaustive); throws std::invalid_argument with a witness.
  void validate() const;
  bool has_all_duals() const;
  /// A finite quantale viewed as an SM poset (every object gets a dual only
  /// when it is invertible).
  static SMPosetO from_quantale(const CSPtr& a);
};

/// A right-lax symmetric monoidal, monotone map from an SM poset into a
/// finite quantale: F(a) (x) F(b) <= F(a (x) b) and 1 <= F(1).
struct LaxFunctorF {
  CSPtr a;
  std::vector<int> map;  // per object of O, carrier index of A

  void validate(const SMPosetO& o) const;
  bool strictly_unital(const SMPosetO& o) const;  // F(1_O) = 1_A
  bool strict(const SMPosetO& o) const;           // all lax witnesses equalities
};

/// enh(O, F) together with its presheaf module and the (iota, epsilon) pair.
struct EnhResult {
  SMPosetO o;
  LaxFunctorF f;
  EnrichedCat enh;           // Hom(o1,o2) = F([o1,o2])
  PresheafModule p;
  std::vector<std::vector<int>> ulf;  // per object, its Yoneda image
  std::vector<int> day_unit;          // Yon(1_O)

  std::vector<int> iota(int v) const;               // v (x) Day unit
  int epsilon(const std::vector<int>& phi) const;   // evaluation at 1_O
  std::vector<int> day_tensor(const std::vector<int>& p1, const std::vector<int>& p2) const;
};

EnrichedCat build_enh(const SMPosetO& o, const LaxFunctorF& f);
EnhResult build_Enh(const SMPosetO& o, const LaxFunctorF& f, long bound = 1L << 16);

struct FFReport {
  bool strictly_unital = false;
  bool fully_faithful = false;  // iota hom-preserving
};
FFReport check_strict_unital_ff(const EnhResult& r);

struct AmbiReport {
  bool pass = false;
  std::string detail;  // which of conditions (1)-(3) failed, or the reading used
};
/// Both adjunctions i -| e and e -| i, verified by exhaustive hom comparison
/// under conditions (1) duals, (2) strict unitality, (3) F(o) (x) F(o^v) = 1.
AmbiReport check_ambidexterity(const EnhResult& r);
/// iota and epsilon mutually inverse; preconditions duals + strict F.
AmbiReport check_collapse(const EnhResult& r);

struct ChangeSourceResult {
  std::vector<int> image;      // per element index of r1.p, element index in r2.p
  bool hom_preserving = false;
};
/// Induced map Enh1 -> Enh2 along a symmetric monoidal object map phi with
/// F1 <= F2 . phi, as a left Kan extension over the hom transport.
ChangeSourceResult change_source(const EnhResult& r1, const EnhResult& r2,
                                 const std::vector<int>& phi_obj);

/// Enh(O, F(1)-mod) vs Enh(O, A): the sub-quantale of F(1)-closed elements
/// carries an identical presheaf module; checks the canonical comparison.
bool check_target_insensitivity(const SMPosetO& o, const LaxFunctorF& f, long bound = 1L << 16);

}  // namespace fincat::enhance
