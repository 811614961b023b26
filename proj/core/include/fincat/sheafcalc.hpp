#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fincat/coeff.hpp"
#include "fincat/groupoid.hpp"
#include "fincat/qmat.hpp"

namespace fincat::sheaf {

using coeff::CSPtr;
using groupoid::GPtr;
using groupoid::GroupoidMap;
using groupoid::GroupPtr;

/// A coefficient-valued function on the component set of a groupoid.
struct Fn0 {
  GPtr base;
  CSPtr cs;
  std::vector<groupoid::OrbitInfo> components;
  std::vector<coeff::Coeff> values;  // one per component

  std::string str() const;
  bool same_as(const Fn0& o) const;
};

/// Mixed-radix index helpers for carriers of groupoid::product().
int prod_index(const std::vector<GPtr>& factors, const std::vector<int>& xs);
std::vector<int> prod_split(const std::vector<GPtr>& factors, int x);

/// An equivariant vector bundle on an action groupoid: a stalk V_x per
/// carrier point and exact rational matrices rho[g][x]: V_x -> V_{g.x}
/// satisfying the cocycle law.
struct Bundle {
  GPtr base;
  std::vector<int> dims;
  std::vector<std::vector<std::string>> basis;  // per point, size dims[x]
  std::vector<std::vector<QMat>> rho;           // rho[g][x]

  static Bundle trivial(GPtr y, int dim = 1);
  static Bundle from_action(GPtr y, std::vector<int> dims,
                            const std::function<QMat(int, int)>& act);
  /// Completes per-generator matrices to the whole group by breadth-first
  /// words and validates the cocycle exhaustively.
  static Bundle from_generators(GPtr y, std::vector<int> dims,
                                const std::vector<int>& gens,
                                const std::vector<std::vector<QMat>>& gen_mats);
  /// The regular representation Q[G] on pt//G (basis labeled by G).
  static Bundle regular_rep(GroupPtr g);

  int dim(int x) const { return dims[x]; }
  long total_dim() const;
  long ambient_offset(int x) const;  // offset of V_x inside ⊕_x V_x
  void validate() const;             // exhaustive cocycle check
  bool same_shape(const Bundle& o) const;
};

Bundle direct_sum(const Bundle& a, const Bundle& b);

/// A bundle presented by an accessor instead of materialized tables. Used for
/// tensor products over large auxiliary groupoids where only a few (g, x)
/// pairs are ever touched. `view(bundle)` wraps a materialized bundle;
/// `memoized` caches accessor results.
struct BundleView {
  GPtr base;
  std::vector<int> dims;
  std::function<QMat(int, int)> rho;

  int dim(int x) const { return dims[x]; }
  long total_dim() const;
};
BundleView view(const Bundle& b);
BundleView memoized(BundleView v);

/// A per-point matrix family commuting with the two actions.
struct BundleMap {
  Bundle src, dst;
  std::vector<QMat> mats;

  void validate() const;  // equivariance on generators (sufficient) + shapes
  bool is_iso() const;
  BundleMap inverse() const;
};

BundleMap identity_map(const Bundle& v);
BundleMap compose(const BundleMap& a, const BundleMap& b);  // b after a

/// Basis of the space of bundle maps v -> w (equivariant families).
std::vector<BundleMap> hom_space(const Bundle& v, const Bundle& w);
/// Searches hom_space for an invertible element (deterministic).
std::optional<BundleMap> find_iso(const Bundle& v, const Bundle& w);

Bundle pullback_shriek(const GroupoidMap& f, const Bundle& w);

/// One comma object over a stalk: a carrier point of dom(f) plus an arrow
/// h in the codomain group. For the right Kan extension the fiber over y is
/// {(x,h): h.y = u(x)}; for the left Kan extension {(x,h): h.u(x) = y}.
struct CommaObj {
  int x, h;
  bool operator<(const CommaObj& o) const { return x != o.x ? x < o.x : h < o.h; }
  bool operator==(const CommaObj& o) const { return x == o.x && h == o.h; }
};

/// Per-stalk presentation of a pushforward: comma fiber, its orbit
/// decomposition under the domain group, and a deterministic basis.
struct StalkPres {
  std::vector<CommaObj> objs;  // sorted
  std::vector<int> rep_of;     // per obj: index into reps
  std::vector<int> transport;  // per obj: g with g.(rep) = obj
  std::vector<int> reps;       // obj indices, ascending
  std::vector<QMat> inv_basis; // star: invariant basis of V_{x_rep} under Stab;
                               // bang: chosen lifts of the coinvariant basis
  std::vector<QMat> proj;      // bang only: V_{x_rep} -> coinvariant coordinates
  int dim = 0;

  int find(const CommaObj& o) const;
};

struct Pushforward {
  GroupoidMap f;
  BundleView v;   // input, on dom
  bool star = true;
  Bundle bundle;  // output, on cod
  std::vector<StalkPres> stalks;

  /// Star: value columns of the sections with the given stalk coordinates
  /// at one comma object.
  QMat expand(int y, int obj, const QMat& coords) const;
  /// Star: coordinates from values at the orbit representatives
  /// (columns = several sections at once). Throws if not a section.
  QMat coords_from_rep_values(int y, const std::vector<QMat>& rep_values) const;
  /// Star: coordinates from a full value tuple; verifies compatibility.
  QMat coords_from_values(int y, const std::vector<QMat>& values) const;
  /// Bang: coordinates of the class of a value at one comma object.
  QMat classof(int y, int obj, const QMat& value) const;
};

Pushforward pushforward_star(const GroupoidMap& f, const Bundle& v);
Pushforward pushforward_bang(const GroupoidMap& f, const Bundle& v);
Pushforward pushforward_triangle(const GroupoidMap& f, const Bundle& v);
Pushforward pushforward_star(const GroupoidMap& f, const BundleView& v);
Pushforward pushforward_bang(const GroupoidMap& f, const BundleView& v);

/// The canonical norm comparison f_! V -> f_* V (iso over the rationals).
BundleMap norm_map(const GroupoidMap& f, const Bundle& v);
BundleMap norm_map(const Pushforward& bang, const Pushforward& star);

/// Level-0 norm matrix from the coinvariants presentation to the invariants
/// presentation of Fn0; diagonal entry |Stab(rep)|*1 per component.
std::pair<coeff::Matrix, bool> omega_map(const GPtr& y, const CSPtr& cs);

Bundle external_product(const Bundle& v1, const Bundle& v2);
Bundle tensor_shriek(const Bundle& v, const Bundle& w);
Bundle verdier_dual(const Bundle& v);

/// Invariant global sections: pushforward to the point with the ambient
/// inclusion ⊕_x V_x made explicit.
struct Cochains {
  Pushforward push;
  int dim = 0;
  std::vector<std::string> labels;
  QMat basis;  // total_dim(v) x dim
  QMat coords(const QMat& ambient) const;  // throws if not in the span
  Bundle v;
};
Cochains cochains_triangle(const GPtr& y, const Bundle& v);

struct CheckResult {
  bool pass = true;
  std::string witness;
};

/// Base change around the iso-comma square of (f, g) on a bundle over dom(f):
/// compares g^! f_* with pi2_* pi1^! through the canonical map.
CheckResult base_change_check(const GroupoidMap& f, const GroupoidMap& g, const Bundle& v);
/// f_*(V) ⊗ W  vs  f_*(V ⊗ f^! W) through the canonical map.
CheckResult projection_formula_check(const GroupoidMap& f, const Bundle& v, const Bundle& w);

/// Unit / counit of the pullback ⊣ pushforward_star adjunction.
BundleMap star_unit(const GroupoidMap& f, const Bundle& w);   // W -> f_* f^! W
BundleMap star_counit(const GroupoidMap& f, const Bundle& v); // f^! f_* V -> V
/// Adjunct of phi: f^! W -> V across the adjunction, as a map W -> f_* V.
BundleMap star_adjunct(const GroupoidMap& f, const Bundle& w, const Pushforward& fv,
                       const std::vector<QMat>& phi);
/// Canonical isomorphism (g∘f)_* V -> g_* (f_* V).
BundleMap compose_star_iso(const GroupoidMap& f, const GroupoidMap& g, const Bundle& v);

}  // namespace fincat::sheaf
