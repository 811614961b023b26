#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fincat/sheafcalc.hpp"

namespace fincat::kernel {

using groupoid::GPtr;
using groupoid::GroupoidMap;
using sheaf::Bundle;
using sheaf::BundleMap;
using sheaf::Cochains;
using sheaf::Pushforward;

/// A kernel: a bundle on the product of its two feet, read as a 1-morphism
/// from the left foot to the right foot. Composition is left-to-right.
struct Kernel {
  GPtr y1, y2;
  Bundle payload;  // base = groupoid::product(y1, y2)

  static Kernel from_payload(GPtr y1, GPtr y2, Bundle payload);
  /// Discrete feet, stalk dimensions given as a matrix (trivial actions).
  static Kernel from_dims(GPtr y1, GPtr y2, const std::vector<std::vector<int>>& dims);
  int stalk(int a, int b) const;  // dimension at (a, b)
  Kernel zero_like() const;
};

/// A 2-morphism of kernels with common feet.
struct KernelMap {
  Kernel src, dst;
  BundleMap map;  // on payloads

  bool is_iso() const { return map.is_iso(); }
  KernelMap inverse() const;
};

KernelMap kernel_identity(const Kernel& k);
KernelMap kernel_compose(const KernelMap& a, const KernelMap& b);  // b after a
std::vector<KernelMap> kernel_hom(const Kernel& a, const Kernel& b);
std::optional<KernelMap> kernel_iso(const Kernel& a, const Kernel& b);

/// The monoidal unit on Y: the diagonal pushforward of the trivial line.
/// `labels[p][j]` is the group element h with h.b = a indexing coordinate j
/// of the stalk at product point p = (a, b).
struct IdKernel {
  Kernel k;
  Pushforward pres;
  std::vector<std::vector<int>> labels;
  int coord_of(int p, int h) const;  // index of a label in a stalk
};
IdKernel identity_kernel(const GPtr& y);

/// Composite of a chain K1: Y0 -> Y1, ..., Kn: Y(n-1) -> Yn computed as one
/// renormalized pushforward over the full product groupoid.
struct Chain {
  std::vector<Kernel> ks;
  std::vector<GPtr> feet;  // Y0..Yn
  GPtr big;                // product of all feet
  sheaf::BundleView tensor;  // ⊗ p_i^! (payload of Ki) on big, lazy
  GroupoidMap proj;        // big -> product(Y0, Yn)
  Pushforward push;
  Kernel result;
};
Chain make_chain(const std::vector<Kernel>& ks);

Kernel convolve(const Kernel& a, const Kernel& b);
/// Left fold of convolve.
Kernel conv_all(const std::vector<Kernel>& ks);

/// [K](V) = (p2)_▲(p1^! V ⊗^! K).
Bundle act(const Kernel& k, const Bundle& v);

/// V on Y as a kernel pt -> Y.
Kernel column_kernel(const Bundle& v);
/// Reads a bundle on product(point, Y) back on Y.
Bundle column_to_bundle(const Bundle& payload, const GPtr& y);

/// Canonical iso chain(ks) -> convolve(chain(ks[0..cut)), chain(ks[cut..n))).
/// Returned as the payload map; feet bookkeeping is the caller's.
BundleMap chain_split_iso(const std::vector<Kernel>& ks, int cut);
/// Canonical iso chain(ks).result -> conv_all(ks).
BundleMap normalize_iso(const std::vector<Kernel>& ks);

/// Unitors (isomorphisms; equivariance and invertibility asserted).
KernelMap left_unitor(const Kernel& k);   // conv(U_{Y1}, K) -> K
KernelMap right_unitor(const Kernel& k);  // conv(K, U_{Y2}) -> K
/// Associator conv(conv(A,B),C) -> conv(A, conv(B,C)).
KernelMap associator(const Kernel& a, const Kernel& b, const Kernel& c);

/// left ⋆ phi ⋆ right as a map of left-folded composites.
KernelMap whisker(const std::vector<Kernel>& left, const KernelMap& phi,
                  const std::vector<Kernel>& right);

Kernel swap_feet(const Kernel& k);

struct AdjointData {
  Kernel adjoint;   // K^R: Y2 -> Y1
  KernelMap unit;   // U_{Y1} -> K ⋆ K^R
  KernelMap counit; // K^R ⋆ K -> U_{Y2}
};
/// Transpose-feet Verdier dual with explicit unit/counit; absent (with a
/// diagnostic) when the triangle identities fail.
struct AdjointResult {
  std::optional<AdjointData> data;
  std::string diagnostic;
};
AdjointResult kernel_right_adjoint(const Kernel& k);

/// Hochschild-style trace through the diagonal: cochains(Y, Δ^! K).
struct TraceSpace {
  Kernel k;
  Bundle diag;  // Δ^! K on Y
  Cochains coch;
  int dim = 0;
  std::vector<std::string> labels;
};
TraceSpace trace_lt_ag(const Kernel& k);

/// Trace as the duality composite unit; id ⊗ [K]; counit. Computed on the
/// comma-reduced presentation of the composite (see notes in the tests):
/// cells (a, beta) with leg K(a, beta.a), invariants under two commuting
/// actions. `lt` is the canonical isomorphism from trace_lt_ag coordinates.
struct DualityTrace {
  Kernel k;
  std::vector<std::pair<int, int>> cells;  // (a, beta)
  std::vector<long> cell_offset;
  long ambient = 0;
  int dim = 0;
  std::vector<std::string> labels;
  QMat basis;  // ambient x dim
  QMat lt;     // trace_lt_ag -> this; invertible
};
DualityTrace trace_via_duality(const Kernel& k);

struct DualityData {
  GPtr y;
  IdKernel unit;
  // counit(K) is computed by trace_lt_ag (cochains of the diagonal
  // restriction); the zig-zag composite (counit ⊗ id) ∘ (id ⊗ unit) is
  // computed as an explicit kernel at construction, together with the
  // canonical contraction down to the unit kernel, which must be invertible.
  Kernel scomposite;
  KernelMap to_unit;
};
DualityData duality_data(const GPtr& y);

/// Map on diagonal traces induced by a 2-morphism between endokernels.
QMat trace_of_map(const TraceSpace& trs, const TraceSpace& trd, const KernelMap& phi);

/// Rotation isomorphism Tr(A ⋆ B) -> Tr(B ⋆ A).
QMat rotation_iso(const Kernel& a, const Kernel& b);

/// Tr(F1) -> Tr(F2) along H with alpha: F1 ⋆ H -> H ⋆ F2.
QMat trace_functoriality(const Kernel& h, const AdjointData& hadj, const Kernel& f1,
                         const Kernel& f2, const KernelMap& alpha);

/// cl(G, alpha) in trace_lt_ag(K) for alpha: G -> act(K, G).
QMat class_of(const Bundle& g, const std::vector<QMat>& alpha, const Kernel& k);

enum class BCSide { Left, Right };
struct BCResult {
  bool pass = false;
  std::string witness;
  std::optional<KernelMap> mate;
};
/// Square sigma: A ⋆ G -> F ⋆ B (A: Y1->Y2, G: Y2->Y4, F: Y1->Y3, B: Y3->Y4).
/// Right: mate F^R ⋆ A -> B ⋆ G^R from right adjoints of F and G.
/// Left: mate B ⋆ G^L -> F^L ⋆ A from the left-adjoint data (sigma inverted).
BCResult beck_chevalley_check(const Kernel& a, const Kernel& g, const Kernel& f,
                              const Kernel& b, const KernelMap& sigma, BCSide side);

}  // namespace fincat::kernel
