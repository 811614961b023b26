#pragma once

#include <string>
#include <vector>

#include "fincat/kernelcalc.hpp"

namespace fincat::frob {

using groupoid::GPtr;
using groupoid::GroupoidMap;
using sheaf::Bundle;
using sheaf::Fn0;

/// A Weil structure: a bundle V on Y, an automorphism F of Y, and an
/// equivariant comparison alpha: F^! V -> V given per point.
struct WeilSheaf {
  Bundle v;
  GroupoidMap f;            // endomorphism of v.base; must be invertible
  std::vector<QMat> alpha;  // alpha[x]: V_{u(x)} -> V_x

  /// Base/shape agreement, F invertible, alpha equivariant (exhaustive).
  void validate() const;
};

/// The kernel of the correspondence Y <-id- Y -F-> Y: the pushforward of the
/// trivial line along the graph of F, with explicit stalk labels.
/// labels[p][j] is the group element m with m.b = u_F(a) for p = (a, b).
struct FrobKernel {
  kernel::Kernel k;
  GroupoidMap f;
  sheaf::Pushforward pres;
  std::vector<std::vector<int>> labels;
  int coord_of(int p, int m) const;
};
FrobKernel frobenius_kernel(const GPtr& y, const GroupoidMap& f);

/// The diagonal trace of the Frobenius kernel with each basis vector matched
/// to a component of the twisted fixed-point groupoid.
struct FrobTrace {
  FrobKernel fk;
  kernel::TraceSpace tr;
  groupoid::TwistedFixedPoints tfp;
  std::vector<groupoid::OrbitInfo> classes;  // components of tfp.groupoid
  int dim = 0;
  std::vector<int> class_of_basis;  // basis column -> class index (a bijection)
  std::vector<std::string> labels;  // per basis column, its class label
};
FrobTrace tr_frob(const GPtr& y, const GroupoidMap& f);

/// The trace-of-Frobenius function: value at the class of a twisted fixed
/// point (x, g) is tr(alpha_x . rho(g)^{-1}); constancy on components is
/// asserted.
Fn0 sfunct(const WeilSheaf& w);

/// Expresses a trace vector in the fixed-point-labeled basis by evaluating
/// the corresponding invariant diagonal section at one cell per class.
Fn0 lt_naive(const FrobTrace& t, const QMat& vec);

/// Characteristic class of a Weil sheaf, as a vector in tr_frob coordinates
/// (the trace_lt_ag basis of the Frobenius kernel).
QMat cl_weil(const WeilSheaf& w, const FrobTrace& t);
QMat cl_weil(const WeilSheaf& w);

/// Pointwise operations on Weil structures over a common (Y, F).
WeilSheaf weil_tensor(const WeilSheaf& a, const WeilSheaf& b);
WeilSheaf weil_sum(const WeilSheaf& a, const WeilSheaf& b);

/// Pushforward of a Weil structure along a same-group map p with theta = id,
/// intertwining the Frobenii (fz . p = p . f).
WeilSheaf weil_pushforward(const WeilSheaf& w, const GroupoidMap& p, const GroupoidMap& fz);

}  // namespace fincat::frob
