#pragma once

// Shared deterministic generators for the test corpora.

#include <random>
#include <string>
#include <vector>

#include "fincat/coeff.hpp"
#include "fincat/groupoid.hpp"
#include "fincat/kernelcalc.hpp"
#include "fincat/sheafcalc.hpp"

namespace testutil {

using namespace fincat;
using groupoid::GPtr;
using groupoid::GroupoidMap;
using groupoid::GroupPtr;

using Rng = std::mt19937_64;

inline long rnd(Rng& r, long lo, long hi) { return lo + long(r() % (unsigned long long)(hi - lo + 1)); }

inline GPtr discrete(int n, const std::string& prefix = "p") {
  std::vector<std::string> v;
  for (int i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i));
  return groupoid::FinGroupoid::discrete(v);
}

/// A pool of small groups of order <= 8.
inline std::vector<GroupPtr> group_pool() {
  using groupoid::FinGroup;
  return {FinGroup::trivial(),
          FinGroup::cyclic(2),
          FinGroup::cyclic(3),
          FinGroup::cyclic(4),
          FinGroup::symmetric(3),
          FinGroup::direct_product({FinGroup::cyclic(2), FinGroup::cyclic(2)}),
          FinGroup::cyclic(8)};
}

/// G acting on itself by left translation.
inline GPtr regular_groupoid(const GroupPtr& g) {
  std::vector<std::string> carrier;
  for (long x = 0; x < g->size(); ++x) carrier.push_back("x" + std::to_string(x));
  std::vector<std::vector<int>> action(g->size(), std::vector<int>(g->size()));
  for (long a = 0; a < g->size(); ++a)
    for (long x = 0; x < g->size(); ++x) action[a][x] = g->mul(int(a), int(x));
  return std::make_shared<groupoid::FinGroupoid>(carrier, g, action);
}

/// Z/n rotating Z/m points (m must divide n).
inline GPtr cyclic_rotation(int n, int m) {
  auto g = groupoid::FinGroup::cyclic(n);
  std::vector<std::string> carrier;
  for (int x = 0; x < m; ++x) carrier.push_back("p" + std::to_string(x));
  std::vector<std::vector<int>> action(n, std::vector<int>(m));
  for (int a = 0; a < n; ++a)
    for (int x = 0; x < m; ++x) action[a][x] = (x + a) % m;
  return std::make_shared<groupoid::FinGroupoid>(carrier, g, action);
}

/// A deterministic pool of groupoids with |G| <= 8 and small carriers.
inline std::vector<GPtr> groupoid_pool() {
  std::vector<GPtr> out;
  out.push_back(discrete(1));
  out.push_back(discrete(3));
  out.push_back(groupoid::FinGroupoid::one_point(groupoid::FinGroup::cyclic(2)));
  out.push_back(groupoid::FinGroupoid::one_point(groupoid::FinGroup::cyclic(3)));
  out.push_back(groupoid::FinGroupoid::one_point(groupoid::FinGroup::symmetric(3)));
  out.push_back(groupoid::FinGroupoid::one_point(
      groupoid::FinGroup::direct_product({groupoid::FinGroup::cyclic(2), groupoid::FinGroup::cyclic(2)})));
  out.push_back(cyclic_rotation(2, 2));
  out.push_back(cyclic_rotation(4, 2));
  out.push_back(cyclic_rotation(6, 3));
  return out;
}

/// The unique map to the one-point trivial groupoid.
inline GroupoidMap to_point(const GPtr& y) {
  GroupoidMap f;
  f.dom = y;
  f.cod = groupoid::FinGroupoid::point();
  f.theta.assign(y->group()->size(), 0);
  f.obj.assign(y->size(), 0);
  f.validate();
  return f;
}

/// A representation of G made from the regular representation conjugated by a
/// deterministic invertible matrix, placed on every stalk of Y (dims |G|).
inline sheaf::Bundle conjugated_regular_bundle(const GPtr& y, Rng& r) {
  const GroupPtr& g = y->group();
  int n = int(g->size());
  QMat t(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t.at(i, j) = Rat(rnd(r, -2, 2));
  for (int i = 0; i < n; ++i) t.at(i, i) = t.at(i, i) + 7;  // diagonally dominant
  QMat tinv = *t.inverse();
  std::vector<QMat> rho(n);
  for (int a = 0; a < n; ++a) {
    QMat p(n, n);
    for (int x = 0; x < n; ++x) p.at(g->mul(a, x), x) = 1;
    rho[a] = t * p * tinv;
  }
  return sheaf::Bundle::from_action(y, std::vector<int>(y->size(), n),
                                    [&rho](int a, int) { return rho[a]; });
}

/// Random bundle on a discrete groupoid: arbitrary dims in [0, hi].
inline sheaf::Bundle random_discrete_bundle(const GPtr& y, Rng& r, int hi = 2) {
  std::vector<int> dims(y->size());
  for (auto& d : dims) d = int(rnd(r, 0, hi));
  return sheaf::Bundle::from_action(y, dims, [&dims](int, int x) { return QMat::identity(dims[x]); });
}

/// Random kernel between discrete feet via a stalk-dimension table.
inline kernel::Kernel random_discrete_kernel(const GPtr& a, const GPtr& b, Rng& r, int hi = 2) {
  std::vector<std::vector<int>> dims(a->size(), std::vector<int>(b->size()));
  for (auto& row : dims)
    for (auto& d : row) d = int(rnd(r, 0, hi));
  return kernel::Kernel::from_dims(a, b, dims);
}

/// The graph kernel of a function between discrete sets: stalk (x,y) = 1 iff
/// f(x) = y.
inline kernel::Kernel graph_kernel(const GPtr& a, const GPtr& b, const std::vector<int>& f) {
  std::vector<std::vector<int>> dims(a->size(), std::vector<int>(b->size(), 0));
  for (int x = 0; x < a->size(); ++x) dims[x][f[x]] = 1;
  return kernel::Kernel::from_dims(a, b, dims);
}

}  // namespace testutil
