#include "fincat/frobenius.hpp"

#include <map>
#include <stdexcept>

#include "fincat/coeff.hpp"

namespace fincat::frob {

using groupoid::FinGroupoid;
using kernel::Kernel;
using sheaf::CommaObj;
using sheaf::Pushforward;

namespace {

void require_automorphism(const GroupoidMap& f) {
  if (!f.dom->same_as(*f.cod))
    throw std::invalid_argument("frobenius: F must be an endomorphism");
  f.validate();
  std::vector<bool> seen_obj(f.obj.size(), false), seen_grp(f.theta.size(), false);
  for (int x : f.obj) {
    if (seen_obj[x]) throw std::invalid_argument("frobenius: F is not invertible on points");
    seen_obj[x] = true;
  }
  for (int g : f.theta) {
    if (seen_grp[g]) throw std::invalid_argument("frobenius: F is not invertible on the group");
    seen_grp[g] = true;
  }
}

Rat trace_of(const QMat& m) {
  if (m.rows() != m.cols()) throw std::logic_error("trace of a non-square matrix");
  Rat t = 0;
  for (int i = 0; i < m.rows(); ++i) t += m.at(i, i);
  return t;
}

}  // namespace

void WeilSheaf::validate() const {
  require_automorphism(f);
  if (!f.dom->same_as(*v.base)) throw std::invalid_argument("weil sheaf: base mismatch");
  sheaf::BundleMap m;
  m.src = sheaf::pullback_shriek(f, v);
  m.dst = v;
  m.mats = alpha;
  m.validate();
}

int FrobKernel::coord_of(int p, int m) const {
  for (size_t j = 0; j < labels[p].size(); ++j)
    if (labels[p][j] == m) return int(j);
  throw std::logic_error("frobenius kernel: label not present in stalk");
}

FrobKernel frobenius_kernel(const GPtr& y, const GroupoidMap& f) {
  require_automorphism(f);
  if (!f.dom->same_as(*y)) throw std::invalid_argument("frobenius_kernel: F not on Y");
  const auto& g = *y->group();
  GroupoidMap d;
  d.dom = y;
  d.cod = groupoid::product(y, y);
  const auto& gc = *d.cod->group();
  d.theta.resize(g.size());
  for (long e = 0; e < g.size(); ++e) d.theta[e] = gc.join({int(e), f.theta[e]});
  d.obj.resize(y->size());
  for (int x = 0; x < y->size(); ++x) d.obj[x] = x * y->size() + f.obj[x];
  FrobKernel fk;
  fk.f = f;
  fk.pres = sheaf::pushforward_star(d, sheaf::Bundle::trivial(y, 1));
  fk.k.y1 = y;
  fk.k.y2 = y;
  fk.k.payload = fk.pres.bundle;
  fk.labels.resize(d.cod->size());
  for (int p = 0; p < d.cod->size(); ++p)
    for (int ri : fk.pres.stalks[p].reps) {
      const CommaObj& o = fk.pres.stalks[p].objs[ri];
      auto hs = gc.split(o.h);
      // Normalize the orbit representative (x, (h1, h2)) to x = a: the
      // surviving datum is m = theta_F(h1^{-1}) h2, with m . b = u_F(a).
      fk.labels[p].push_back(g.mul(f.theta[g.inv(hs[0])], hs[1]));
    }
  return fk;
}

FrobTrace tr_frob(const GPtr& y, const GroupoidMap& f) {
  FrobTrace t;
  t.fk = frobenius_kernel(y, f);
  t.tr = kernel::trace_lt_ag(t.fk.k);
  t.tfp = groupoid::twisted_fixed_points(y, f);
  t.classes = groupoid::pi0_with_aut(*t.tfp.groupoid);
  t.dim = t.tr.dim;
  if (t.dim != int(t.classes.size()))
    throw std::logic_error("tr_frob: trace dimension differs from the twisted class count");

  const auto& g = *y->group();
  int n = y->size();
  std::map<std::pair<int, int>, int> point_index;
  for (size_t i = 0; i < t.tfp.points.size(); ++i) point_index[t.tfp.points[i]] = int(i);
  std::vector<int> class_of_point(t.tfp.points.size(), -1);
  for (size_t c = 0; c < t.classes.size(); ++c)
    for (int m : t.classes[c].members) class_of_point[m] = int(c);

  t.class_of_basis.assign(t.dim, -1);
  std::vector<bool> hit(t.classes.size(), false);
  for (int j = 0; j < t.dim; ++j) {
    for (int a = 0; a < n; ++a) {
      long off = t.tr.diag.ambient_offset(a);
      for (int jj = 0; jj < t.tr.diag.dims[a]; ++jj) {
        if (t.tr.coch.basis.at(int(off) + jj, j) == 0) continue;
        // A diagonal cell (a, m) with m.a = u_F(a) is the twisted point
        // (a, m^{-1}).
        int m = t.fk.labels[a * n + a][jj];
        int c = class_of_point[point_index.at({a, g.inv(m)})];
        if (t.class_of_basis[j] < 0) t.class_of_basis[j] = c;
        if (t.class_of_basis[j] != c)
          throw std::logic_error("tr_frob: basis vector supported on two twisted classes");
      }
    }
    if (t.class_of_basis[j] < 0)
      throw std::logic_error("tr_frob: zero basis vector");
    if (hit[t.class_of_basis[j]])
      throw std::logic_error("tr_frob: two basis vectors on one twisted class");
    hit[t.class_of_basis[j]] = true;
    t.labels.push_back(t.tfp.groupoid->label(t.classes[t.class_of_basis[j]].representative));
  }
  return t;
}

Fn0 sfunct(const WeilSheaf& w) {
  w.validate();
  const GPtr& y = w.v.base;
  const auto& g = *y->group();
  auto tfp = groupoid::twisted_fixed_points(y, w.f);
  Fn0 out;
  out.base = tfp.groupoid;
  out.cs = coeff::CoeffSystem::rationals();
  out.components = groupoid::pi0_with_aut(*tfp.groupoid);
  for (const auto& cls : out.components) {
    bool first = true;
    Rat val = 0;
    for (int m : cls.members) {
      auto [x, gg] = tfp.points[m];
      // rho(g^{-1}): V_x -> V_{u_F(x)}, then alpha_x back to V_x.
      Rat t = trace_of(w.alpha[x] * w.v.rho[g.inv(gg)][x]);
      if (first) {
        val = t;
        first = false;
      } else if (t != val) {
        throw std::logic_error("sfunct: value not constant on a twisted class");
      }
    }
    out.values.push_back(out.cs->from_rat(val));
  }
  return out;
}

Fn0 lt_naive(const FrobTrace& t, const QMat& vec) {
  if (vec.rows() != t.dim || vec.cols() != 1)
    throw std::invalid_argument("lt_naive: vector has the wrong shape");
  const auto& g = *t.fk.k.y1->group();
  int n = t.fk.k.y1->size();
  QMat ambient = t.tr.coch.basis * vec;
  Fn0 out;
  out.base = t.tfp.groupoid;
  out.cs = coeff::CoeffSystem::rationals();
  out.components = t.classes;
  for (const auto& cls : t.classes) {
    // Evaluate the invariant diagonal section at one cell of the class.
    auto [x, gg] = t.tfp.points[cls.representative];
    long off = t.tr.diag.ambient_offset(x);
    int jj = t.fk.coord_of(x * n + x, g.inv(gg));
    out.values.push_back(out.cs->from_rat(ambient.at(int(off) + jj, 0)));
  }
  return out;
}

QMat cl_weil(const WeilSheaf& w, const FrobTrace& t) {
  w.validate();
  if (t.fk.f.obj != w.f.obj || t.fk.f.theta != w.f.theta)
    throw std::invalid_argument("cl_weil: trace data built from a different Frobenius");
  const GPtr& y = w.v.base;
  const auto& g = *y->group();
  int n = y->size();

  // The adjunct of alpha: a map V -> F_* V.
  Pushforward fv = sheaf::pushforward_star(w.f, w.v);
  sheaf::BundleMap q = sheaf::star_adjunct(w.f, w.v, fv, w.alpha);

  // Canonical isomorphism F_* V -> [K_F](V), computed in the deterministic
  // bases of both pushforwards: the section t maps to
  //   s_{((x1,x2), h2)} = sum over stalk labels m of t_{(x1, m h2)} (x) e_m.
  kernel::Chain c = kernel::make_chain({kernel::column_kernel(w.v), t.fk.k});
  const auto& outg = *c.proj.cod->group();
  std::vector<QMat> mats(n);
  for (int b = 0; b < n; ++b) {
    int dimF = fv.bundle.dims[b];
    const auto& sp = c.push.stalks[b];
    std::vector<QMat> rep_values;
    for (int ri : sp.reps) {
      const CommaObj& o = sp.objs[ri];
      int x1 = o.x / n, x2 = o.x % n;
      int h2 = outg.split(o.h)[1];
      int dv = w.v.dims[x1];
      int dk = t.fk.k.payload.dims[x1 * n + x2];
      QMat val(dv * dk, dimF);
      for (int jm = 0; jm < dk; ++jm) {
        int m = t.fk.labels[x1 * n + x2][jm];
        int obj2 = fv.stalks[b].find({x1, g.mul(m, h2)});
        QMat tv = fv.expand(b, obj2, QMat::identity(dimF));
        for (int i = 0; i < dv; ++i)
          for (int j = 0; j < dimF; ++j) val.at(i * dk + jm, j) = tv.at(i, j);
      }
      rep_values.push_back(std::move(val));
    }
    mats[b] = c.push.coords_from_rep_values(b, rep_values) * q.mats[b];
  }
  return kernel::class_of(w.v, mats, t.fk.k);
}

QMat cl_weil(const WeilSheaf& w) { return cl_weil(w, tr_frob(w.v.base, w.f)); }

WeilSheaf weil_tensor(const WeilSheaf& a, const WeilSheaf& b) {
  if (!a.v.base->same_as(*b.v.base) || a.f.obj != b.f.obj || a.f.theta != b.f.theta)
    throw std::invalid_argument("weil_tensor: mismatched bases or Frobenii");
  WeilSheaf r;
  r.v = sheaf::tensor_shriek(a.v, b.v);
  r.f = a.f;
  for (size_t x = 0; x < a.alpha.size(); ++x)
    r.alpha.push_back(a.alpha[x].kronecker(b.alpha[x]));
  return r;
}

WeilSheaf weil_sum(const WeilSheaf& a, const WeilSheaf& b) {
  if (!a.v.base->same_as(*b.v.base) || a.f.obj != b.f.obj || a.f.theta != b.f.theta)
    throw std::invalid_argument("weil_sum: mismatched bases or Frobenii");
  WeilSheaf r;
  r.v = sheaf::direct_sum(a.v, b.v);
  r.f = a.f;
  for (size_t x = 0; x < a.alpha.size(); ++x)
    r.alpha.push_back(block_diag({a.alpha[x], b.alpha[x]}));
  return r;
}

WeilSheaf weil_pushforward(const WeilSheaf& w, const GroupoidMap& p, const GroupoidMap& fz) {
  w.validate();
  require_automorphism(fz);
  p.validate();
  if (!p.dom->same_as(*w.v.base) || !fz.dom->same_as(*p.cod))
    throw std::invalid_argument("weil_pushforward: base mismatch");
  const auto& g = *p.dom->group();
  for (long e = 0; e < g.size(); ++e)
    if (p.theta[e] != int(e))
      throw std::invalid_argument("weil_pushforward: map must fix the group");
  if (fz.theta != w.f.theta)
    throw std::invalid_argument("weil_pushforward: Frobenii disagree on the group");
  for (int x = 0; x < p.dom->size(); ++x)
    if (fz.obj[p.obj[x]] != p.obj[w.f.obj[x]])
      throw std::invalid_argument("weil_pushforward: Frobenii do not intertwine");

  Pushforward push = sheaf::pushforward_star(p, w.v);
  WeilSheaf r;
  r.v = push.bundle;
  r.f = fz;
  r.alpha.resize(p.cod->size());
  for (int z = 0; z < p.cod->size(); ++z) {
    int uz = fz.obj[z];
    int dsrc = push.bundle.dims[uz];
    const auto& sp = push.stalks[z];
    std::vector<QMat> rep_values;
    for (int ri : sp.reps) {
      const CommaObj& o = sp.objs[ri];
      // s_{(x, h)} = alpha_x . t_{(u_Y(x), theta_F(h))}.
      int obj2 = push.stalks[uz].find({w.f.obj[o.x], w.f.theta[o.h]});
      rep_values.push_back(w.alpha[o.x] * push.expand(uz, obj2, QMat::identity(dsrc)));
    }
    r.alpha[z] = push.coords_from_rep_values(z, rep_values);
  }
  return r;
}

}  // namespace fincat::frob
