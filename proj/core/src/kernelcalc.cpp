#include "fincat/kernelcalc.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace fincat::kernel {

using groupoid::FinGroup;
using groupoid::FinGroupoid;
using groupoid::GroupPtr;
using sheaf::BundleView;
using sheaf::CommaObj;
using sheaf::StalkPres;

namespace {

int kpt(const Kernel& k, int a, int b) { return a * k.y2->size() + b; }

/// rho of a kernel payload at the pair of group elements (g1, g2).
const QMat& krho(const Kernel& k, int g1, int g2, int a, int b) {
  int g = k.payload.base->group()->join({g1, g2});
  return k.payload.rho[g][kpt(k, a, b)];
}

QMat scalar1() {
  QMat m(1, 1);
  m.at(0, 0) = 1;
  return m;
}

/// Map between two chain composites with the same feet, induced by payload
/// maps of the constituent kernels.
sheaf::BundleMap chain_map(const Chain& cs, const Chain& cd,
                           const std::vector<sheaf::BundleMap>& phis) {
  if (cs.feet.size() != cd.feet.size() || phis.size() + 1 != cs.feet.size())
    throw std::invalid_argument("chain_map: arity mismatch");
  sheaf::BundleMap m;
  m.src = cs.result.payload;
  m.dst = cd.result.payload;
  const auto& feet = cs.feet;
  int npts = cs.result.payload.base->size();
  for (int p = 0; p < npts; ++p) {
    const StalkPres& sp = cd.push.stalks[p];
    std::vector<QMat> rep_values;
    QMat eye = QMat::identity(cs.push.stalks[p].dim);
    for (size_t r = 0; r < sp.reps.size(); ++r) {
      const CommaObj& o = sp.objs[sp.reps[r]];
      auto xs = sheaf::prod_split(feet, o.x);
      QMat phi = scalar1();
      for (size_t i = 0; i < phis.size(); ++i)
        phi = phi.kronecker(phis[i].mats[xs[i] * feet[i + 1]->size() + xs[i + 1]]);
      int idx = cs.push.stalks[p].find(o);
      rep_values.push_back(phi * cs.push.expand(p, idx, eye));
    }
    m.mats.push_back(cd.push.coords_from_rep_values(p, rep_values));
  }
  return m;
}

/// chain_map for binary convolutions, packaged as a KernelMap.
KernelMap conv_map2(const KernelMap& a, const KernelMap& b) {
  Chain cs = make_chain({a.src, b.src});
  Chain cd = make_chain({a.dst, b.dst});
  return {cs.result, cd.result, chain_map(cs, cd, {a.map, b.map})};
}

/// Canonical iso chain({K}).result -> K (evaluation at the unit arrow).
sheaf::BundleMap eval_single(const Chain& c) {
  sheaf::BundleMap m;
  m.src = c.result.payload;
  m.dst = c.ks[0].payload;
  int id = c.proj.cod->group()->id();
  for (int p = 0; p < c.result.payload.base->size(); ++p) {
    int idx = c.push.stalks[p].find({p, id});
    m.mats.push_back(c.push.expand(p, idx, QMat::identity(c.push.stalks[p].dim)));
  }
  return m;
}

void require_square(const QMat& m, const char* what) {
  if (m.rows() != m.cols()) throw std::logic_error(std::string(what) + ": not square");
}

bool is_identity_map(const sheaf::BundleMap& m) {
  for (const auto& x : m.mats)
    if (!x.is_identity()) return false;
  return true;
}

}  // namespace

// ------------------------------------------------------------------- Kernel

Kernel Kernel::from_payload(GPtr y1, GPtr y2, Bundle payload) {
  GPtr base = groupoid::product(y1, y2);
  if (!payload.base->same_as(*base))
    throw std::invalid_argument("kernel: payload base is not the product of the feet");
  Kernel k;
  k.y1 = std::move(y1);
  k.y2 = std::move(y2);
  k.payload = std::move(payload);
  return k;
}

Kernel Kernel::from_dims(GPtr y1, GPtr y2, const std::vector<std::vector<int>>& dims) {
  if (y1->group()->size() != 1 || y2->group()->size() != 1)
    throw std::invalid_argument("kernel from_dims: feet must be discrete");
  GPtr base = groupoid::product(y1, y2);
  std::vector<int> d(base->size());
  for (int a = 0; a < y1->size(); ++a)
    for (int b = 0; b < y2->size(); ++b) d[a * y2->size() + b] = dims[a][b];
  Kernel k;
  k.y1 = y1;
  k.y2 = y2;
  k.payload =
      Bundle::from_action(base, d, [&d](int, int x) { return QMat::identity(d[x]); });
  return k;
}

int Kernel::stalk(int a, int b) const { return payload.dims[a * y2->size() + b]; }

Kernel Kernel::zero_like() const {
  Kernel k;
  k.y1 = y1;
  k.y2 = y2;
  std::vector<int> d(payload.dims.size(), 0);
  k.payload = Bundle::from_action(payload.base, d, [](int, int) { return QMat(0, 0); });
  return k;
}

// ---------------------------------------------------------------- KernelMap

KernelMap KernelMap::inverse() const { return {dst, src, map.inverse()}; }

KernelMap kernel_identity(const Kernel& k) { return {k, k, sheaf::identity_map(k.payload)}; }

KernelMap kernel_compose(const KernelMap& a, const KernelMap& b) {
  for (size_t x = 0; x < a.map.mats.size(); ++x)
    if (b.map.mats[x].cols() != a.map.mats[x].rows())
      throw std::logic_error("kernel_compose: shape mismatch");
  return {a.src, b.dst, sheaf::compose(a.map, b.map)};
}

std::vector<KernelMap> kernel_hom(const Kernel& a, const Kernel& b) {
  std::vector<KernelMap> out;
  for (auto& m : sheaf::hom_space(a.payload, b.payload)) out.push_back({a, b, std::move(m)});
  return out;
}

std::optional<KernelMap> kernel_iso(const Kernel& a, const Kernel& b) {
  auto m = sheaf::find_iso(a.payload, b.payload);
  if (!m) return std::nullopt;
  return KernelMap{a, b, std::move(*m)};
}

// ----------------------------------------------------------- identity kernel

int IdKernel::coord_of(int p, int h) const {
  for (size_t j = 0; j < labels[p].size(); ++j)
    if (labels[p][j] == h) return int(j);
  throw std::logic_error("identity kernel: label not present in stalk");
}

IdKernel identity_kernel(const GPtr& y) {
  const auto& g = *y->group();
  GroupoidMap d;
  d.dom = y;
  d.cod = groupoid::product(y, y);
  const auto& gc = *d.cod->group();
  d.theta.resize(g.size());
  for (long e = 0; e < g.size(); ++e) d.theta[e] = gc.join({int(e), int(e)});
  d.obj.resize(y->size());
  for (int x = 0; x < y->size(); ++x) d.obj[x] = x * y->size() + x;
  IdKernel ik;
  ik.pres = sheaf::pushforward_star(d, Bundle::trivial(y, 1));
  ik.k.y1 = y;
  ik.k.y2 = y;
  ik.k.payload = ik.pres.bundle;
  ik.labels.resize(d.cod->size());
  for (int p = 0; p < d.cod->size(); ++p)
    for (int ri : ik.pres.stalks[p].reps) {
      const CommaObj& o = ik.pres.stalks[p].objs[ri];
      auto hs = gc.split(o.h);
      ik.labels[p].push_back(g.mul(g.inv(hs[0]), hs[1]));
    }
  return ik;
}

// -------------------------------------------------------------------- chains

Chain make_chain(const std::vector<Kernel>& ks) {
  if (ks.empty()) throw std::invalid_argument("chain: empty");
  Chain c;
  c.ks = ks;
  c.feet.push_back(ks[0].y1);
  for (const auto& k : ks) {
    if (!k.y1->same_as(*c.feet.back()))
      throw std::invalid_argument("chain: foot mismatch between consecutive kernels");
    c.feet.push_back(k.y2);
  }
  c.big = groupoid::product(c.feet);
  int n = int(ks.size());

  auto payloads = std::make_shared<std::vector<Bundle>>();
  for (const auto& k : ks) payloads->push_back(k.payload);
  auto feet = std::make_shared<std::vector<GPtr>>(c.feet);
  GroupPtr bigg = c.big->group();

  BundleView t;
  t.base = c.big;
  t.dims.resize(c.big->size());
  for (int x = 0; x < c.big->size(); ++x) {
    auto xs = sheaf::prod_split(*feet, x);
    int dim = 1;
    for (int i = 0; i < n; ++i)
      dim *= (*payloads)[i].dims[xs[i] * (*feet)[i + 1]->size() + xs[i + 1]];
    t.dims[x] = dim;
  }
  t.rho = [payloads, feet, bigg, n](int g, int x) {
    auto gs = bigg->split(g);
    auto xs = sheaf::prod_split(*feet, x);
    QMat m = scalar1();
    for (int i = 0; i < n; ++i) {
      int gp = (*payloads)[i].base->group()->join({gs[i], gs[i + 1]});
      m = m.kronecker((*payloads)[i].rho[gp][xs[i] * (*feet)[i + 1]->size() + xs[i + 1]]);
    }
    return m;
  };
  c.tensor = sheaf::memoized(t);
  c.proj = groupoid::projection(c.big, c.feet, std::vector<int>{0, n});
  c.push = sheaf::pushforward_star(c.proj, c.tensor);
  c.result.y1 = c.feet.front();
  c.result.y2 = c.feet.back();
  c.result.payload = c.push.bundle;
  return c;
}

Kernel convolve(const Kernel& a, const Kernel& b) { return make_chain({a, b}).result; }

Kernel conv_all(const std::vector<Kernel>& ks) {
  if (ks.empty()) throw std::invalid_argument("conv_all: empty");
  Kernel acc = ks[0];
  for (size_t i = 1; i < ks.size(); ++i) acc = convolve(acc, ks[i]);
  return acc;
}

// ------------------------------------------------------------- column view

Kernel column_kernel(const Bundle& v) {
  Kernel k;
  k.y1 = FinGroupoid::point();
  k.y2 = v.base;
  GPtr base = groupoid::product(k.y1, k.y2);
  // The point contributes a trivial factor, so carrier and group indices of
  // the product coincide with those of the base groupoid.
  Bundle p;
  p.base = base;
  p.dims = v.dims;
  p.basis = v.basis;
  p.rho = v.rho;
  k.payload = std::move(p);
  return k;
}

Bundle column_to_bundle(const Bundle& payload, const GPtr& y) {
  Bundle b;
  b.base = y;
  b.dims = payload.dims;
  b.basis = payload.basis;
  b.rho = payload.rho;
  return b;
}

Bundle act(const Kernel& k, const Bundle& v) {
  if (!v.base->same_as(*k.y1)) throw std::invalid_argument("act: bundle not on the left foot");
  return column_to_bundle(convolve(column_kernel(v), k).payload, k.y2);
}

// --------------------------------------------------------------- split isos

BundleMap chain_split_iso(const std::vector<Kernel>& ks, int cut) {
  int n = int(ks.size());
  if (cut < 1 || cut >= n) throw std::invalid_argument("chain_split_iso: bad cut");
  Chain c = make_chain(ks);
  Chain l = make_chain({ks.begin(), ks.begin() + cut});
  Chain r = make_chain({ks.begin() + cut, ks.end()});
  Chain o = make_chain({l.result, r.result});

  const auto& g0 = *c.feet.front()->group();
  const auto& gc = *c.feet[cut]->group();
  const auto& gn = *c.feet.back()->group();
  const auto& outerg = *c.proj.cod->group();  // product of G0, Gn
  const auto& lcodg = *l.proj.cod->group();
  const auto& rcodg = *r.proj.cod->group();
  std::vector<GPtr> feet3 = {c.feet.front(), c.feet[cut], c.feet.back()};

  BundleMap m;
  m.src = c.result.payload;
  m.dst = o.result.payload;
  for (int p = 0; p < c.result.payload.base->size(); ++p) {
    int dC = c.push.stalks[p].dim;
    QMat eyeC = QMat::identity(dC);
    std::map<int, QMat> ec_cache;
    auto evalC = [&](int idx) -> const QMat& {
      auto it = ec_cache.find(idx);
      if (it == ec_cache.end())
        it = ec_cache.emplace(idx, c.push.expand(p, idx, eyeC)).first;
      return it->second;
    };
    const StalkPres& spo = o.push.stalks[p];
    std::vector<QMat> rep_values;
    for (size_t ro = 0; ro < spo.reps.size(); ++ro) {
      const CommaObj& oo = spo.objs[spo.reps[ro]];
      auto bs = sheaf::prod_split(feet3, oo.x);
      auto gs = outerg.split(oo.h);
      int pl = bs[0] * c.feet[cut]->size() + bs[1];
      int pr = bs[1] * c.feet.back()->size() + bs[2];
      int dl = l.push.stalks[pl].dim;
      int dr = r.push.stalks[pr].dim;
      QMat eyeL = QMat::identity(dl), eyeR = QMat::identity(dr);
      QMat sys(0, dl * dr), rhs(0, dC);
      for (int rl : l.push.stalks[pl].reps) {
        const CommaObj& ol = l.push.stalks[pl].objs[rl];
        QMat el = l.push.expand(pl, l.push.stalks[pl].find(ol), eyeL);
        auto ksplit = lcodg.split(ol.h);
        auto xsl = sheaf::prod_split(l.feet, ol.x);
        for (int rr : r.push.stalks[pr].reps) {
          const CommaObj& orr = r.push.stalks[pr].objs[rr];
          QMat er = r.push.expand(pr, r.push.stalks[pr].find(orr), eyeR);
          auto msplit = rcodg.split(orr.h);
          auto xsr = sheaf::prod_split(r.feet, orr.x);
          sys = sys.vcat(el.kronecker(er));
          // Assemble the full-chain comma object carrying the same data: the
          // two middle points over bc differ by the transport g below, which
          // is pushed into the first right-hand leg.
          int g = gc.mul(msplit[0], gc.inv(ksplit[1]));
          int h0 = g0.mul(ksplit[0], gs[0]);
          int hn = gn.mul(msplit[1], gs[1]);
          std::vector<int> xs(xsl);
          xs.insert(xs.end(), xsr.begin() + 1, xsr.end());
          int xidx = sheaf::prod_index(c.feet, xs);
          int idx = c.push.stalks[p].find({xidx, outerg.join({h0, hn})});
          const QMat& ecv = evalC(idx);
          int q = xsl[cut] * c.feet[cut + 1]->size() + xsr[1];
          int gp = ks[cut].payload.base->group()->join({g, c.feet[cut + 1]->group()->id()});
          const QMat& rho = ks[cut].payload.rho[gp][q];
          int d2 = rho.cols() == 0 ? 0 : er.rows() / std::max(rho.rows(), 1);
          if (rho.rows() == 0) d2 = 0;
          QMat t = QMat::identity(el.rows()).kronecker(
              rho.kronecker(QMat::identity(std::max(d2, 0))));
          if (el.rows() * rho.rows() * std::max(d2, 0) == 0)
            t = QMat(el.rows() * er.rows(), ecv.rows());
          rhs = rhs.vcat(t * ecv);
        }
      }
      auto sol = sys.solve(rhs);
      if (!sol || sys * *sol != rhs)
        throw std::logic_error("chain_split_iso: joint evaluation is not consistent");
      rep_values.push_back(std::move(*sol));
    }
    m.mats.push_back(o.push.coords_from_rep_values(p, rep_values));
  }
  m.validate();
  if (!m.is_iso()) throw std::logic_error("chain_split_iso: comparison is not invertible");
  return m;
}

BundleMap normalize_iso(const std::vector<Kernel>& ks) {
  int n = int(ks.size());
  if (n == 1) return eval_single(make_chain(ks));
  if (n == 2) return sheaf::identity_map(make_chain(ks).result.payload);
  std::vector<Kernel> left(ks.begin(), ks.end() - 1);
  BundleMap s = chain_split_iso(ks, n - 1);
  Chain cl = make_chain(left);
  Chain cr = make_chain({ks.back()});
  Chain cs = make_chain({cl.result, cr.result});
  Chain cd = make_chain({conv_all(left), ks.back()});
  sheaf::BundleMap nl;
  nl.src = cl.result.payload;
  nl.dst = cd.ks[0].payload;
  nl.mats = normalize_iso(left).mats;
  BundleMap t = chain_map(cs, cd, {nl, eval_single(cr)});
  return sheaf::compose(s, t);
}

// ------------------------------------------------------------------ unitors

KernelMap left_unitor(const Kernel& k) {
  IdKernel u = identity_kernel(k.y1);
  Chain c = make_chain({u.k, k});
  const auto& cod = *c.proj.cod;
  int idg = cod.group()->id();
  KernelMap m;
  m.src = c.result;
  m.dst = k;
  m.map.src = c.result.payload;
  m.map.dst = k.payload;
  for (int p = 0; p < cod.size(); ++p) {
    int a = p / k.y2->size(), b = p % k.y2->size();
    int x = sheaf::prod_index(c.feet, {a, a, b});
    int idx = c.push.stalks[p].find({x, idg});
    QMat e = c.push.expand(p, idx, QMat::identity(c.push.stalks[p].dim));
    int paa = a * k.y1->size() + a;
    int j = u.coord_of(paa, k.y1->group()->id());
    int dk = k.payload.dims[p];
    QMat mat(dk, e.cols());
    for (int i = 0; i < dk; ++i)
      for (int cidx = 0; cidx < e.cols(); ++cidx) mat.at(i, cidx) = e.at(j * dk + i, cidx);
    m.map.mats.push_back(std::move(mat));
  }
  m.map.validate();
  if (!m.is_iso()) throw std::logic_error("left unitor is not invertible");
  return m;
}

KernelMap right_unitor(const Kernel& k) {
  IdKernel u = identity_kernel(k.y2);
  Chain c = make_chain({k, u.k});
  const auto& cod = *c.proj.cod;
  int idg = cod.group()->id();
  KernelMap m;
  m.src = c.result;
  m.dst = k;
  m.map.src = c.result.payload;
  m.map.dst = k.payload;
  for (int p = 0; p < cod.size(); ++p) {
    int a = p / k.y2->size(), b = p % k.y2->size();
    int x = sheaf::prod_index(c.feet, {a, b, b});
    int idx = c.push.stalks[p].find({x, idg});
    QMat e = c.push.expand(p, idx, QMat::identity(c.push.stalks[p].dim));
    int pbb = b * k.y2->size() + b;
    int j = u.coord_of(pbb, k.y2->group()->id());
    int dk = k.payload.dims[p];
    int du = u.k.payload.dims[pbb];
    QMat mat(dk, e.cols());
    for (int i = 0; i < dk; ++i)
      for (int cidx = 0; cidx < e.cols(); ++cidx) mat.at(i, cidx) = e.at(i * du + j, cidx);
    m.map.mats.push_back(std::move(mat));
  }
  m.map.validate();
  if (!m.is_iso()) throw std::logic_error("right unitor is not invertible");
  return m;
}

KernelMap associator(const Kernel& a, const Kernel& b, const Kernel& c) {
  std::vector<Kernel> ks = {a, b, c};
  BundleMap to_lhs = normalize_iso(ks);  // chain -> conv(conv(a,b),c)
  BundleMap s = chain_split_iso(ks, 1);
  Chain cl = make_chain({a});
  Chain cr = make_chain({b, c});
  Chain cs = make_chain({cl.result, cr.result});
  Chain cd = make_chain({a, cr.result});
  sheaf::BundleMap idr = sheaf::identity_map(cr.result.payload);
  BundleMap to_rhs = sheaf::compose(s, chain_map(cs, cd, {eval_single(cl), idr}));
  KernelMap m;
  m.src = conv_all(ks);
  m.dst = convolve(a, convolve(b, c));
  m.map = sheaf::compose(to_lhs.inverse(), to_rhs);
  return m;
}

KernelMap whisker(const std::vector<Kernel>& left, const KernelMap& phi,
                  const std::vector<Kernel>& right) {
  std::vector<Kernel> srcs(left), dsts(left);
  srcs.push_back(phi.src);
  dsts.push_back(phi.dst);
  srcs.insert(srcs.end(), right.begin(), right.end());
  dsts.insert(dsts.end(), right.begin(), right.end());
  Chain cs = make_chain(srcs);
  Chain cd = make_chain(dsts);
  std::vector<sheaf::BundleMap> phis;
  for (size_t i = 0; i < srcs.size(); ++i)
    phis.push_back(i == left.size() ? phi.map : sheaf::identity_map(srcs[i].payload));
  BundleMap mid = chain_map(cs, cd, phis);
  KernelMap m;
  m.src = conv_all(srcs);
  m.dst = conv_all(dsts);
  m.map = sheaf::compose(sheaf::compose(normalize_iso(srcs).inverse(), mid), normalize_iso(dsts));
  return m;
}

// ------------------------------------------------------------------ adjoints

Kernel swap_feet(const Kernel& k) {
  GPtr base = groupoid::product(k.y2, k.y1);
  const auto& pg = *base->group();
  const auto& kg = *k.payload.base->group();
  int n1 = k.y1->size(), n2 = k.y2->size();
  std::vector<int> dims(base->size());
  for (int b = 0; b < n2; ++b)
    for (int a = 0; a < n1; ++a) dims[b * n1 + a] = k.payload.dims[a * n2 + b];
  Kernel r;
  r.y1 = k.y2;
  r.y2 = k.y1;
  r.payload = Bundle::from_action(base, dims, [&](int g, int x) {
    auto gs = pg.split(g);
    int b = x / n1, a = x % n1;
    return k.payload.rho[kg.join({gs[1], gs[0]})][a * n2 + b];
  });
  return r;
}

AdjointResult kernel_right_adjoint(const Kernel& k) {
  AdjointResult res;
  Kernel dual;
  dual.y1 = k.y1;
  dual.y2 = k.y2;
  dual.payload = sheaf::verdier_dual(k.payload);
  Kernel kr = swap_feet(dual);
  IdKernel u1 = identity_kernel(k.y1);
  IdKernel u2 = identity_kernel(k.y2);
  const auto& g1 = *k.y1->group();

  // Unit: e_l at (a1, a2) (so l . a2 = a1) goes to the section whose value at
  // the comma object ((x1, y, x2), (h1, h2)) is the flattened matrix of
  // rho_K((h1 l h2^{-1}, e)): K(x2, y) -> K(x1, y).
  Chain ckkr = make_chain({k, kr});
  KernelMap u;
  u.src = u1.k;
  u.dst = ckkr.result;
  u.map.src = u1.k.payload;
  u.map.dst = ckkr.result.payload;
  const auto& og = *ckkr.proj.cod->group();
  try {
    for (int p = 0; p < ckkr.proj.cod->size(); ++p) {
      int du = u1.k.payload.dims[p];
      const StalkPres& sp = ckkr.push.stalks[p];
      std::vector<QMat> rep_values;
      for (int ri : sp.reps) {
        const CommaObj& o = sp.objs[ri];
        auto xs = sheaf::prod_split(ckkr.feet, o.x);
        auto hs = og.split(o.h);
        int legdim = ckkr.tensor.dims[o.x];
        QMat val(legdim, du);
        for (int j = 0; j < du; ++j) {
          int l = u1.labels[p][j];
          int ga = g1.mul(g1.mul(hs[0], l), g1.inv(hs[1]));
          const QMat& rho = krho(k, ga, k.y2->group()->id(), xs[2], xs[1]);
          for (int i = 0; i < rho.rows(); ++i)
            for (int jj = 0; jj < rho.cols(); ++jj) val.at(i * rho.cols() + jj, j) = rho.at(i, jj);
        }
        rep_values.push_back(std::move(val));
      }
      u.map.mats.push_back(ckkr.push.coords_from_rep_values(p, rep_values));
    }
    u.map.validate();
  } catch (const std::exception& e) {
    res.diagnostic = std::string("unit construction failed: ") + e.what();
    return res;
  }

  // Counit: solved linearly from the first triangle identity over the hom
  // space, then checked against the second.
  Kernel krk = convolve(kr, k);
  auto homs = kernel_hom(krk, u2.k);
  KernelMap lu = left_unitor(k);
  KernelMap ruk = right_unitor(k);
  KernelMap assoc = associator(k, kr, k);
  Chain cs_uk = make_chain({u1.k, k});
  Chain cd_uk = make_chain({ckkr.result, k});
  sheaf::BundleMap idk = sheaf::identity_map(k.payload);
  sheaf::BundleMap pre = sheaf::compose(
      sheaf::compose(lu.map.inverse(), chain_map(cs_uk, cd_uk, {u.map, idk})), assoc.map);
  Chain cs_k_krk = make_chain({k, krk});
  Chain cd_k_u2 = make_chain({k, u2.k});
  std::vector<sheaf::BundleMap> tri;
  for (const auto& h : homs)
    tri.push_back(sheaf::compose(
        sheaf::compose(pre, chain_map(cs_k_krk, cd_k_u2, {idk, h.map})), ruk.map));
  long nrows = 0;
  for (int d : k.payload.dims) nrows += long(d) * d;
  QMat sys(int(nrows), int(homs.size())), rhs(int(nrows), 1);
  long r0 = 0;
  for (size_t p = 0; p < k.payload.dims.size(); ++p) {
    int d = k.payload.dims[p];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (i == j) rhs.at(int(r0 + i * d + j), 0) = 1;
        for (size_t t = 0; t < tri.size(); ++t)
          sys.at(int(r0 + i * d + j), int(t)) = tri[t].mats[p].at(i, j);
      }
    r0 += long(d) * d;
  }
  auto sol = sys.solve(rhs);
  if (!sol || sys * *sol != rhs) {
    res.diagnostic = "no counit satisfies the first triangle identity";
    return res;
  }
  KernelMap co;
  co.src = krk;
  co.dst = u2.k;
  co.map.src = krk.payload;
  co.map.dst = u2.k.payload;
  for (size_t p = 0; p < krk.payload.dims.size(); ++p) {
    QMat mat(u2.k.payload.dims[p], krk.payload.dims[p]);
    for (size_t t = 0; t < homs.size(); ++t)
      mat = mat + homs[t].map.mats[p].scaled(sol->at(int(t), 0));
    co.map.mats.push_back(std::move(mat));
  }
  co.map.validate();

  // Second triangle identity on K^R.
  Chain cs_kr_u1 = make_chain({kr, u1.k});
  Chain cd_kr_kkr = make_chain({kr, ckkr.result});
  Chain cs_krk_kr = make_chain({krk, kr});
  Chain cd_u2_kr = make_chain({u2.k, kr});
  sheaf::BundleMap idkr = sheaf::identity_map(kr.payload);
  sheaf::BundleMap triB = sheaf::compose(
      sheaf::compose(
          sheaf::compose(
              sheaf::compose(right_unitor(kr).map.inverse(),
                             chain_map(cs_kr_u1, cd_kr_kkr, {idkr, u.map})),
              associator(kr, k, kr).map.inverse()),
          chain_map(cs_krk_kr, cd_u2_kr, {co.map, idkr})),
      left_unitor(kr).map);
  if (!is_identity_map(triB)) {
    res.diagnostic = "second triangle identity fails";
    return res;
  }
  res.data = AdjointData{kr, u, co};
  return res;
}

// ------------------------------------------------------------------- traces

TraceSpace trace_lt_ag(const Kernel& k) {
  if (!k.y1->same_as(*k.y2)) throw std::invalid_argument("trace: feet differ");
  const GPtr& y = k.y1;
  const auto& g = *y->group();
  GroupoidMap d;
  d.dom = y;
  d.cod = k.payload.base;
  const auto& gc = *d.cod->group();
  d.theta.resize(g.size());
  for (long e = 0; e < g.size(); ++e) d.theta[e] = gc.join({int(e), int(e)});
  d.obj.resize(y->size());
  for (int x = 0; x < y->size(); ++x) d.obj[x] = x * y->size() + x;
  TraceSpace t;
  t.k = k;
  t.diag = sheaf::pullback_shriek(d, k.payload);
  t.coch = sheaf::cochains_triangle(y, t.diag);
  t.dim = t.coch.dim;
  t.labels = t.coch.labels;
  return t;
}

QMat trace_of_map(const TraceSpace& trs, const TraceSpace& trd, const KernelMap& phi) {
  int n = trs.k.y1->size();
  std::vector<QMat> blocks;
  for (int a = 0; a < n; ++a) blocks.push_back(phi.map.mats[a * n + a]);
  QMat bd = block_diag(blocks);
  return trd.coch.coords(bd * trs.coch.basis);
}

DualityTrace trace_via_duality(const Kernel& k) {
  if (!k.y1->same_as(*k.y2)) throw std::invalid_argument("trace: feet differ");
  const GPtr& y = k.y1;
  const auto& g = *y->group();
  DualityTrace t;
  t.k = k;
  for (int a = 0; a < y->size(); ++a)
    for (long beta = 0; beta < g.size(); ++beta) t.cells.push_back({a, int(beta)});
  t.cell_offset.resize(t.cells.size() + 1, 0);
  for (size_t i = 0; i < t.cells.size(); ++i) {
    auto [a, beta] = t.cells[i];
    t.cell_offset[i + 1] = t.cell_offset[i] + k.stalk(a, y->act(beta, a));
  }
  t.ambient = t.cell_offset.back();
  auto cell_index = [&](int a, int beta) { return size_t(a) * g.size() + beta; };

  // Invariance constraints of the two commuting actions on the cell space.
  std::vector<int> gens = g.generators();
  QMat stacked(0, int(t.ambient));
  for (int s : gens)
    for (int fam = 0; fam < 2; ++fam) {
      QMat act_mat(int(t.ambient), int(t.ambient));
      for (size_t i = 0; i < t.cells.size(); ++i) {
        auto [a, beta] = t.cells[i];
        int pt = a * y->size() + y->act(beta, a);
        size_t tgt;
        const QMat* blk;
        if (fam == 0) {
          tgt = cell_index(y->act(s, a), g.mul(beta, g.inv(s)));
          blk = &krho(k, s, g.id(), a, y->act(beta, a));
        } else {
          tgt = cell_index(a, g.mul(s, beta));
          blk = &krho(k, g.id(), s, a, y->act(beta, a));
        }
        (void)pt;
        for (int r = 0; r < blk->rows(); ++r)
          for (int c = 0; c < blk->cols(); ++c)
            act_mat.at(int(t.cell_offset[tgt]) + r, int(t.cell_offset[i]) + c) = blk->at(r, c);
      }
      stacked = stacked.vcat(act_mat - QMat::identity(int(t.ambient)));
    }
  t.basis = gens.empty() ? QMat::identity(int(t.ambient)) : stacked.kernel_basis();
  t.dim = t.basis.cols();

  // The collapse onto the beta = identity cells lands in the invariant
  // diagonal sections and is the canonical comparison with trace_lt_ag.
  TraceSpace lt = trace_lt_ag(k);
  QMat collapsed(int(lt.diag.total_dim()), t.dim);
  long off = 0;
  for (int a = 0; a < y->size(); ++a) {
    size_t ci = cell_index(a, g.id());
    int d = int(t.cell_offset[ci + 1] - t.cell_offset[ci]);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < t.dim; ++c)
        collapsed.at(int(off) + r, c) = t.basis.at(int(t.cell_offset[ci]) + r, c);
    off += d;
  }
  QMat kappa = lt.coch.coords(collapsed);
  require_square(kappa, "trace comparison");
  auto inv = kappa.inverse();
  if (!inv) throw std::logic_error("trace comparison is not invertible");
  t.lt = std::move(*inv);
  t.labels = lt.labels;
  return t;
}

// ------------------------------------------------------------- duality data

DualityData duality_data(const GPtr& y) {
  DualityData d;
  d.y = y;
  d.unit = identity_kernel(y);
  const Bundle& up = d.unit.k.payload;
  const auto& ug = *up.base->group();
  GPtr y3 = groupoid::product({y, y, y});
  std::vector<GPtr> fs3 = {y, y, y};
  int n = y->size();

  // (id ⊗ unit): Y -> Y⊗Y⊗Y and (counit ⊗ id): Y⊗Y⊗Y -> Y, both with the
  // unit bundle as payload on the matching pairs of coordinates.
  GPtr b14 = groupoid::product(y, y3);
  const auto& g14 = *b14->group();
  const auto& g3 = *y3->group();
  std::vector<int> d1(b14->size());
  for (int x = 0; x < b14->size(); ++x) {
    int a = x / y3->size();
    auto m = sheaf::prod_split(fs3, x % y3->size());
    d1[x] = up.dims[a * n + m[0]] * up.dims[m[1] * n + m[2]];
  }
  Kernel k1;
  k1.y1 = y;
  k1.y2 = y3;
  k1.payload = Bundle::from_action(b14, d1, [&](int g, int x) {
    auto gs = g14.split(g);
    auto gm = g3.split(gs[1]);
    int a = x / y3->size();
    auto m = sheaf::prod_split(fs3, x % y3->size());
    return up.rho[ug.join({gs[0], gm[0]})][a * n + m[0]].kronecker(
        up.rho[ug.join({gm[1], gm[2]})][m[1] * n + m[2]]);
  });
  GPtr b41 = groupoid::product(y3, y);
  const auto& g41 = *b41->group();
  std::vector<int> d2(b41->size());
  for (int x = 0; x < b41->size(); ++x) {
    auto m = sheaf::prod_split(fs3, x / n);
    int a = x % n;
    d2[x] = up.dims[m[0] * n + m[1]] * up.dims[m[2] * n + a];
  }
  Kernel k2;
  k2.y1 = y3;
  k2.y2 = y;
  k2.payload = Bundle::from_action(b41, d2, [&](int g, int x) {
    auto gs = g41.split(g);
    auto gm = g3.split(gs[0]);
    auto m = sheaf::prod_split(fs3, x / n);
    int a = x % n;
    return up.rho[ug.join({gm[0], gm[1]})][m[0] * n + m[1]].kronecker(
        up.rho[ug.join({gm[2], gs[1]})][m[2] * n + a]);
  });

  Chain c = make_chain({k1, k2});
  d.scomposite = c.result;

  // Canonical contraction: evaluate at the comma object ((a,a,a',a',a'),(e,e))
  // and read the unit coefficients at the identity label in the first, second
  // and last tensor slots.
  KernelMap m;
  m.src = d.scomposite;
  m.dst = d.unit.k;
  m.map.src = d.scomposite.payload;
  m.map.dst = up;
  int idg = ug.id();
  for (int p = 0; p < up.base->size(); ++p) {
    int a = p / n, a2 = p % n;
    std::vector<int> xs = {a, sheaf::prod_index(fs3, {a, a2, a2}), a2};
    int x = sheaf::prod_index(c.feet, xs);
    int idx = c.push.stalks[p].find({x, idg});
    QMat e = c.push.expand(p, idx, QMat::identity(c.push.stalks[p].dim));
    // Tensor slots at that point: U(a,a) ⊗ U(a2,a2) ⊗ U(a,a2) ⊗ U(a2,a2).
    int paa = a * n + a, pbb = a2 * n + a2, pab = a * n + a2;
    int j1 = d.unit.coord_of(paa, y->group()->id());
    int j2 = d.unit.coord_of(pbb, y->group()->id());
    int j4 = d.unit.coord_of(pbb, y->group()->id());
    int dab = up.dims[pab], dbb = up.dims[pbb];
    QMat mat(dab, e.cols());
    for (int i = 0; i < dab; ++i) {
      long row = ((long(j1) * up.dims[pbb] + j2) * dab + i) * dbb + j4;
      for (int cidx = 0; cidx < e.cols(); ++cidx) mat.at(i, cidx) = e.at(int(row), cidx);
    }
    m.map.mats.push_back(std::move(mat));
  }
  m.map.validate();
  if (!m.is_iso()) throw std::logic_error("duality zig-zag fails: contraction not invertible");
  d.to_unit = std::move(m);
  return d;
}

// ----------------------------------------------------------------- rotation

QMat rotation_iso(const Kernel& a, const Kernel& b) {
  if (!a.y2->same_as(*b.y1) || !b.y2->same_as(*a.y1))
    throw std::invalid_argument("rotation: feet do not close up");
  const auto& pg = *a.payload.base->group();
  const auto& qg = *b.payload.base->group();
  int n1 = a.y1->size(), n2 = a.y2->size();

  struct Flat {
    std::vector<long> off;
    long total = 0;
  };
  auto build_flat = [](const Kernel& k1, const Kernel& k2, int m1, int m2) {
    // components (y in foot1, z in foot2): K1(y,z) ⊗ K2(z,y)
    Flat f;
    f.off.assign(size_t(m1) * m2 + 1, 0);
    for (int y = 0; y < m1; ++y)
      for (int z = 0; z < m2; ++z) {
        size_t i = size_t(y) * m2 + z;
        f.off[i + 1] = f.off[i] + long(k1.stalk(y, z)) * k2.stalk(z, y);
      }
    f.total = f.off.back();
    return f;
  };
  Flat fab = build_flat(a, b, n1, n2);
  Flat fba = build_flat(b, a, n2, n1);

  auto invariants = [&](const Kernel& k1, const Kernel& k2, const Flat& f, int m1, int m2) {
    QMat stacked(0, int(f.total));
    for (int s : pg.generators()) {
      auto gs = pg.split(s);  // acts as (g1 on foot1 of k1, g2 on foot2)
      QMat mt(int(f.total), int(f.total));
      for (int y = 0; y < m1; ++y)
        for (int z = 0; z < m2; ++z) {
          size_t i = size_t(y) * m2 + z;
          int g1 = (&k1 == &a) ? gs[0] : gs[1];
          int g2 = (&k1 == &a) ? gs[1] : gs[0];
          const QMat& r1 = krho(k1, g1, g2, y, z);
          const QMat& r2 = krho(k2, g2, g1, z, y);
          QMat blk = r1.kronecker(r2);
          size_t j = size_t(k1.y1->act(g1, y)) * m2 + k1.y2->act(g2, z);
          for (int r = 0; r < blk.rows(); ++r)
            for (int c = 0; c < blk.cols(); ++c)
              mt.at(int(f.off[j]) + r, int(f.off[i]) + c) = blk.at(r, c);
        }
      stacked = stacked.vcat(mt - QMat::identity(int(f.total)));
    }
    return pg.generators().empty() ? QMat::identity(int(f.total)) : stacked.kernel_basis();
  };
  QMat bas_ab = invariants(a, b, fab, n1, n2);
  QMat bas_ba = invariants(b, a, fba, n2, n1);
  (void)qg;

  // Map a flat invariant family to the trace of the convolution.
  auto to_trace = [&](const Kernel& k1, const Kernel& k2, const Flat& f, const QMat& bas,
                      int m2) {
    Chain c = make_chain({k1, k2});
    TraceSpace tr = trace_lt_ag(c.result);
    const auto& og = *c.proj.cod->group();
    const auto& h2g = *k2.payload.base->group();
    int m1 = k1.y1->size();
    QMat amb(int(tr.diag.total_dim()), bas.cols());
    long off = 0;
    for (int yd = 0; yd < m1; ++yd) {
      int p = yd * m1 + yd;
      std::vector<QMat> rep_values;
      for (int ri : c.push.stalks[p].reps) {
        const CommaObj& o = c.push.stalks[p].objs[ri];
        auto xs = sheaf::prod_split(c.feet, o.x);
        auto hs = og.split(o.h);
        int mgrp = k1.y1->group()->mul(hs[1], k1.y1->group()->inv(hs[0]));
        const QMat& r2 = k2.payload.rho[h2g.join({k2.y1->group()->id(), mgrp})]
                                       [xs[1] * m1 + xs[0]];
        size_t comp = size_t(xs[0]) * m2 + xs[1];
        int d1 = k1.stalk(xs[0], xs[1]);
        QMat seg(int(f.off[comp + 1] - f.off[comp]), bas.cols());
        for (int r = 0; r < seg.rows(); ++r)
          for (int cc = 0; cc < bas.cols(); ++cc)
            seg.at(r, cc) = bas.at(int(f.off[comp]) + r, cc);
        rep_values.push_back(QMat::identity(d1).kronecker(r2) * seg);
      }
      QMat coords = c.push.coords_from_rep_values(p, rep_values);
      for (int r = 0; r < coords.rows(); ++r)
        for (int cc = 0; cc < coords.cols(); ++cc) amb.at(int(off) + r, cc) = coords.at(r, cc);
      off += c.push.stalks[p].dim;
    }
    return tr.coch.coords(amb);
  };
  QMat s_ab = to_trace(a, b, fab, bas_ab, n2);
  QMat s_ba = to_trace(b, a, fba, bas_ba, n1);
  require_square(s_ab, "rotation");
  auto s_ab_inv = s_ab.inverse();
  if (!s_ab_inv) throw std::logic_error("rotation: flat comparison not invertible");

  // Swap of tensor factors on the flat cell space, in invariant coordinates.
  QMat perm(int(fba.total), int(fab.total));
  for (int y = 0; y < n1; ++y)
    for (int z = 0; z < n2; ++z) {
      size_t i = size_t(y) * n2 + z;
      size_t j = size_t(z) * n1 + y;
      int d1 = a.stalk(y, z), d2 = b.stalk(z, y);
      for (int r = 0; r < d1; ++r)
        for (int c = 0; c < d2; ++c)
          perm.at(int(fba.off[j]) + c * d1 + r, int(fab.off[i]) + r * d2 + c) = 1;
    }
  QMat swapped = perm * bas_ab;
  auto x = bas_ba.solve(swapped);
  if (!x || bas_ba * *x != swapped) throw std::logic_error("rotation: swap leaves invariants");
  return s_ba * *x * *s_ab_inv;
}

// ------------------------------------------------- functoriality and classes

QMat trace_functoriality(const Kernel& h, const AdjointData& hadj, const Kernel& f1,
                         const Kernel& f2, const KernelMap& alpha) {
  const Kernel& kr = hadj.adjoint;
  Kernel f2kr = convolve(f2, kr);
  KernelMap m_left = kernel_compose(
      kernel_compose(kernel_compose(kernel_compose(right_unitor(f1).inverse(),
                                                   conv_map2(kernel_identity(f1), hadj.unit)),
                                    associator(f1, h, kr).inverse()),
                     conv_map2(alpha, kernel_identity(kr))),
      associator(h, f2, kr));
  TraceSpace t1 = trace_lt_ag(f1);
  TraceSpace t_mid1 = trace_lt_ag(convolve(h, convolve(f2, kr)));
  QMat q1 = trace_of_map(t1, t_mid1, m_left);
  QMat rot = rotation_iso(h, f2kr);
  KernelMap m_right = kernel_compose(
      kernel_compose(associator(f2, kr, h), conv_map2(kernel_identity(f2), hadj.counit)),
      right_unitor(f2));
  TraceSpace t_mid2 = trace_lt_ag(convolve(convolve(f2, kr), h));
  TraceSpace t2 = trace_lt_ag(f2);
  QMat q2 = trace_of_map(t_mid2, t2, m_right);
  return q2 * rot * q1;
}

QMat class_of(const Bundle& g, const std::vector<QMat>& alpha, const Kernel& k) {
  Kernel h = column_kernel(g);
  AdjointResult adj = kernel_right_adjoint(h);
  if (!adj.data)
    throw std::invalid_argument("class_of: column kernel has no right adjoint (" +
                                adj.diagnostic + ")");
  IdKernel upt = identity_kernel(FinGroupoid::point());
  Kernel hk = convolve(h, k);
  KernelMap ca;
  ca.src = h;
  ca.dst = hk;
  ca.map.src = h.payload;
  ca.map.dst = hk.payload;
  ca.map.mats = alpha;
  ca.map.validate();
  KernelMap alpha_hat = kernel_compose(left_unitor(h), ca);
  QMat m = trace_functoriality(h, *adj.data, upt.k, k, alpha_hat);
  TraceSpace t0 = trace_lt_ag(upt.k);
  QMat one(1, 1);
  one.at(0, 0) = 1;
  return m * t0.coch.coords(one);
}

// ------------------------------------------------------------ Beck–Chevalley

BCResult beck_chevalley_check(const Kernel& a, const Kernel& g, const Kernel& f,
                              const Kernel& b, const KernelMap& sigma, BCSide side) {
  AdjointResult adjf = kernel_right_adjoint(f);
  if (!adjf.data)
    throw std::invalid_argument("beck_chevalley: edge F has no adjoint (" + adjf.diagnostic + ")");
  AdjointResult adjg = kernel_right_adjoint(g);
  if (!adjg.data)
    throw std::invalid_argument("beck_chevalley: edge G has no adjoint (" + adjg.diagnostic + ")");
  const Kernel& fr = adjf.data->adjoint;
  const Kernel& gr = adjg.data->adjoint;
  KernelMap mate;
  if (side == BCSide::Right) {
    Kernel fra = convolve(fr, a);
    mate = kernel_compose(
        kernel_compose(
            kernel_compose(
                kernel_compose(
                    kernel_compose(
                        kernel_compose(right_unitor(fra).inverse(),
                                       conv_map2(kernel_identity(fra), adjg.data->unit)),
                        associator(fra, g, gr).inverse()),
                    conv_map2(associator(fr, a, g), kernel_identity(gr))),
                conv_map2(conv_map2(kernel_identity(fr), sigma), kernel_identity(gr))),
            conv_map2(associator(fr, f, b).inverse(), kernel_identity(gr))),
        kernel_compose(conv_map2(conv_map2(adjf.data->counit, kernel_identity(b)),
                                 kernel_identity(gr)),
                       conv_map2(left_unitor(b), kernel_identity(gr))));
  } else {
    if (!sigma.is_iso())
      throw std::invalid_argument("beck_chevalley: left mate needs an invertible square");
    KernelMap sigma_inv = sigma.inverse();
    // Left-adjoint data for F and G: the right adjoint of K^R, whose double
    // transpose has the same matrices as K.
    AdjointResult adjf2 = kernel_right_adjoint(fr);
    if (!adjf2.data)
      throw std::invalid_argument("beck_chevalley: edge F has no left adjoint (" +
                                  adjf2.diagnostic + ")");
    AdjointResult adjg2 = kernel_right_adjoint(gr);
    if (!adjg2.data)
      throw std::invalid_argument("beck_chevalley: edge G has no left adjoint (" +
                                  adjg2.diagnostic + ")");
    // Recast (K^R)^R as K: the payload matrices agree entry-by-entry.
    auto recast_unit = [](const KernelMap& u, const Kernel& left, const Kernel& orig) {
      Kernel dst = convolve(left, orig);
      KernelMap r;
      r.src = u.src;
      r.dst = dst;
      r.map.src = u.map.src;
      r.map.dst = dst.payload;
      r.map.mats = u.map.mats;
      return r;
    };
    auto recast_counit = [](const KernelMap& co, const Kernel& orig, const Kernel& right) {
      Kernel src = convolve(orig, right);
      KernelMap r;
      r.src = src;
      r.dst = co.dst;
      r.map.src = src.payload;
      r.map.dst = co.map.dst;
      r.map.mats = co.map.mats;
      return r;
    };
    KernelMap u_fl = recast_unit(adjf2.data->unit, fr, f);     // U_{Y3} -> F^R ⋆ F
    KernelMap co_gl = recast_counit(adjg2.data->counit, g, gr);  // G ⋆ G^R -> U_{Y2}
    Kernel bgr = convolve(b, gr);
    mate = kernel_compose(
        kernel_compose(
            kernel_compose(
                kernel_compose(
                    kernel_compose(
                        kernel_compose(left_unitor(bgr).inverse(),
                                       conv_map2(u_fl, kernel_identity(bgr))),
                        associator(fr, f, bgr)),
                    conv_map2(kernel_identity(fr), associator(f, b, gr).inverse())),
                conv_map2(kernel_identity(fr),
                          conv_map2(sigma_inv, kernel_identity(gr)))),
            conv_map2(kernel_identity(fr), associator(a, g, gr))),
        kernel_compose(conv_map2(kernel_identity(fr), conv_map2(kernel_identity(a), co_gl)),
                       conv_map2(kernel_identity(fr), right_unitor(a))));
  }
  BCResult res;
  res.pass = mate.is_iso();
  if (!res.pass) {
    for (size_t p = 0; p < mate.map.mats.size(); ++p)
      if (!mate.map.mats[p].invertible()) {
        res.witness = "mate not invertible at " + mate.map.src.base->label(int(p));
        break;
      }
  }
  res.mate = std::move(mate);
  return res;
}

}  // namespace fincat::kernel
