#include "fincat/sheafcalc.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fincat::sheaf {

using groupoid::FinGroup;
using groupoid::FinGroupoid;

// ---------------------------------------------------------------------- Fn0

std::string Fn0::str() const {
  std::ostringstream os;
  for (size_t i = 0; i < components.size(); ++i) {
    if (i) os << ", ";
    os << base->label(components[i].representative) << ": " << cs->str(values[i]);
  }
  return os.str();
}

bool Fn0::same_as(const Fn0& o) const {
  if (!base->same_as(*o.base) || values.size() != o.values.size()) return false;
  for (size_t i = 0; i < values.size(); ++i)
    if (!cs->eq(values[i], o.values[i])) return false;
  return true;
}

// ------------------------------------------------------------ product index

int prod_index(const std::vector<GPtr>& factors, const std::vector<int>& xs) {
  long idx = 0;
  for (size_t i = 0; i < factors.size(); ++i) idx = idx * factors[i]->size() + xs[i];
  return int(idx);
}

std::vector<int> prod_split(const std::vector<GPtr>& factors, int x) {
  std::vector<int> xs(factors.size());
  long rem = x;
  for (int i = int(factors.size()) - 1; i >= 0; --i) {
    xs[i] = int(rem % factors[i]->size());
    rem /= factors[i]->size();
  }
  return xs;
}

// --------------------------------------------------------------- Bundle

long Bundle::total_dim() const {
  long t = 0;
  for (int d : dims) t += d;
  return t;
}

long Bundle::ambient_offset(int x) const {
  long t = 0;
  for (int i = 0; i < x; ++i) t += dims[i];
  return t;
}

Bundle Bundle::trivial(GPtr y, int dim) {
  Bundle b;
  b.base = std::move(y);
  b.dims.assign(b.base->size(), dim);
  b.basis.resize(b.base->size());
  for (auto& labels : b.basis)
    for (int i = 0; i < dim; ++i) labels.push_back("e" + std::to_string(i));
  long n = b.base->group()->size();
  b.rho.assign(n, std::vector<QMat>(b.base->size(), QMat::identity(dim)));
  return b;
}

Bundle Bundle::from_action(GPtr y, std::vector<int> dims,
                           const std::function<QMat(int, int)>& act) {
  Bundle b;
  b.base = std::move(y);
  b.dims = std::move(dims);
  b.basis.resize(b.base->size());
  for (int x = 0; x < b.base->size(); ++x)
    for (int i = 0; i < b.dims[x]; ++i) b.basis[x].push_back("e" + std::to_string(i));
  long n = b.base->group()->size();
  b.rho.resize(n);
  for (long g = 0; g < n; ++g) {
    b.rho[g].reserve(b.base->size());
    for (int x = 0; x < b.base->size(); ++x) b.rho[g].push_back(act(int(g), x));
  }
  return b;
}

Bundle Bundle::from_generators(GPtr y, std::vector<int> dims, const std::vector<int>& gens,
                               const std::vector<std::vector<QMat>>& gen_mats) {
  const auto& grp = *y->group();
  Bundle b;
  b.base = y;
  b.dims = std::move(dims);
  b.basis.resize(y->size());
  for (int x = 0; x < y->size(); ++x)
    for (int i = 0; i < b.dims[x]; ++i) b.basis[x].push_back("e" + std::to_string(i));
  long n = grp.size();
  b.rho.assign(n, {});
  b.rho[grp.id()].clear();
  for (int x = 0; x < y->size(); ++x) b.rho[grp.id()].push_back(QMat::identity(b.dims[x]));
  // Breadth-first completion over the Cayley graph.
  std::vector<int> frontier = {grp.id()};
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int g : frontier)
      for (size_t si = 0; si < gens.size(); ++si) {
        int g2 = grp.mul(gens[si], g);
        if (!b.rho[g2].empty() || g2 == grp.id()) continue;
        b.rho[g2].reserve(y->size());
        for (int x = 0; x < y->size(); ++x)
          b.rho[g2].push_back(gen_mats[si][y->act(g, x)] * b.rho[g][x]);
        next.push_back(g2);
      }
    frontier = std::move(next);
  }
  for (long g = 0; g < n; ++g)
    if (b.rho[g].empty()) throw std::invalid_argument("bundle: generators do not generate the group");
  b.validate();
  return b;
}

Bundle Bundle::regular_rep(GroupPtr g) {
  GPtr y = FinGroupoid::one_point(g);
  Bundle b;
  b.base = y;
  b.dims = {int(g->size())};
  b.basis.resize(1);
  for (long i = 0; i < g->size(); ++i) b.basis[0].push_back(g->label(int(i)));
  b.rho.resize(g->size());
  for (long h = 0; h < g->size(); ++h) {
    QMat m(int(g->size()), int(g->size()));
    for (long k = 0; k < g->size(); ++k) m.at(g->mul(int(h), int(k)), int(k)) = 1;
    b.rho[h] = {std::move(m)};
  }
  return b;
}

void Bundle::validate() const {
  const auto& grp = *base->group();
  long n = grp.size();
  for (int x = 0; x < base->size(); ++x)
    if (!rho[grp.id()][x].is_identity())
      throw std::invalid_argument("bundle: rho(e) is not the identity at " + base->label(x));
  for (long g = 0; g < n; ++g)
    for (long h = 0; h < n; ++h) {
      int gh = grp.mul(int(g), int(h));
      for (int x = 0; x < base->size(); ++x)
        if (rho[gh][x] != rho[g][base->act(int(h), x)] * rho[h][x])
          throw std::invalid_argument("bundle: cocycle fails at (" + grp.label(int(g)) + "," +
                                      grp.label(int(h)) + "," + base->label(x) + ")");
    }
}

bool Bundle::same_shape(const Bundle& o) const {
  return base->same_as(*o.base) && dims == o.dims;
}

Bundle direct_sum(const Bundle& a, const Bundle& b) {
  if (!a.base->same_as(*b.base)) throw std::invalid_argument("direct_sum: base mismatch");
  Bundle r;
  r.base = a.base;
  r.dims.resize(a.dims.size());
  r.basis.resize(a.dims.size());
  for (size_t x = 0; x < a.dims.size(); ++x) {
    r.dims[x] = a.dims[x] + b.dims[x];
    for (const auto& l : a.basis[x]) r.basis[x].push_back("l." + l);
    for (const auto& l : b.basis[x]) r.basis[x].push_back("r." + l);
  }
  long n = a.base->group()->size();
  r.rho.resize(n);
  for (long g = 0; g < n; ++g)
    for (size_t x = 0; x < a.dims.size(); ++x)
      r.rho[g].push_back(block_diag({a.rho[g][x], b.rho[g][x]}));
  return r;
}

// -------------------------------------------------------------- BundleView

long BundleView::total_dim() const {
  long t = 0;
  for (int d : dims) t += d;
  return t;
}

BundleView view(const Bundle& b) {
  auto keep = std::make_shared<Bundle>(b);
  BundleView v;
  v.base = keep->base;
  v.dims = keep->dims;
  v.rho = [keep](int g, int x) { return keep->rho[g][x]; };
  return v;
}

BundleView memoized(BundleView v) {
  auto cache = std::make_shared<std::map<std::pair<int, int>, QMat>>();
  auto inner = v.rho;
  v.rho = [cache, inner](int g, int x) {
    auto it = cache->find({g, x});
    if (it != cache->end()) return it->second;
    return cache->emplace(std::make_pair(g, x), inner(g, x)).first->second;
  };
  return v;
}

// --------------------------------------------------------------- BundleMap

void BundleMap::validate() const {
  if (!src.base->same_as(*dst.base)) throw std::invalid_argument("bundle map: base mismatch");
  for (int x = 0; x < src.base->size(); ++x)
    if (mats[x].rows() != dst.dims[x] || mats[x].cols() != src.dims[x])
      throw std::invalid_argument("bundle map: shape mismatch at " + src.base->label(x));
  for (int s : src.base->group()->generators())
    for (int x = 0; x < src.base->size(); ++x)
      if (mats[src.base->act(s, x)] * src.rho[s][x] != dst.rho[s][x] * mats[x])
        throw std::invalid_argument("bundle map: equivariance fails at (" +
                                    src.base->group()->label(s) + "," + src.base->label(x) + ")");
}

bool BundleMap::is_iso() const {
  for (const auto& m : mats)
    if (!m.invertible()) return false;
  return true;
}

BundleMap BundleMap::inverse() const {
  BundleMap r;
  r.src = dst;
  r.dst = src;
  for (const auto& m : mats) {
    auto inv = m.inverse();
    if (!inv) throw std::invalid_argument("bundle map: not invertible");
    r.mats.push_back(std::move(*inv));
  }
  return r;
}

BundleMap identity_map(const Bundle& v) {
  BundleMap m;
  m.src = v;
  m.dst = v;
  for (int d : v.dims) m.mats.push_back(QMat::identity(d));
  return m;
}

BundleMap compose(const BundleMap& a, const BundleMap& b) {
  BundleMap r;
  r.src = a.src;
  r.dst = b.dst;
  for (size_t x = 0; x < a.mats.size(); ++x) r.mats.push_back(b.mats[x] * a.mats[x]);
  return r;
}

std::vector<BundleMap> hom_space(const Bundle& v, const Bundle& w) {
  if (!v.base->same_as(*w.base)) throw std::invalid_argument("hom_space: base mismatch");
  // Unknowns: entries of all per-point matrices. Constraints: equivariance
  // against a generating set.
  std::vector<long> off(v.dims.size() + 1, 0);
  for (size_t x = 0; x < v.dims.size(); ++x)
    off[x + 1] = off[x] + long(v.dims[x]) * w.dims[x];
  long nvar = off.back();
  const auto& gens = v.base->group()->generators();
  long nrows = 0;
  for (int s : gens)
    for (size_t x = 0; x < v.dims.size(); ++x) nrows += long(v.dims[x]) * w.dims[v.base->act(s, int(x))];
  QMat sys{int(nrows), int(nvar)};
  long r0 = 0;
  for (int s : gens)
    for (int x = 0; x < int(v.dims.size()); ++x) {
      int sx = v.base->act(s, x);
      // m[sx] * rho_v(s)_x - rho_w(s)_x * m[x] = 0
      const QMat& rv = v.rho[s][x];
      const QMat& rw = w.rho[s][x];
      // entry (i,j) of the constraint block, i < w.dims[sx], j < v.dims[x]
      for (int i = 0; i < w.dims[sx]; ++i)
        for (int j = 0; j < v.dims[x]; ++j) {
          long row = r0 + long(i) * v.dims[x] + j;
          for (int k = 0; k < v.dims[x]; ++k)
            sys.at(int(row), int(off[sx] + long(i) * v.dims[x] + k)) += rv.at(k, j);
          for (int k = 0; k < w.dims[x]; ++k)
            sys.at(int(row), int(off[x] + long(k) * v.dims[x] + j)) -= rw.at(i, k);
        }
      r0 += long(w.dims[sx]) * v.dims[x];
    }
  QMat ker = sys.kernel_basis();
  std::vector<BundleMap> out;
  for (int c = 0; c < ker.cols(); ++c) {
    BundleMap m;
    m.src = v;
    m.dst = w;
    for (size_t x = 0; x < v.dims.size(); ++x) {
      QMat mx(w.dims[x], v.dims[x]);
      for (int i = 0; i < w.dims[x]; ++i)
        for (int j = 0; j < v.dims[x]; ++j) mx.at(i, j) = ker.at(int(off[x] + long(i) * v.dims[x] + j), c);
      m.mats.push_back(std::move(mx));
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::optional<BundleMap> find_iso(const Bundle& v, const Bundle& w) {
  if (v.dims != w.dims) return std::nullopt;
  // Fast path: the identity family, when it happens to be equivariant.
  {
    BundleMap id;
    id.src = v;
    id.dst = w;
    bool ok = true;
    for (size_t x = 0; x < v.dims.size() && ok; ++x) id.mats.push_back(QMat::identity(v.dims[x]));
    for (int s : v.base->group()->generators())
      for (size_t x = 0; x < v.dims.size() && ok; ++x)
        if (v.rho[s][x] != w.rho[s][x]) ok = false;
    if (ok) return id;
  }
  auto basis = hom_space(v, w);
  for (auto& m : basis)
    if (m.is_iso()) return m;
  // Deterministic well-spread combinations; over Q a generic combination of a
  // spanning set of an iso-containing space is invertible.
  for (int t = 1; t <= 16; ++t) {
    BundleMap cand;
    cand.src = v;
    cand.dst = w;
    for (size_t x = 0; x < v.dims.size(); ++x) cand.mats.push_back(QMat(w.dims[x], v.dims[x]));
    unsigned long long state = 0x9e3779b97f4a7c15ull * (t + 1);
    for (size_t i = 0; i < basis.size(); ++i) {
      state = state * 6364136223846793005ull + 1442695040888963407ull;
      long c = long((state >> 33) % 4093) - 2046;
      if (c == 0) c = 1;
      for (size_t x = 0; x < cand.mats.size(); ++x)
        cand.mats[x] = cand.mats[x] + basis[i].mats[x].scaled(c);
    }
    if (cand.is_iso()) return cand;
  }
  return std::nullopt;
}

// ------------------------------------------------------------ pullback

Bundle pullback_shriek(const GroupoidMap& f, const Bundle& w) {
  if (!w.base->same_as(*f.cod)) throw std::invalid_argument("pullback: base mismatch");
  Bundle b;
  b.base = f.dom;
  b.dims.resize(f.dom->size());
  b.basis.resize(f.dom->size());
  for (int x = 0; x < f.dom->size(); ++x) {
    b.dims[x] = w.dims[f.obj[x]];
    b.basis[x] = w.basis[f.obj[x]];
  }
  long n = f.dom->group()->size();
  b.rho.resize(n);
  for (long g = 0; g < n; ++g)
    for (int x = 0; x < f.dom->size(); ++x) b.rho[g].push_back(w.rho[f.theta[g]][f.obj[x]]);
  return b;
}

// ------------------------------------------------------------ pushforward

int StalkPres::find(const CommaObj& o) const {
  auto it = std::lower_bound(objs.begin(), objs.end(), o);
  if (it == objs.end() || !(*it == o)) throw std::logic_error("comma object not in fiber");
  return int(it - objs.begin());
}

namespace {

// Quotient presentation of V / span(cols): a projection matrix to quotient
// coordinates and the chosen standard-vector lifts.
struct Quotient {
  QMat proj;   // qdim x d
  QMat lifts;  // d x qdim
};

Quotient coinvariant_quotient(const QMat& span_cols, int d) {
  QMat w = span_cols;
  std::vector<int> pivots = w.pivot_columns();
  // Basis of the span: pivot columns of span_cols.
  QMat wb(d, int(pivots.size()));
  for (size_t i = 0; i < pivots.size(); ++i)
    for (int r = 0; r < d; ++r) wb.at(r, int(i)) = span_cols.at(r, pivots[i]);
  // Extend deterministically by standard vectors.
  QMat full = wb;
  std::vector<int> chosen;
  for (int e = 0; e < d && full.cols() < d; ++e) {
    QMat cand(d, 1);
    cand.at(e, 0) = 1;
    QMat trial = full.hcat(cand);
    if (trial.rank() == trial.cols()) {
      full = trial;
      chosen.push_back(e);
    }
  }
  auto inv = full.inverse();
  if (!inv) throw std::logic_error("coinvariant basis extension failed");
  Quotient q;
  q.proj = QMat(int(chosen.size()), d);
  for (size_t i = 0; i < chosen.size(); ++i)
    for (int c = 0; c < d; ++c) q.proj.at(int(i), c) = inv->at(wb.cols() + int(i), c);
  q.lifts = QMat(d, int(chosen.size()));
  for (size_t i = 0; i < chosen.size(); ++i) q.lifts.at(chosen[i], int(i)) = 1;
  return q;
}

Pushforward pushforward_impl(const GroupoidMap& f, const BundleView& v, bool star) {
  if (!v.base->same_as(*f.dom)) throw std::invalid_argument("pushforward: base mismatch");
  const auto& gd = *f.dom->group();
  const auto& gc = *f.cod->group();
  Pushforward p;
  p.f = f;
  p.v = v;
  p.star = star;
  p.stalks.resize(f.cod->size());

  std::vector<int> dgens = gd.generators();
  if (dgens.empty()) dgens.push_back(gd.id());

  // Stabilizers of comma objects always lie in ker(theta): the arrow part of
  // the action multiplies h by theta(g) on one side, so fixing h forces
  // theta(g) = e. Enumerating only ker(theta) keeps big domain groups cheap.
  std::vector<int> kertheta;
  for (long g = 0; g < gd.size(); ++g)
    if (f.theta[g] == gc.id()) kertheta.push_back(int(g));

  for (int y = 0; y < f.cod->size(); ++y) {
    StalkPres& sp = p.stalks[y];
    for (int x = 0; x < f.dom->size(); ++x)
      for (long h = 0; h < gc.size(); ++h) {
        bool in = star ? (f.cod->act(int(h), y) == f.obj[x])
                       : (f.cod->act(int(h), f.obj[x]) == y);
        if (in) sp.objs.push_back({x, int(h)});
      }
    std::sort(sp.objs.begin(), sp.objs.end());
    int n = int(sp.objs.size());
    sp.rep_of.assign(n, -1);
    sp.transport.assign(n, gd.id());
    auto act_obj = [&](int g, const CommaObj& o) -> CommaObj {
      if (star) return {f.dom->act(g, o.x), gc.mul(f.theta[g], o.h)};
      return {f.dom->act(g, o.x), gc.mul(o.h, gc.inv(f.theta[g]))};
    };
    for (int i = 0; i < n; ++i) {
      if (sp.rep_of[i] >= 0) continue;
      int rep_idx = int(sp.reps.size());
      sp.reps.push_back(i);
      sp.rep_of[i] = rep_idx;
      std::vector<int> stack = {i};
      while (!stack.empty()) {
        int j = stack.back();
        stack.pop_back();
        for (int s : dgens) {
          CommaObj o2 = act_obj(s, sp.objs[j]);
          int j2 = sp.find(o2);
          if (sp.rep_of[j2] >= 0) continue;
          sp.rep_of[j2] = rep_idx;
          sp.transport[j2] = gd.mul(s, sp.transport[j]);
          stack.push_back(j2);
        }
      }
      // Stabilizer of the representative and its (co)invariants.
      std::vector<int> stab;
      for (int g : kertheta)
        if (f.dom->act(g, sp.objs[i].x) == sp.objs[i].x) stab.push_back(g);
      int d = v.dims[sp.objs[i].x];
      std::vector<int> sgens = groupoid::small_generating_set(gd, stab);
      if (star) {
        if (sgens.empty()) {
          sp.inv_basis.push_back(QMat::identity(d));
        } else {
          QMat stacked(0, d);
          for (int s : sgens) stacked = stacked.vcat(v.rho(s, sp.objs[i].x) - QMat::identity(d));
          sp.inv_basis.push_back(stacked.kernel_basis());
        }
        sp.dim += sp.inv_basis.back().cols();
      } else {
        if (sgens.empty()) {
          sp.proj.push_back(QMat::identity(d));
          sp.inv_basis.push_back(QMat::identity(d));
        } else {
          QMat span(d, 0);
          for (int s : sgens) span = span.hcat(v.rho(s, sp.objs[i].x) - QMat::identity(d));
          Quotient q = coinvariant_quotient(span, d);
          sp.proj.push_back(q.proj);
          sp.inv_basis.push_back(q.lifts);
        }
        sp.dim += sp.proj.back().rows();
      }
    }
  }

  // Assemble the output bundle.
  Bundle& out = p.bundle;
  out.base = f.cod;
  out.dims.resize(f.cod->size());
  out.basis.resize(f.cod->size());
  for (int y = 0; y < f.cod->size(); ++y) {
    out.dims[y] = p.stalks[y].dim;
    for (size_t r = 0; r < p.stalks[y].reps.size(); ++r) {
      const CommaObj& o = p.stalks[y].objs[p.stalks[y].reps[r]];
      int cnt = star ? p.stalks[y].inv_basis[r].cols() : p.stalks[y].proj[r].rows();
      for (int j = 0; j < cnt; ++j)
        out.basis[y].push_back("(" + f.dom->label(o.x) + ";" + gc.label(o.h) + ")#" +
                               std::to_string(j));
    }
  }
  out.rho.resize(gc.size());
  for (long k = 0; k < gc.size(); ++k) {
    out.rho[k].resize(f.cod->size());
    for (int y = 0; y < f.cod->size(); ++y) {
      int ky = f.cod->act(int(k), y);
      const StalkPres& spk = p.stalks[ky];
      if (star) {
        // Section relabeling: s'_{(x,h)} at ky = s_{(x, h*k)} at y.
        std::vector<QMat> rep_values;
        for (size_t r = 0; r < spk.reps.size(); ++r) {
          const CommaObj& o = spk.objs[spk.reps[r]];
          CommaObj pre{o.x, gc.mul(o.h, int(k))};
          int idx = p.stalks[y].find(pre);
          // Value of each stalk-y basis section at `pre`.
          rep_values.push_back(p.expand(y, idx, QMat::identity(p.stalks[y].dim)));
        }
        out.rho[k][y] = p.coords_from_rep_values(ky, rep_values);
      } else {
        // Generator relabeling: [val at (x,h)] at y -> [val at (x, k*h)] at ky.
        QMat m(spk.dim, p.stalks[y].dim);
        const StalkPres& spy = p.stalks[y];
        int col0 = 0;
        for (size_t r = 0; r < spy.reps.size(); ++r) {
          const CommaObj& o = spy.objs[spy.reps[r]];
          CommaObj img{o.x, gc.mul(int(k), o.h)};
          QMat cls = p.classof(ky, spk.find(img), spy.inv_basis[r]);
          for (int i = 0; i < cls.rows(); ++i)
            for (int j = 0; j < cls.cols(); ++j) m.at(i, col0 + j) = cls.at(i, j);
          col0 += cls.cols();
        }
        out.rho[k][y] = std::move(m);
      }
    }
  }
  return p;
}

}  // namespace

QMat Pushforward::expand(int y, int obj, const QMat& coords) const {
  const StalkPres& sp = stalks[y];
  int r = sp.rep_of[obj];
  int g = sp.transport[obj];
  // Block of coordinates belonging to representative r.
  int b0 = 0;
  for (int i = 0; i < r; ++i) b0 += sp.inv_basis[i].cols();
  int bw = sp.inv_basis[r].cols();
  QMat block(bw, coords.cols());
  for (int i = 0; i < bw; ++i)
    for (int j = 0; j < coords.cols(); ++j) block.at(i, j) = coords.at(b0 + i, j);
  const CommaObj& rep = sp.objs[sp.reps[r]];
  return v.rho(g, rep.x) * (sp.inv_basis[r] * block);
}

QMat Pushforward::coords_from_rep_values(int y, const std::vector<QMat>& rep_values) const {
  const StalkPres& sp = stalks[y];
  std::vector<QMat> blocks;
  QMat stacked(0, rep_values.empty() ? 0 : rep_values[0].cols());
  for (size_t r = 0; r < sp.reps.size(); ++r) {
    blocks.push_back(sp.inv_basis[r]);
    stacked = r == 0 ? rep_values[0] : stacked.vcat(rep_values[r]);
  }
  if (sp.reps.empty()) return QMat(0, stacked.cols());
  QMat bd = block_diag(blocks);
  auto sol = bd.solve(stacked);
  if (!sol) throw std::invalid_argument("pushforward: values are not a section");
  // Residual check (solve() only guarantees consistency of the system).
  if (bd * *sol != stacked) throw std::invalid_argument("pushforward: values are not a section");
  return *sol;
}

QMat Pushforward::coords_from_values(int y, const std::vector<QMat>& values) const {
  const StalkPres& sp = stalks[y];
  std::vector<QMat> rep_values;
  for (int r : sp.reps) rep_values.push_back(values[r]);
  QMat c = coords_from_rep_values(y, rep_values);
  for (size_t i = 0; i < sp.objs.size(); ++i)
    if (expand(y, int(i), c) != values[i])
      throw std::invalid_argument("pushforward: incompatible value tuple");
  return c;
}

QMat Pushforward::classof(int y, int obj, const QMat& value) const {
  const StalkPres& sp = stalks[y];
  int r = sp.rep_of[obj];
  int g = sp.transport[obj];
  const CommaObj& rep = sp.objs[sp.reps[r]];
  QMat at_rep = v.rho(f.dom->group()->inv(g), f.dom->act(g, rep.x)) * value;
  QMat local = sp.proj[r] * at_rep;
  int b0 = 0;
  for (int i = 0; i < r; ++i) b0 += sp.proj[i].rows();
  QMat out(sp.dim, value.cols());
  for (int i = 0; i < local.rows(); ++i)
    for (int j = 0; j < local.cols(); ++j) out.at(b0 + i, j) = local.at(i, j);
  return out;
}

Pushforward pushforward_star(const GroupoidMap& f, const Bundle& v) {
  return pushforward_impl(f, view(v), true);
}

Pushforward pushforward_bang(const GroupoidMap& f, const Bundle& v) {
  return pushforward_impl(f, view(v), false);
}

Pushforward pushforward_triangle(const GroupoidMap& f, const Bundle& v) {
  return pushforward_impl(f, view(v), true);
}

Pushforward pushforward_star(const GroupoidMap& f, const BundleView& v) {
  return pushforward_impl(f, v, true);
}

Pushforward pushforward_bang(const GroupoidMap& f, const BundleView& v) {
  return pushforward_impl(f, v, false);
}

// ----------------------------------------------------------------- norm map

BundleMap norm_map(const Pushforward& bang, const Pushforward& star) {
  const GroupoidMap& f = bang.f;
  const auto& gd = *f.dom->group();
  const auto& gc = *f.cod->group();
  BundleMap nm;
  nm.src = bang.bundle;
  nm.dst = star.bundle;
  for (int y = 0; y < f.cod->size(); ++y) {
    const StalkPres& sb = bang.stalks[y];
    QMat m(star.stalks[y].dim, sb.dim);
    int col0 = 0;
    for (size_t r = 0; r < sb.reps.size(); ++r) {
      const CommaObj& o = sb.objs[sb.reps[r]];  // h * u(x) = y
      const QMat& lifts = sb.inv_basis[r];      // values in V_x
      // Section over {(x',k): k*y = u(x')}: sum over g with g.x = x',
      // theta(g) = k*h of rho(g) * value.
      std::vector<QMat> rep_values;
      for (size_t r2 = 0; r2 < star.stalks[y].reps.size(); ++r2) {
        const CommaObj& t = star.stalks[y].objs[star.stalks[y].reps[r2]];
        QMat acc(bang.v.dims[t.x], lifts.cols());
        int kh = gc.mul(t.h, o.h);
        for (long g = 0; g < gd.size(); ++g)
          if (f.dom->act(int(g), o.x) == t.x && f.theta[g] == kh)
            acc = acc + bang.v.rho(int(g), o.x) * lifts;
        rep_values.push_back(std::move(acc));
      }
      QMat c = star.coords_from_rep_values(y, rep_values);
      for (int i = 0; i < c.rows(); ++i)
        for (int j = 0; j < c.cols(); ++j) m.at(i, col0 + j) = c.at(i, j);
      col0 += lifts.cols();
    }
    nm.mats.push_back(std::move(m));
  }
  return nm;
}

BundleMap norm_map(const GroupoidMap& f, const Bundle& v) {
  return norm_map(pushforward_bang(f, v), pushforward_star(f, v));
}

// ---------------------------------------------------------------- omega map

std::pair<coeff::Matrix, bool> omega_map(const GPtr& y, const CSPtr& cs) {
  auto orbits = groupoid::pi0_with_aut(*y);
  std::vector<std::string> labels;
  for (const auto& o : orbits) labels.push_back(y->label(o.representative));
  coeff::Matrix m(cs, labels, labels);
  bool tame = true;
  for (size_t i = 0; i < orbits.size(); ++i) {
    coeff::Coeff e = cs->from_int(orbits[i].automorphism_order);
    m.at(int(i), int(i)) = e;
    if (!cs->invertible(e)) tame = false;
  }
  return {std::move(m), tame};
}

// ------------------------------------------------------------- tensor, dual

Bundle external_product(const Bundle& v1, const Bundle& v2) {
  std::vector<GPtr> feet = {v1.base, v2.base};
  GPtr base = groupoid::product(feet);
  const auto& grp = *base->group();
  Bundle b;
  b.base = base;
  b.dims.resize(base->size());
  b.basis.resize(base->size());
  for (int x = 0; x < base->size(); ++x) {
    auto xs = prod_split(feet, x);
    b.dims[x] = v1.dims[xs[0]] * v2.dims[xs[1]];
    for (const auto& l1 : v1.basis[xs[0]])
      for (const auto& l2 : v2.basis[xs[1]]) b.basis[x].push_back(l1 + "*" + l2);
  }
  b.rho.resize(grp.size());
  for (long g = 0; g < grp.size(); ++g) {
    auto gs = grp.split(int(g));
    for (int x = 0; x < base->size(); ++x) {
      auto xs = prod_split(feet, x);
      b.rho[g].push_back(v1.rho[gs[0]][xs[0]].kronecker(v2.rho[gs[1]][xs[1]]));
    }
  }
  return b;
}

Bundle tensor_shriek(const Bundle& v, const Bundle& w) {
  if (!v.base->same_as(*w.base)) throw std::invalid_argument("tensor: base mismatch");
  Bundle b;
  b.base = v.base;
  b.dims.resize(v.dims.size());
  b.basis.resize(v.dims.size());
  for (size_t x = 0; x < v.dims.size(); ++x) {
    b.dims[x] = v.dims[x] * w.dims[x];
    for (const auto& l1 : v.basis[x])
      for (const auto& l2 : w.basis[x]) b.basis[x].push_back(l1 + "*" + l2);
  }
  long n = v.base->group()->size();
  b.rho.resize(n);
  for (long g = 0; g < n; ++g)
    for (size_t x = 0; x < v.dims.size(); ++x)
      b.rho[g].push_back(v.rho[g][x].kronecker(w.rho[g][x]));
  return b;
}

Bundle verdier_dual(const Bundle& v) {
  Bundle b;
  b.base = v.base;
  b.dims = v.dims;
  b.basis.resize(v.dims.size());
  for (size_t x = 0; x < v.dims.size(); ++x)
    for (const auto& l : v.basis[x]) b.basis[x].push_back(l + "^");
  long n = v.base->group()->size();
  const auto& grp = *v.base->group();
  b.rho.resize(n);
  for (long g = 0; g < n; ++g)
    for (size_t x = 0; x < v.dims.size(); ++x)
      b.rho[g].push_back(v.rho[grp.inv(int(g))][v.base->act(int(g), int(x))].transpose());
  return b;
}

// ----------------------------------------------------------------- cochains

Cochains cochains_triangle(const GPtr& y, const Bundle& v) {
  GroupoidMap p;
  p.dom = y;
  p.cod = FinGroupoid::point();
  p.theta.assign(y->group()->size(), 0);
  p.obj.assign(y->size(), 0);
  Cochains c;
  c.v = v;
  c.push = pushforward_star(p, v);
  c.dim = c.push.stalks[0].dim;
  const StalkPres& sp = c.push.stalks[0];
  c.labels = c.push.bundle.basis[0];
  // Ambient basis: each stalk coordinate expanded at every comma object
  // (x, e) and stacked in carrier order.
  c.basis = QMat(int(v.total_dim()), c.dim);
  for (size_t i = 0; i < sp.objs.size(); ++i) {
    QMat vals = c.push.expand(0, int(i), QMat::identity(c.dim));
    long o = v.ambient_offset(sp.objs[i].x);
    for (int r = 0; r < vals.rows(); ++r)
      for (int j = 0; j < c.dim; ++j) c.basis.at(int(o + r), j) = vals.at(r, j);
  }
  return c;
}

QMat Cochains::coords(const QMat& ambient) const {
  auto sol = basis.solve(ambient);
  if (!sol || basis * *sol != ambient)
    throw std::invalid_argument("cochains: vector is not an invariant section");
  return *sol;
}

// --------------------------------------------------- base change / proj fmla

CheckResult base_change_check(const GroupoidMap& f, const GroupoidMap& g, const Bundle& v) {
  auto sq = groupoid::iso_comma_square(f, g);
  Pushforward fv = pushforward_star(f, v);
  Bundle lhs = pullback_shriek(g, fv.bundle);
  Bundle pb = pullback_shriek(sq.to_f_dom, v);
  Pushforward rhs = pushforward_star(sq.to_g_dom, pb);
  const auto& gc = *f.cod->group();
  for (int b = 0; b < g.dom->size(); ++b) {
    if (lhs.dims[b] != rhs.bundle.dims[b])
      return {false, "stalk dimension mismatch at " + g.dom->label(b) + ": " +
                         std::to_string(lhs.dims[b]) + " vs " +
                         std::to_string(rhs.bundle.dims[b])};
    // Canonical map: a section s over (g(b)/f) restricts to the apex fiber by
    // S_{((a,b',k),m)} = s_{(a, k^{-1} theta_g(m))}.
    int gb = g.obj[b];
    std::vector<QMat> rep_values;
    const StalkPres& sp = rhs.stalks[b];
    for (size_t r = 0; r < sp.reps.size(); ++r) {
      const CommaObj& o = sp.objs[sp.reps[r]];  // (apex object index, m)
      auto [a, b2, k] = sq.triples[o.x];
      int h = gc.mul(gc.inv(k), g.theta[o.h]);
      int idx;
      try {
        idx = fv.stalks[gb].find({a, h});
      } catch (const std::logic_error&) {
        return {false, "comparison map leaves the comma fiber at " + g.dom->label(b)};
      }
      rep_values.push_back(fv.expand(gb, idx, QMat::identity(fv.stalks[gb].dim)));
    }
    QMat cmp;
    try {
      cmp = rhs.coords_from_rep_values(b, rep_values);
    } catch (const std::invalid_argument&) {
      return {false, "comparison is not a section at " + g.dom->label(b)};
    }
    if (!cmp.invertible())
      return {false, "comparison map not invertible at " + g.dom->label(b)};
  }
  return {true, ""};
}

CheckResult projection_formula_check(const GroupoidMap& f, const Bundle& v, const Bundle& w) {
  Pushforward fv = pushforward_star(f, v);
  Bundle lhs = tensor_shriek(fv.bundle, w);
  Bundle inner = tensor_shriek(v, pullback_shriek(f, w));
  Pushforward rhs = pushforward_star(f, inner);
  for (int y = 0; y < f.cod->size(); ++y) {
    if (lhs.dims[y] != rhs.bundle.dims[y])
      return {false, "stalk dimension mismatch at " + f.cod->label(y)};
    // s ⊗ w  ->  section (x,h) -> s_{(x,h)} ⊗ rho_W(h) w.
    const StalkPres& sp = rhs.stalks[y];
    std::vector<QMat> rep_values;
    for (size_t r = 0; r < sp.reps.size(); ++r) {
      const CommaObj& o = sp.objs[sp.reps[r]];
      QMat sv = fv.expand(y, fv.stalks[y].find(o), QMat::identity(fv.stalks[y].dim));
      rep_values.push_back(sv.kronecker(w.rho[o.h][y]));
    }
    QMat cmp;
    try {
      cmp = rhs.coords_from_rep_values(y, rep_values);
    } catch (const std::invalid_argument&) {
      return {false, "comparison is not a section at " + f.cod->label(y)};
    }
    if (!cmp.invertible())
      return {false, "comparison map not invertible at " + f.cod->label(y)};
  }
  return {true, ""};
}

// -------------------------------------------------------------- adjunctions

BundleMap star_unit(const GroupoidMap& f, const Bundle& w) {
  Bundle pb = pullback_shriek(f, w);
  Pushforward p = pushforward_star(f, pb);
  BundleMap u;
  u.src = w;
  u.dst = p.bundle;
  for (int y = 0; y < f.cod->size(); ++y) {
    const StalkPres& sp = p.stalks[y];
    std::vector<QMat> rep_values;
    for (size_t r = 0; r < sp.reps.size(); ++r) {
      const CommaObj& o = sp.objs[sp.reps[r]];
      rep_values.push_back(w.rho[o.h][y]);  // w -> section (x,h) -> rho(h) w
    }
    u.mats.push_back(p.coords_from_rep_values(y, rep_values));
  }
  return u;
}

BundleMap star_counit(const GroupoidMap& f, const Bundle& v) {
  Pushforward p = pushforward_star(f, v);
  Bundle pb = pullback_shriek(f, p.bundle);
  BundleMap c;
  c.src = pb;
  c.dst = v;
  for (int x = 0; x < f.dom->size(); ++x) {
    int y = f.obj[x];
    int idx = p.stalks[y].find({x, f.cod->group()->id()});
    c.mats.push_back(p.expand(y, idx, QMat::identity(p.stalks[y].dim)));
  }
  return c;
}

BundleMap star_adjunct(const GroupoidMap& f, const Bundle& w, const Pushforward& fv,
                       const std::vector<QMat>& phi) {
  BundleMap m;
  m.src = w;
  m.dst = fv.bundle;
  for (int y = 0; y < f.cod->size(); ++y) {
    const StalkPres& sp = fv.stalks[y];
    std::vector<QMat> rep_values;
    for (size_t r = 0; r < sp.reps.size(); ++r) {
      const CommaObj& o = sp.objs[sp.reps[r]];
      rep_values.push_back(phi[o.x] * w.rho[o.h][y]);
    }
    m.mats.push_back(fv.coords_from_rep_values(y, rep_values));
  }
  return m;
}

BundleMap compose_star_iso(const GroupoidMap& f, const GroupoidMap& g, const Bundle& v) {
  GroupoidMap gf = groupoid::compose(f, g);
  Pushforward whole = pushforward_star(gf, v);
  Pushforward inner = pushforward_star(f, v);
  Pushforward outer = pushforward_star(g, inner.bundle);
  BundleMap m;
  m.src = whole.bundle;
  m.dst = outer.bundle;
  for (int z = 0; z < g.cod->size(); ++z) {
    const StalkPres& sp = outer.stalks[z];
    std::vector<QMat> rep_values;
    for (size_t r = 0; r < sp.reps.size(); ++r) {
      const CommaObj& o = sp.objs[sp.reps[r]];  // (y in dom(g), k: k.z = g(y))
      // Value in (f_* V)_y: the section x' -> whole-section at (x', k) read
      // through the fiber of f at y.
      const StalkPres& spf = inner.stalks[o.x];
      std::vector<QMat> inner_rep_values;
      for (size_t r2 = 0; r2 < spf.reps.size(); ++r2) {
        const CommaObj& q = spf.objs[spf.reps[r2]];  // (x, h: h.y = f(x))
        int hk = gf.cod->group()->mul(g.theta[q.h], o.h);
        int idx = whole.stalks[z].find({q.x, hk});
        inner_rep_values.push_back(whole.expand(z, idx, QMat::identity(whole.stalks[z].dim)));
      }
      rep_values.push_back(inner.coords_from_rep_values(o.x, inner_rep_values));
    }
    m.mats.push_back(outer.coords_from_rep_values(z, rep_values));
  }
  return m;
}

}  // namespace fincat::sheaf
