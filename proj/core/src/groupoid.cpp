#include "fincat/groupoid.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fincat::groupoid {

GroupPtr FinGroup::from_table(std::vector<std::string> labels,
                              std::vector<std::vector<int>> mult, int identity) {
  auto g = std::shared_ptr<FinGroup>(new FinGroup());
  int n = int(labels.size());
  g->size_ = n;
  g->id_ = identity;
  g->labels_ = std::move(labels);
  g->mult_ = std::move(mult);
  if (int(g->mult_.size()) != n) throw std::invalid_argument("group: malformed table");
  for (auto& row : g->mult_)
    if (int(row.size()) != n) throw std::invalid_argument("group: malformed table row");
  // Identity and inverse laws.
  g->inv_.assign(n, -1);
  for (int a = 0; a < n; ++a) {
    if (g->mult_[identity][a] != a || g->mult_[a][identity] != a)
      throw std::invalid_argument("group: identity law fails at " + g->labels_[a]);
    for (int b = 0; b < n; ++b)
      if (g->mult_[a][b] == identity && g->mult_[b][a] == identity) g->inv_[a] = b;
    if (g->inv_[a] < 0) throw std::invalid_argument("group: no inverse for " + g->labels_[a]);
  }
  // Associativity, exhaustive.
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (g->mult_[g->mult_[a][b]][c] != g->mult_[a][g->mult_[b][c]])
          throw std::invalid_argument("group: associativity fails at (" + g->labels_[a] + "," +
                                      g->labels_[b] + "," + g->labels_[c] + ")");
  return g;
}

GroupPtr FinGroup::trivial() {
  static GroupPtr t = from_table({"e"}, {{0}}, 0);
  return t;
}

GroupPtr FinGroup::cyclic(int n) {
  std::vector<std::string> labels;
  std::vector<std::vector<int>> mult(n, std::vector<int>(n));
  for (int i = 0; i < n; ++i) {
    labels.push_back("r" + std::to_string(i));
    for (int j = 0; j < n; ++j) mult[i][j] = (i + j) % n;
  }
  return from_table(std::move(labels), std::move(mult), 0);
}

GroupPtr FinGroup::symmetric(int n) {
  if (n < 1 || n > 5) throw std::invalid_argument("symmetric: n out of range");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> perms;
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  auto key = [&](const std::vector<int>& p) {
    int k = 0;
    for (int v : p) k = k * n + v;
    return k;
  };
  std::map<int, int> index;
  for (size_t i = 0; i < perms.size(); ++i) index[key(perms[i])] = int(i);
  int m = int(perms.size());
  std::vector<std::string> labels;
  std::vector<std::vector<int>> mult(m, std::vector<int>(m));
  for (int i = 0; i < m; ++i) {
    std::string s = "s";
    for (int v : perms[i]) s += std::to_string(v);
    labels.push_back(s);
    for (int j = 0; j < m; ++j) {
      std::vector<int> comp(n);
      for (int x = 0; x < n; ++x) comp[x] = perms[i][perms[j][x]];
      mult[i][j] = index[key(comp)];
    }
  }
  return from_table(std::move(labels), std::move(mult), 0);
}

GroupPtr FinGroup::direct_product(std::vector<GroupPtr> factors) {
  if (factors.empty()) return trivial();
  if (factors.size() == 1) return factors[0];
  auto g = std::shared_ptr<FinGroup>(new FinGroup());
  g->factors_ = std::move(factors);
  long size = 1;
  for (const auto& f : g->factors_) size *= f->size();
  g->size_ = size;
  g->strides_.resize(g->factors_.size());
  long s = 1;
  for (int i = int(g->factors_.size()) - 1; i >= 0; --i) {
    g->strides_[i] = s;
    s *= g->factors_[i]->size();
  }
  std::vector<int> ids;
  for (const auto& f : g->factors_) ids.push_back(f->id());
  g->id_ = g->join(ids);
  return g;
}

std::vector<int> FinGroup::split(int a) const {
  std::vector<int> parts(factors_.size());
  for (size_t i = 0; i < factors_.size(); ++i) {
    parts[i] = int((a / strides_[i]) % factors_[i]->size());
  }
  return parts;
}

int FinGroup::join(const std::vector<int>& parts) const {
  long a = 0;
  for (size_t i = 0; i < factors_.size(); ++i) a += parts[i] * strides_[i];
  return int(a);
}

int FinGroup::mul(int a, int b) const {
  if (!is_product()) return mult_[a][b];
  auto pa = split(a), pb = split(b);
  std::vector<int> pc(pa.size());
  for (size_t i = 0; i < pa.size(); ++i) pc[i] = factors_[i]->mul(pa[i], pb[i]);
  return join(pc);
}

int FinGroup::inv(int a) const {
  if (!is_product()) return inv_[a];
  auto pa = split(a);
  std::vector<int> pc(pa.size());
  for (size_t i = 0; i < pa.size(); ++i) pc[i] = factors_[i]->inv(pa[i]);
  return join(pc);
}

std::string FinGroup::label(int a) const {
  if (!is_product()) return labels_[a];
  auto pa = split(a);
  std::string s = "(";
  for (size_t i = 0; i < pa.size(); ++i) s += (i ? "," : "") + factors_[i]->label(pa[i]);
  return s + ")";
}

const std::vector<int>& FinGroup::generators() const {
  if (!gens_.empty() || size_ == 1) return gens_;
  if (is_product()) {
    for (size_t i = 0; i < factors_.size(); ++i) {
      std::vector<int> parts;
      for (const auto& f : factors_) parts.push_back(f->id());
      for (int s : factors_[i]->generators()) {
        parts[i] = s;
        gens_.push_back(join(parts));
      }
      // restore not needed; parts rebuilt next loop
    }
    return gens_;
  }
  std::vector<int> all(size_);
  std::iota(all.begin(), all.end(), 0);
  gens_ = small_generating_set(*this, all);
  return gens_;
}

bool FinGroup::same_as(const FinGroup& o) const {
  if (this == &o) return true;
  if (size_ != o.size_ || id_ != o.id_) return false;
  if (is_product() != o.is_product()) return false;
  if (is_product()) {
    if (factors_.size() != o.factors_.size()) return false;
    for (size_t i = 0; i < factors_.size(); ++i)
      if (!factors_[i]->same_as(*o.factors_[i])) return false;
    return true;
  }
  return labels_ == o.labels_ && mult_ == o.mult_;
}

std::vector<int> small_generating_set(const FinGroup& g, const std::vector<int>& elements) {
  std::set<int> target(elements.begin(), elements.end());
  std::vector<int> gens;
  std::set<int> closure = {g.id()};
  auto grow = [&](int s) {
    // closure of current gens with s added
    std::vector<int> frontier(closure.begin(), closure.end());
    std::vector<int> withs = gens;
    withs.push_back(s);
    while (!frontier.empty()) {
      std::vector<int> next;
      for (int a : frontier)
        for (int t : withs) {
          int b = g.mul(a, t);
          if (closure.insert(b).second) next.push_back(b);
        }
      frontier = std::move(next);
    }
  };
  for (int e : elements) {
    if (closure.count(e)) continue;
    gens.push_back(e);
    grow(e);
  }
  return gens;
}

// ---------------------------------------------------------------------------

FinGroupoid::FinGroupoid(std::vector<std::string> carrier, GroupPtr group,
                         std::vector<std::vector<int>> action)
    : carrier_(std::move(carrier)), group_(std::move(group)), action_(std::move(action)) {
  if (long(action_.size()) != group_->size())
    throw std::invalid_argument("groupoid: action table size mismatch");
  for (auto& row : action_)
    if (row.size() != carrier_.size())
      throw std::invalid_argument("groupoid: action row size mismatch");
}

GPtr FinGroupoid::discrete(std::vector<std::string> labels) {
  std::vector<int> idrow(labels.size());
  std::iota(idrow.begin(), idrow.end(), 0);
  return std::make_shared<FinGroupoid>(std::move(labels), FinGroup::trivial(),
                                       std::vector<std::vector<int>>{idrow});
}

GPtr FinGroupoid::one_point(GroupPtr g) {
  std::vector<std::vector<int>> action(g->size(), std::vector<int>{0});
  return std::make_shared<FinGroupoid>(std::vector<std::string>{"pt"}, std::move(g),
                                       std::move(action));
}

GPtr FinGroupoid::point() {
  static GPtr p = discrete({"pt"});
  return p;
}

bool FinGroupoid::same_as(const FinGroupoid& o) const {
  if (this == &o) return true;
  return carrier_ == o.carrier_ && group_->same_as(*o.group_) && action_ == o.action_;
}

void FinGroupoid::validate() const {
  long n = group_->size();
  for (int x = 0; x < size(); ++x)
    if (act(group_->id(), x) != x)
      throw std::invalid_argument("groupoid: identity does not fix " + carrier_[x]);
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h) {
      int gh = group_->mul(g, h);
      for (int x = 0; x < size(); ++x)
        if (act(gh, x) != act(g, act(h, x)))
          throw std::invalid_argument("groupoid: action law fails at (" + group_->label(g) +
                                      "," + group_->label(h) + "," + carrier_[x] + ")");
    }
}

GroupoidMap GroupoidMap::identity(GPtr y) {
  GroupoidMap m;
  m.dom = y;
  m.cod = y;
  m.theta.resize(y->group()->size());
  std::iota(m.theta.begin(), m.theta.end(), 0);
  m.obj.resize(y->size());
  std::iota(m.obj.begin(), m.obj.end(), 0);
  return m;
}

void GroupoidMap::validate() const {
  long n = dom->group()->size();
  if (long(theta.size()) != n || int(obj.size()) != dom->size())
    throw std::invalid_argument("groupoid map: size mismatch");
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h)
      if (theta[dom->group()->mul(g, h)] != cod->group()->mul(theta[g], theta[h]))
        throw std::invalid_argument("groupoid map: theta is not a homomorphism");
  for (int g = 0; g < n; ++g)
    for (int x = 0; x < dom->size(); ++x)
      if (obj[dom->act(g, x)] != cod->act(theta[g], obj[x]))
        throw std::invalid_argument("groupoid map: equivariance fails");
}

GroupoidMap compose(const GroupoidMap& f, const GroupoidMap& g) {
  if (!f.cod->same_as(*g.dom))
    throw std::invalid_argument("compose: codomain/domain mismatch");
  GroupoidMap m;
  m.dom = f.dom;
  m.cod = g.cod;
  m.theta.resize(f.theta.size());
  for (size_t i = 0; i < f.theta.size(); ++i) m.theta[i] = g.theta[f.theta[i]];
  m.obj.resize(f.obj.size());
  for (size_t i = 0; i < f.obj.size(); ++i) m.obj[i] = g.obj[f.obj[i]];
  return m;
}

std::vector<OrbitInfo> pi0_with_aut(const FinGroupoid& y) {
  int n = y.size();
  std::vector<int> comp(n, -1);
  std::vector<OrbitInfo> orbits;
  const auto& gens = y.group()->generators();
  for (int x0 = 0; x0 < n; ++x0) {
    if (comp[x0] >= 0) continue;
    OrbitInfo o;
    o.representative = x0;
    std::vector<int> stack = {x0};
    comp[x0] = int(orbits.size());
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      o.members.push_back(x);
      for (int s : gens) {
        int x2 = y.act(s, x);
        if (comp[x2] < 0) {
          comp[x2] = int(orbits.size());
          stack.push_back(x2);
        }
      }
    }
    std::sort(o.members.begin(), o.members.end());
    long stab = 0;
    for (long g = 0; g < y.group()->size(); ++g)
      if (y.act(int(g), x0) == x0) ++stab;
    o.automorphism_order = stab;
    orbits.push_back(std::move(o));
  }
  return orbits;
}

GPtr product(const std::vector<GPtr>& factors) {
  if (factors.empty()) return FinGroupoid::point();
  if (factors.size() == 1) return factors[0];
  std::vector<GroupPtr> groups;
  for (const auto& f : factors) groups.push_back(f->group());
  GroupPtr g = FinGroup::direct_product(groups);
  long nx = 1;
  for (const auto& f : factors) nx *= f->size();
  // Carrier tuples, first factor slowest.
  std::vector<long> xstride(factors.size());
  long s = 1;
  for (int i = int(factors.size()) - 1; i >= 0; --i) {
    xstride[i] = s;
    s *= factors[i]->size();
  }
  std::vector<std::string> carrier(nx);
  for (long x = 0; x < nx; ++x) {
    std::string lbl = "(";
    for (size_t i = 0; i < factors.size(); ++i) {
      int xi = int((x / xstride[i]) % factors[i]->size());
      lbl += (i ? "," : "") + factors[i]->label(xi);
    }
    carrier[x] = lbl + ")";
  }
  std::vector<std::vector<int>> action(g->size(), std::vector<int>(nx));
  for (long ge = 0; ge < g->size(); ++ge) {
    auto parts = g->split(int(ge));
    for (long x = 0; x < nx; ++x) {
      long x2 = 0;
      for (size_t i = 0; i < factors.size(); ++i) {
        int xi = int((x / xstride[i]) % factors[i]->size());
        x2 += factors[i]->act(parts[i], xi) * xstride[i];
      }
      action[ge][x] = int(x2);
    }
  }
  return std::make_shared<FinGroupoid>(std::move(carrier), std::move(g), std::move(action));
}

GPtr product(const GPtr& a, const GPtr& b) { return product(std::vector<GPtr>{a, b}); }

GroupoidMap projection(const GPtr& prod, const std::vector<GPtr>& factors,
                       const std::vector<int>& which) {
  std::vector<GPtr> sub;
  for (int w : which) sub.push_back(factors[w]);
  GPtr target = product(sub);
  std::vector<long> xstride(factors.size());
  long s = 1;
  for (int i = int(factors.size()) - 1; i >= 0; --i) {
    xstride[i] = s;
    s *= factors[i]->size();
  }
  std::vector<long> tstride(sub.size());
  s = 1;
  for (int i = int(sub.size()) - 1; i >= 0; --i) {
    tstride[i] = s;
    s *= sub[i]->size();
  }
  GroupoidMap m;
  m.dom = prod;
  m.cod = target;
  m.theta.resize(prod->group()->size());
  const auto& pg = *prod->group();
  const auto& tg = *target->group();
  for (long g = 0; g < pg.size(); ++g) {
    auto parts = factors.size() > 1 ? pg.split(int(g)) : std::vector<int>{int(g)};
    std::vector<int> tparts;
    for (int w : which) tparts.push_back(parts[w]);
    m.theta[g] = sub.size() > 1 ? tg.join(tparts) : tparts[0];
  }
  m.obj.resize(prod->size());
  for (long x = 0; x < prod->size(); ++x) {
    long t = 0;
    for (size_t i = 0; i < sub.size(); ++i) {
      int xi = int((x / xstride[which[i]]) % factors[which[i]]->size());
      t += xi * tstride[i];
    }
    m.obj[x] = int(t);
  }
  return m;
}

GroupoidMap projection(const GPtr& prod, const std::vector<GPtr>& factors, int which) {
  return projection(prod, factors, std::vector<int>{which});
}

IsoCommaSquare iso_comma_square(const GroupoidMap& f, const GroupoidMap& g) {
  if (!f.cod->same_as(*g.cod))
    throw std::invalid_argument("iso_comma_square: codomain mismatch");
  const auto& c = *f.cod;
  IsoCommaSquare sq;
  // Objects (a, b, h) with h . f(a) = g(b), lexicographic in (a, b, h).
  for (int a = 0; a < f.dom->size(); ++a)
    for (int b = 0; b < g.dom->size(); ++b)
      for (long h = 0; h < c.group()->size(); ++h)
        if (c.act(int(h), f.obj[a]) == g.obj[b]) sq.triples.push_back({a, b, int(h)});

  GroupPtr grp = FinGroup::direct_product({f.dom->group(), g.dom->group()});
  std::map<std::tuple<int, int, int>, int> index;
  std::vector<std::string> labels;
  for (size_t i = 0; i < sq.triples.size(); ++i) {
    auto [a, b, h] = sq.triples[i];
    index[{a, b, h}] = int(i);
    labels.push_back("(" + f.dom->label(a) + "," + g.dom->label(b) + ";" +
                     c.group()->label(h) + ")");
  }
  std::vector<std::vector<int>> action(grp->size(), std::vector<int>(sq.triples.size()));
  for (long ge = 0; ge < grp->size(); ++ge) {
    auto parts = grp->split(int(ge));
    int g1 = parts[0], g2 = parts[1];
    for (size_t i = 0; i < sq.triples.size(); ++i) {
      auto [a, b, h] = sq.triples[i];
      int a2 = f.dom->act(g1, a);
      int b2 = g.dom->act(g2, b);
      int h2 = c.group()->mul(g.theta[g2], c.group()->mul(h, c.group()->inv(f.theta[g1])));
      action[ge][i] = index.at({a2, b2, h2});
    }
  }
  sq.apex = std::make_shared<FinGroupoid>(std::move(labels), grp, std::move(action));

  sq.to_f_dom.dom = sq.apex;
  sq.to_f_dom.cod = f.dom;
  sq.to_g_dom.dom = sq.apex;
  sq.to_g_dom.cod = g.dom;
  for (long ge = 0; ge < grp->size(); ++ge) {
    auto parts = grp->split(int(ge));
    sq.to_f_dom.theta.push_back(parts[0]);
    sq.to_g_dom.theta.push_back(parts[1]);
  }
  for (auto& [a, b, h] : sq.triples) {
    sq.to_f_dom.obj.push_back(a);
    sq.to_g_dom.obj.push_back(b);
  }
  return sq;
}

TwistedFixedPoints twisted_fixed_points(const GPtr& y, const GroupoidMap& f) {
  if (!f.dom->same_as(*y) || !f.cod->same_as(*y))
    throw std::invalid_argument("twisted_fixed_points: F must be an endomorphism of Y");
  TwistedFixedPoints r;
  std::map<std::pair<int, int>, int> index;
  std::vector<std::string> labels;
  for (int x = 0; x < y->size(); ++x)
    for (long g = 0; g < y->group()->size(); ++g)
      if (y->act(int(g), f.obj[x]) == x) {
        index[{x, int(g)}] = int(r.points.size());
        r.points.push_back({x, int(g)});
        labels.push_back("(" + y->label(x) + ";" + y->group()->label(int(g)) + ")");
      }
  std::vector<std::vector<int>> action(y->group()->size(), std::vector<int>(r.points.size()));
  for (long h = 0; h < y->group()->size(); ++h)
    for (size_t i = 0; i < r.points.size(); ++i) {
      auto [x, g] = r.points[i];
      int x2 = y->act(int(h), x);
      int g2 = y->group()->mul(int(h), y->group()->mul(g, y->group()->inv(f.theta[h])));
      action[h][i] = index.at({x2, g2});
    }
  r.groupoid = std::make_shared<FinGroupoid>(std::move(labels), y->group(), std::move(action));
  return r;
}

}  // namespace fincat::groupoid
