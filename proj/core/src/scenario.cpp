#include "fincat/scenario.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fincat/coeff.hpp"
#include "fincat/enhance.hpp"
#include "fincat/enriched.hpp"
#include "fincat/frobenius.hpp"
#include "fincat/groupoid.hpp"
#include "fincat/kernelcalc.hpp"
#include "fincat/sheafcalc.hpp"
#include "json.hpp"

namespace fincat::scenario {

namespace {

using json = nlohmann::ordered_json;
using cjson = nlohmann::json;  // sorted keys, used for all emitted documents
using coeff::Coeff;
using coeff::CSPtr;
using groupoid::GPtr;
using groupoid::GroupoidMap;
using groupoid::GroupPtr;
using sheaf::Bundle;

/// Input problems: unparsable documents, undeclared names, failed validators,
/// exceeded limits. Exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// JSON parsing helpers
// ---------------------------------------------------------------------------

Rat parse_rat(const cjson& v) {
  if (v.is_number_integer()) return Rat(v.get<long>());
  if (v.is_string()) {
    try {
      Rat q(v.get<std::string>());
      q.canonicalize();
      return q;
    } catch (const std::exception&) {
      throw InputError("not a rational: " + v.get<std::string>());
    }
  }
  throw InputError("expected a rational (integer or \"p/q\" string)");
}

QMat parse_qmat(const cjson& v) {
  if (!v.is_array()) throw InputError("expected a matrix (array of rows)");
  int rows = int(v.size());
  int cols = rows ? int(v.at(0).size()) : 0;
  QMat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (int(v.at(i).size()) != cols) throw InputError("ragged matrix rows");
    for (int j = 0; j < cols; ++j) m.at(i, j) = parse_rat(v.at(i).at(j));
  }
  return m;
}

cjson qmat_json(const QMat& m) {
  cjson rows = cjson::array();
  for (int i = 0; i < m.rows(); ++i) {
    cjson row = cjson::array();
    for (int j = 0; j < m.cols(); ++j) {
      const Rat& q = m.at(i, j);
      if (q.get_den() == 1 && q.get_num().fits_slong_p())
        row.push_back(long(q.get_num().get_si()));
      else
        row.push_back(q.get_str());
    }
    rows.push_back(row);
  }
  return rows;
}

/// Parses a coefficient value and returns its carrier index (quantales).
int carrier_idx(const CSPtr& cs, const cjson& v) {
  Coeff c;
  if (v.is_number_integer())
    c = cs->from_int(v.get<long>());
  else if (v.is_string())
    c = cs->parse(v.get<std::string>());
  else
    throw InputError("expected a coefficient value");
  for (int i = 0; i < cs->carrier_size(); ++i)
    if (cs->eq(cs->carrier_elem(i), c)) return i;
  throw InputError("value outside the quantale carrier");
}

Coeff parse_coeff(const CSPtr& cs, const cjson& v) {
  if (v.is_number_integer()) return cs->from_int(v.get<long>());
  if (v.is_string()) return cs->parse(v.get<std::string>());
  throw InputError("expected a coefficient value");
}

template <class T>
const T& lookup(const std::map<std::string, T>& m, const cjson& name, const char* kind) {
  if (!name.is_string()) throw InputError(std::string("expected a ") + kind + " name");
  auto it = m.find(name.get<std::string>());
  if (it == m.end())
    throw InputError(std::string("undeclared ") + kind + " '" + name.get<std::string>() + "'");
  return it->second;
}

std::vector<int> int_vector(const cjson& v) {
  if (!v.is_array()) throw InputError("expected an integer array");
  std::vector<int> out;
  for (const auto& e : v) out.push_back(e.get<int>());
  return out;
}

std::vector<std::vector<int>> int_table(const cjson& v) {
  if (!v.is_array()) throw InputError("expected a table (array of integer arrays)");
  std::vector<std::vector<int>> out;
  for (const auto& row : v) out.push_back(int_vector(row));
  return out;
}

// ---------------------------------------------------------------------------
// Declarations
// ---------------------------------------------------------------------------

struct Ctx {
  Limits lim;
  CSPtr cs;
  std::map<std::string, GroupPtr> groups;
  std::map<std::string, GPtr> groupoids;
  std::map<std::string, GroupoidMap> maps;
  std::map<std::string, Bundle> bundles;
  std::map<std::string, kernel::Kernel> kernels;
  std::map<std::string, frob::WeilSheaf> weils;
  std::map<std::string, enriched::EnrichedCat> cats;
  std::map<std::string, enhance::SMPosetO> posets;
  std::map<std::string, enhance::LaxFunctorF> laxes;
};

CSPtr parse_coeff_system(const cjson& v, const Limits& lim) {
  using coeff::CoeffSystem;
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s == "rationals") return CoeffSystem::rationals();
    if (s == "integers") return CoeffSystem::integers();
    if (s == "naturals") return CoeffSystem::naturals();
    if (s == "boolean") return CoeffSystem::boolean_quantale();
    throw InputError("unknown coefficient system '" + s + "'");
  }
  if (v.is_object()) {
    CSPtr cs;
    if (v.contains("tropical")) {
      long cap = v.at("tropical").get<long>();
      if (cap + 2 > lim.carrier) throw InputError("carrier limit exceeded (tropical cap)");
      cs = CoeffSystem::tropical(int(cap));
    } else if (v.contains("lattice")) {
      const cjson& l = v.at("lattice");
      std::vector<std::string> labels = l.at("labels").get<std::vector<std::string>>();
      if (long(labels.size()) > lim.carrier) throw InputError("carrier limit exceeded (lattice)");
      try {
        cs = CoeffSystem::finite_lattice(labels, int_table(l.at("join")),
                                         int_table(l.at("tensor")), l.at("unit").get<int>());
      } catch (const std::invalid_argument& e) {
        throw InputError(std::string("invalid lattice: ") + e.what());
      }
    } else {
      throw InputError("unknown coefficient system object");
    }
    return cs;
  }
  throw InputError("coeff: expected a string or an object");
}

void load_groups(Ctx& c, const cjson& doc) {
  if (!doc.contains("groups")) return;
  // Products may reference siblings; resolve by fixpoint iteration.
  std::map<std::string, cjson> pending;
  for (const auto& [k, v] : doc.at("groups").items()) pending[k] = v;
  while (!pending.empty()) {
    bool progressed = false;
    for (auto it = pending.begin(); it != pending.end();) {
      const cjson& d = it->second;
      GroupPtr g;
      try {
        if (d.contains("trivial"))
          g = groupoid::FinGroup::trivial();
        else if (d.contains("cyclic"))
          g = groupoid::FinGroup::cyclic(d.at("cyclic").get<int>());
        else if (d.contains("symmetric"))
          g = groupoid::FinGroup::symmetric(d.at("symmetric").get<int>());
        else if (d.contains("table")) {
          const cjson& t = d.at("table");
          g = groupoid::FinGroup::from_table(t.at("labels").get<std::vector<std::string>>(),
                                             int_table(t.at("mult")), t.at("identity").get<int>());
        } else if (d.contains("product")) {
          std::vector<GroupPtr> fs;
          bool ready = true;
          for (const auto& n : d.at("product")) {
            auto f = c.groups.find(n.get<std::string>());
            if (f == c.groups.end()) {
              ready = false;
              break;
            }
            fs.push_back(f->second);
          }
          if (!ready) {
            ++it;
            continue;
          }
          g = groupoid::FinGroup::direct_product(fs);
        } else {
          throw InputError("group '" + it->first + "': unknown form");
        }
      } catch (const std::invalid_argument& e) {
        throw InputError("group '" + it->first + "': " + e.what());
      }
      if (g->size() > c.lim.group)
        throw InputError("group '" + it->first + "': group order limit exceeded");
      c.groups[it->first] = g;
      it = pending.erase(it);
      progressed = true;
    }
    if (!progressed) throw InputError("groups: unresolved product reference");
  }
}

void load_groupoids(Ctx& c, const cjson& doc) {
  if (!doc.contains("groupoids")) return;
  std::map<std::string, cjson> pending;
  for (const auto& [k, v] : doc.at("groupoids").items()) pending[k] = v;
  while (!pending.empty()) {
    bool progressed = false;
    for (auto it = pending.begin(); it != pending.end();) {
      const cjson& d = it->second;
      GPtr y;
      try {
        if (d.contains("discrete"))
          y = groupoid::FinGroupoid::discrete(d.at("discrete").get<std::vector<std::string>>());
        else if (d.contains("point"))
          y = groupoid::FinGroupoid::point();
        else if (d.contains("one_point"))
          y = groupoid::FinGroupoid::one_point(lookup(c.groups, d.at("one_point"), "group"));
        else if (d.contains("action")) {
          const cjson& a = d.at("action");
          y = std::make_shared<groupoid::FinGroupoid>(
              a.at("carrier").get<std::vector<std::string>>(),
              lookup(c.groups, a.at("group"), "group"), int_table(a.at("action")));
          y->validate();
        } else if (d.contains("product")) {
          std::vector<GPtr> fs;
          bool ready = true;
          for (const auto& n : d.at("product")) {
            auto f = c.groupoids.find(n.get<std::string>());
            if (f == c.groupoids.end()) {
              ready = false;
              break;
            }
            fs.push_back(f->second);
          }
          if (!ready) {
            ++it;
            continue;
          }
          y = groupoid::product(fs);
        } else {
          throw InputError("groupoid '" + it->first + "': unknown form");
        }
      } catch (const std::invalid_argument& e) {
        throw InputError("groupoid '" + it->first + "': " + e.what());
      }
      if (long(y->size()) > c.lim.carrier || y->group()->size() > c.lim.group)
        throw InputError("groupoid '" + it->first + "': size limit exceeded");
      c.groupoids[it->first] = y;
      it = pending.erase(it);
      progressed = true;
    }
    if (!progressed) throw InputError("groupoids: unresolved product reference");
  }
}

void load_maps(Ctx& c, const cjson& doc) {
  if (!doc.contains("maps")) return;
  for (const auto& [name, d] : doc.at("maps").items()) {
    GroupoidMap f;
    try {
      if (d.contains("identity")) {
        f = GroupoidMap::identity(lookup(c.groupoids, d.at("identity"), "groupoid"));
      } else {
        f.dom = lookup(c.groupoids, d.at("dom"), "groupoid");
        f.cod = lookup(c.groupoids, d.at("cod"), "groupoid");
        f.theta = int_vector(d.at("theta"));
        f.obj = int_vector(d.at("obj"));
        f.validate();
      }
    } catch (const std::invalid_argument& e) {
      throw InputError("map '" + name + "': " + e.what());
    }
    c.maps[name] = f;
  }
}

void load_bundles(Ctx& c, const cjson& doc) {
  if (!doc.contains("bundles")) return;
  for (const auto& [name, d] : doc.at("bundles").items()) {
    Bundle b;
    try {
      if (d.contains("trivial")) {
        const cjson& t = d.at("trivial");
        b = Bundle::trivial(lookup(c.groupoids, t.at("base"), "groupoid"),
                            t.contains("dim") ? t.at("dim").get<int>() : 1);
      } else if (d.contains("regular_rep")) {
        b = Bundle::regular_rep(lookup(c.groups, d.at("regular_rep"), "group"));
      } else if (d.contains("table")) {
        const cjson& t = d.at("table");
        GPtr y = lookup(c.groupoids, t.at("base"), "groupoid");
        std::vector<int> dims = int_vector(t.at("dims"));
        std::vector<std::vector<QMat>> rho;
        for (const auto& row : t.at("rho")) {
          std::vector<QMat> r;
          for (const auto& m : row) r.push_back(parse_qmat(m));
          rho.push_back(std::move(r));
        }
        if (long(rho.size()) != y->group()->size() ||
            (rho.size() && int(rho[0].size()) != y->size()))
          throw InputError("rho table shape must be |G| x |X|");
        b = Bundle::from_action(y, dims, [&rho](int g, int x) { return rho[g][x]; });
      } else {
        throw InputError("bundle '" + name + "': unknown form");
      }
    } catch (const std::invalid_argument& e) {
      throw InputError("bundle '" + name + "': " + e.what());
    }
    for (int dm : b.dims)
      if (dm > c.lim.stalk) throw InputError("bundle '" + name + "': stalk limit exceeded");
    c.bundles[name] = b;
  }
}

void load_kernels(Ctx& c, const cjson& doc) {
  if (!doc.contains("kernels")) return;
  for (const auto& [name, d] : doc.at("kernels").items()) {
    kernel::Kernel k;
    try {
      if (d.contains("identity")) {
        k = kernel::identity_kernel(lookup(c.groupoids, d.at("identity"), "groupoid")).k;
      } else if (d.contains("dims")) {
        const cjson& t = d.at("dims");
        k = kernel::Kernel::from_dims(lookup(c.groupoids, t.at("y1"), "groupoid"),
                                      lookup(c.groupoids, t.at("y2"), "groupoid"),
                                      int_table(t.at("stalks")));
      } else if (d.contains("payload")) {
        const cjson& t = d.at("payload");
        k = kernel::Kernel::from_payload(lookup(c.groupoids, t.at("y1"), "groupoid"),
                                         lookup(c.groupoids, t.at("y2"), "groupoid"),
                                         lookup(c.bundles, t.at("bundle"), "bundle"));
      } else if (d.contains("frobenius")) {
        const cjson& t = d.at("frobenius");
        k = frob::frobenius_kernel(lookup(c.groupoids, t.at("groupoid"), "groupoid"),
                                   lookup(c.maps, t.at("map"), "map"))
                .k;
      } else {
        throw InputError("kernel '" + name + "': unknown form");
      }
    } catch (const std::invalid_argument& e) {
      throw InputError("kernel '" + name + "': " + e.what());
    }
    for (int dm : k.payload.dims)
      if (dm > c.lim.stalk) throw InputError("kernel '" + name + "': stalk limit exceeded");
    c.kernels[name] = k;
  }
}

void load_weils(Ctx& c, const cjson& doc) {
  if (!doc.contains("weil_sheaves")) return;
  for (const auto& [name, d] : doc.at("weil_sheaves").items()) {
    frob::WeilSheaf w;
    try {
      w.v = lookup(c.bundles, d.at("bundle"), "bundle");
      w.f = lookup(c.maps, d.at("frobenius"), "map");
      for (const auto& m : d.at("alpha")) w.alpha.push_back(parse_qmat(m));
      w.validate();
    } catch (const std::invalid_argument& e) {
      throw InputError("weil sheaf '" + name + "': " + e.what());
    }
    c.weils[name] = w;
  }
}

void load_cats(Ctx& c, const cjson& doc) {
  if (!doc.contains("enriched")) return;
  for (const auto& [name, d] : doc.at("enriched").items()) {
    if (!c.cs->is_quantale())
      throw InputError("enriched '" + name + "': coefficient system is not a quantale");
    try {
      if (d.contains("self")) {
        c.cats[name] = enriched::self_enrichment(c.cs);
      } else {
        const cjson& t = d.at("table");
        std::vector<std::string> objs = t.at("objs").get<std::vector<std::string>>();
        std::vector<int> hom;
        for (const auto& row : t.at("hom"))
          for (const auto& v : row) hom.push_back(carrier_idx(c.cs, v));
        c.cats[name] = enriched::validate_enriched_cat(c.cs, objs, hom);
      }
    } catch (const std::invalid_argument& e) {
      throw InputError("enriched '" + name + "': " + e.what());
    }
  }
}

void load_posets(Ctx& c, const cjson& doc) {
  if (!doc.contains("sm_posets")) return;
  for (const auto& [name, d] : doc.at("sm_posets").items()) {
    enhance::SMPosetO o;
    try {
      if (d.contains("from_quantale")) {
        if (!c.cs->is_quantale())
          throw InputError("coefficient system is not a quantale");
        o = enhance::SMPosetO::from_quantale(c.cs);
      } else {
        const cjson& t = d.at("table");
        o.objs = t.at("objs").get<std::vector<std::string>>();
        for (const auto& row : t.at("leq")) {
          std::vector<bool> r;
          for (const auto& v : row) r.push_back(v.get<int>() != 0);
          o.leq.push_back(r);
        }
        o.tensor = int_table(t.at("tensor"));
        o.unit = t.at("unit").get<int>();
        o.ihom = int_table(t.at("ihom"));
        o.dual = t.contains("dual") ? int_vector(t.at("dual")) : std::vector<int>(o.objs.size(), -1);
        o.validate();
      }
    } catch (const std::invalid_argument& e) {
      throw InputError("sm poset '" + name + "': " + e.what());
    }
    if (long(o.n()) > c.lim.carrier)
      throw InputError("sm poset '" + name + "': carrier limit exceeded");
    c.posets[name] = o;
  }
}

void load_laxes(Ctx& c, const cjson& doc) {
  if (!doc.contains("lax_functors")) return;
  for (const auto& [name, d] : doc.at("lax_functors").items()) {
    if (!c.cs->is_quantale())
      throw InputError("lax functor '" + name + "': coefficient system is not a quantale");
    enhance::LaxFunctorF f;
    f.a = c.cs;
    const auto& o = lookup(c.posets, d.at("poset"), "sm poset");
    try {
      for (const auto& v : d.at("map")) f.map.push_back(carrier_idx(c.cs, v));
      f.validate(o);
    } catch (const std::invalid_argument& e) {
      throw InputError("lax functor '" + name + "': " + e.what());
    }
    c.laxes[name] = f;
  }
}

Ctx load_declarations(const cjson& doc, const Limits& lim) {
  Ctx c;
  c.lim = lim;
  c.cs = doc.contains("coeff") ? parse_coeff_system(doc.at("coeff"), lim)
                               : coeff::CoeffSystem::rationals();
  load_groups(c, doc);
  load_groupoids(c, doc);
  load_maps(c, doc);
  load_bundles(c, doc);
  load_kernels(c, doc);
  load_weils(c, doc);
  load_cats(c, doc);
  load_posets(c, doc);
  load_laxes(c, doc);
  return c;
}

// ---------------------------------------------------------------------------
// Task execution
// ---------------------------------------------------------------------------

/// FINCAT_MUTATE hooks: deliberately wrong implementations selectable via the
/// environment, used to exercise the selftest counterexample machinery.
bool mutation(const char* name) {
  const char* m = std::getenv("FINCAT_MUTATE");
  return m && std::string(m) == name;
}

kernel::Kernel scenario_convolve(const kernel::Kernel& a, const kernel::Kernel& b) {
  if (mutation("swap_convolution")) return kernel::convolve(b, a);
  return kernel::convolve(a, b);
}

Coeff scenario_residuate(const CSPtr& cs, const Coeff& a, const Coeff& b) {
  if (mutation("flip_residuation")) return cs->residuate(b, a);
  return cs->residuate(a, b);
}

cjson stalk_table(const kernel::Kernel& k) {
  cjson rows = cjson::array();
  for (int a = 0; a < k.y1->size(); ++a) {
    cjson row = cjson::array();
    for (int b = 0; b < k.y2->size(); ++b) row.push_back(k.stalk(a, b));
    rows.push_back(row);
  }
  return rows;
}

cjson fn0_json(const sheaf::Fn0& f) {
  cjson classes = cjson::array(), values = cjson::array();
  for (size_t i = 0; i < f.components.size(); ++i) {
    classes.push_back(f.base->label(f.components[i].representative));
    values.push_back(f.cs->str(f.values[i]));
  }
  return cjson{{"classes", classes}, {"values", values}};
}

cjson pass_result(bool pass, const std::string& witness) {
  cjson r{{"pass", pass}};
  if (!pass) r["witness"] = witness;
  return r;
}

cjson op_check_weighted(const Ctx& c, const cjson& t, bool limit_side) {
  const auto& cat = lookup(c.cats, t.at("category"), "enriched category");
  const CSPtr& a = cat.a;
  std::vector<int> w, phi;
  for (const auto& v : t.at("weight")) w.push_back(carrier_idx(a, v));
  for (const auto& v : t.at("diagram")) phi.push_back(carrier_idx(a, v));
  enriched::QuantaleModule m = enriched::module_from_quantale(a);
  int val = limit_side ? enriched::weighted_limit(cat, w, m, phi)
                       : enriched::weighted_colimit(cat, w, m, phi);
  // Universal property, quantified over every module element.
  for (int x = 0; x < m.size(); ++x) {
    std::vector<int> parts;
    for (int cc = 0; cc < cat.n(); ++cc) {
      int inner = limit_side ? m.uhom(x, phi[cc]) : m.uhom(phi[cc], x);
      Coeff r = a->residuate(a->carrier_elem(w[cc]), a->carrier_elem(inner));
      parts.push_back(carrier_idx(a, cjson(a->str(r))));
    }
    int rhs = enriched::quantale_meet_all(a, parts);
    int lhs = limit_side ? m.uhom(x, val) : m.uhom(val, x);
    if (lhs != rhs)
      return pass_result(false, "universal property fails at module element " + m.labels[x] +
                                    ": " + a->str(a->carrier_elem(lhs)) + " vs " +
                                    a->str(a->carrier_elem(rhs)));
  }
  cjson r = pass_result(true, "");
  r["value"] = a->str(a->carrier_elem(val));
  return r;
}

cjson exec_op(const Ctx& c, const cjson& t) {
  std::string op = t.at("op").get<std::string>();

  if (op == "residuate") {
    Coeff a = parse_coeff(c.cs, t.at("a")), b = parse_coeff(c.cs, t.at("b"));
    return {{"value", c.cs->str(scenario_residuate(c.cs, a, b))}};
  }

  if (op == "mat_rank" || op == "check_linear_solve") {
    QMat m = parse_qmat(t.at("matrix"));
    coeff::Matrix a = coeff::from_qmat(
        coeff::CoeffSystem::rationals(), m,
        [&] {
          std::vector<std::string> r;
          for (int i = 0; i < m.rows(); ++i) r.push_back("r" + std::to_string(i));
          return r;
        }(),
        [&] {
          std::vector<std::string> r;
          for (int j = 0; j < m.cols(); ++j) r.push_back("c" + std::to_string(j));
          return r;
        }());
    coeff::QSolveResult s = coeff::q_linear_solve(a);
    if (op == "mat_rank")
      return {{"rank", s.rank}, {"nullity", s.kernel.cols()}};
    // Consistency laws of the solver, checked against raw matrix arithmetic.
    if (s.rank + s.kernel.cols() != m.cols())
      return pass_result(false, "rank + nullity != columns");
    QMat ker = coeff::to_qmat(s.kernel);
    if (ker.cols() && !(m * ker).is_zero())
      return pass_result(false, "A * kernel basis is nonzero");
    QMat img = coeff::to_qmat(s.image);
    if (img.cols() != s.rank || img.rank() != s.rank)
      return pass_result(false, "image basis is not an independent set of size rank");
    return pass_result(true, "");
  }

  if (op == "pi0" || op == "check_pi0") {
    const GPtr& y = lookup(c.groupoids, t.at("groupoid"), "groupoid");
    auto orbits = groupoid::pi0_with_aut(*y);
    if (op == "pi0") {
      cjson arr = cjson::array();
      for (const auto& o : orbits)
        arr.push_back({{"representative", y->label(o.representative)},
                       {"size", o.members.size()},
                       {"automorphisms", o.automorphism_order}});
      return {{"components", orbits.size()}, {"orbits", arr}};
    }
    // Partition + orbit-stabilizer, from the raw action table.
    std::vector<bool> seen(y->size(), false);
    for (const auto& o : orbits) {
      if (o.members.empty() || o.members[0] != o.representative)
        return pass_result(false, "representative is not the least member");
      for (int x : o.members) {
        if (seen[x]) return pass_result(false, "orbits overlap at " + y->label(x));
        seen[x] = true;
      }
      if (long(o.members.size()) * o.automorphism_order != y->group()->size())
        return pass_result(false, "orbit-stabilizer fails at " + y->label(o.representative));
      long stab = 0;
      for (long g = 0; g < y->group()->size(); ++g)
        if (y->act(int(g), o.representative) == o.representative) ++stab;
      if (stab != o.automorphism_order)
        return pass_result(false, "stabilizer order mismatch at " + y->label(o.representative));
    }
    for (int x = 0; x < y->size(); ++x)
      if (!seen[x]) return pass_result(false, "point not covered: " + y->label(x));
    return pass_result(true, "");
  }

  if (op == "twisted_fixed_points") {
    const GPtr& y = lookup(c.groupoids, t.at("groupoid"), "groupoid");
    const GroupoidMap& f = lookup(c.maps, t.at("map"), "map");
    auto tfp = groupoid::twisted_fixed_points(y, f);
    return {{"points", tfp.points.size()},
            {"classes", groupoid::pi0_with_aut(*tfp.groupoid).size()}};
  }

  if (op == "omega") {
    const GPtr& y = lookup(c.groupoids, t.at("groupoid"), "groupoid");
    auto [m, inv] = sheaf::omega_map(y, c.cs);
    cjson diag = cjson::array();
    for (int i = 0; i < m.rows(); ++i) diag.push_back(c.cs->str(m.at(i, i)));
    return {{"invertible", inv}, {"diagonal", diag}};
  }

  if (op == "hom_dim") {
    const Bundle& v = lookup(c.bundles, t.at("source"), "bundle");
    const Bundle& w = lookup(c.bundles, t.at("target"), "bundle");
    return {{"dim", sheaf::hom_space(v, w).size()}};
  }

  if (op == "cochains") {
    const Bundle& v = lookup(c.bundles, t.at("bundle"), "bundle");
    return {{"dim", sheaf::cochains_triangle(v.base, v).dim}};
  }

  if (op == "norm_invertible") {
    const GroupoidMap& f = lookup(c.maps, t.at("map"), "map");
    const Bundle& v = lookup(c.bundles, t.at("bundle"), "bundle");
    return {{"invertible", sheaf::norm_map(f, v).is_iso()}};
  }

  if (op == "base_change" || op == "check_base_change") {
    const GroupoidMap& f = lookup(c.maps, t.at("f"), "map");
    const GroupoidMap& g = lookup(c.maps, t.at("g"), "map");
    const Bundle& v = lookup(c.bundles, t.at("bundle"), "bundle");
    sheaf::CheckResult r = sheaf::base_change_check(f, g, v);
    return pass_result(r.pass, r.witness);
  }

  if (op == "projection_formula" || op == "check_projection_formula") {
    const GroupoidMap& f = lookup(c.maps, t.at("map"), "map");
    const Bundle& v = lookup(c.bundles, t.at("bundle"), "bundle");
    const Bundle& w = lookup(c.bundles, t.at("aux"), "bundle");
    sheaf::CheckResult r = sheaf::projection_formula_check(f, v, w);
    return pass_result(r.pass, r.witness);
  }

  if (op == "convolve") {
    const kernel::Kernel& a = lookup(c.kernels, t.at("left"), "kernel");
    const kernel::Kernel& b = lookup(c.kernels, t.at("right"), "kernel");
    return {{"stalks", stalk_table(scenario_convolve(a, b))}};
  }

  if (op == "check_convolution_oracle") {
    const kernel::Kernel& a = lookup(c.kernels, t.at("left"), "kernel");
    const kernel::Kernel& b = lookup(c.kernels, t.at("right"), "kernel");
    if (a.y1->group()->size() != 1 || a.y2->group()->size() != 1 || b.y2->group()->size() != 1)
      throw InputError("check_convolution_oracle: discrete feet required");
    kernel::Kernel ab = scenario_convolve(a, b);
    for (int x = 0; x < a.y1->size(); ++x)
      for (int z = 0; z < b.y2->size(); ++z) {
        long want = 0;  // matrix product of the stalk-dimension tables
        for (int y = 0; y < a.y2->size(); ++y)
          want += long(a.stalk(x, y)) * b.stalk(y, z);
        if (ab.stalk(x, z) != want)
          return pass_result(false, "stalk (" + std::to_string(x) + "," + std::to_string(z) +
                                        "): got " + std::to_string(ab.stalk(x, z)) +
                                        ", dimension-count oracle gives " + std::to_string(want));
      }
    return pass_result(true, "");
  }

  if (op == "act") {
    const kernel::Kernel& k = lookup(c.kernels, t.at("kernel"), "kernel");
    const Bundle& v = lookup(c.bundles, t.at("bundle"), "bundle");
    Bundle out = kernel::act(k, v);
    return {{"dims", out.dims}};
  }

  if (op == "trace") {
    kernel::TraceSpace tr = kernel::trace_lt_ag(lookup(c.kernels, t.at("kernel"), "kernel"));
    return {{"dim", tr.dim}, {"labels", tr.labels}};
  }

  if (op == "trace_duality") {
    kernel::DualityTrace tr = kernel::trace_via_duality(lookup(c.kernels, t.at("kernel"), "kernel"));
    return {{"dim", tr.dim}, {"lt_invertible", tr.lt.invertible()}};
  }

  if (op == "check_trace_equiv") {
    const kernel::Kernel& k = lookup(c.kernels, t.at("kernel"), "kernel");
    kernel::TraceSpace ag = kernel::trace_lt_ag(k);
    kernel::DualityTrace du = kernel::trace_via_duality(k);
    if (ag.dim != du.dim)
      return pass_result(false, "dimension mismatch: " + std::to_string(ag.dim) + " vs " +
                                    std::to_string(du.dim));
    if (!du.lt.invertible()) return pass_result(false, "comparison map is not invertible");
    return pass_result(true, "");
  }

  if (op == "kernel_adjoint") {
    kernel::AdjointResult r = kernel::kernel_right_adjoint(lookup(c.kernels, t.at("kernel"), "kernel"));
    return {{"has_adjoint", r.data.has_value()}, {"diagnostic", r.diagnostic}};
  }

  if (op == "tr_frob") {
    frob::FrobTrace tr = frob::tr_frob(lookup(c.groupoids, t.at("groupoid"), "groupoid"),
                                       lookup(c.maps, t.at("map"), "map"));
    return {{"dim", tr.dim}, {"labels", tr.labels}};
  }

  if (op == "sfunct") {
    return {{"function", fn0_json(frob::sfunct(lookup(c.weils, t.at("weil"), "weil sheaf")))}};
  }

  if (op == "check_sheaf_function") {
    const frob::WeilSheaf& w = lookup(c.weils, t.at("weil"), "weil sheaf");
    frob::FrobTrace tr = frob::tr_frob(w.v.base, w.f);
    sheaf::Fn0 lhs = frob::lt_naive(tr, frob::cl_weil(w, tr));
    sheaf::Fn0 rhs = frob::sfunct(w);
    if (!lhs.same_as(rhs))
      return pass_result(false, "lt_naive(cl_weil) = " + lhs.str() + " but sfunct = " + rhs.str());
    return pass_result(true, "");
  }

  if (op == "presheaf_count") {
    const auto& cat = lookup(c.cats, t.at("category"), "enriched category");
    enriched::PresheafModule p = enriched::presheaves(cat, c.lim.presheaf);
    if (long(p.size()) > c.lim.presheaf) throw InputError("presheaf module limit exceeded");
    return {{"count", p.size()}};
  }

  if (op == "check_yoneda") {
    const auto& cat = lookup(c.cats, t.at("category"), "enriched category");
    enriched::PresheafModule p = enriched::presheaves(cat, c.lim.presheaf);
    if (long(p.size()) > c.lim.presheaf) throw InputError("presheaf module limit exceeded");
    for (int c0 = 0; c0 < cat.n(); ++c0) {
      std::vector<int> yon = enriched::yoneda(cat, c0);
      for (const auto& phi : p.elems)
        if (enriched::hom_presheaf(cat, yon, phi) != phi[c0])
          return pass_result(false, "hom(Yon(" + cat.objs[c0] + "), phi) != phi(" + cat.objs[c0] +
                                        ") for some presheaf");
    }
    return pass_result(true, "");
  }

  if (op == "weighted_limit" || op == "check_weighted_limit") return op_check_weighted(c, t, true);
  if (op == "weighted_colimit" || op == "check_weighted_colimit")
    return op_check_weighted(c, t, false);

  if (op == "check_bk") {
    const auto& cat = lookup(c.cats, t.at("category"), "enriched category");
    std::vector<int> psi;
    for (const auto& v : t.at("presheaf")) psi.push_back(carrier_idx(cat.a, v));
    bool ok = enriched::bk_reconstruct(cat, psi);
    return pass_result(ok, ok ? "" : "BK realization differs from the presheaf");
  }

  if (op == "enhance_report") {
    const auto& o = lookup(c.posets, t.at("poset"), "sm poset");
    const auto& f = lookup(c.laxes, t.at("functor"), "lax functor");
    enhance::EnhResult r = enhance::build_Enh(o, f, c.lim.presheaf);
    if (long(r.p.size()) > c.lim.presheaf) throw InputError("presheaf module limit exceeded");
    enhance::FFReport ff = enhance::check_strict_unital_ff(r);
    enhance::AmbiReport am = enhance::check_ambidexterity(r);
    enhance::AmbiReport co = enhance::check_collapse(r);
    return {{"strictly_unital", ff.strictly_unital},
            {"fully_faithful", ff.fully_faithful},
            {"ambidexterity", am.pass},
            {"ambidexterity_detail", am.detail},
            {"collapse", co.pass},
            {"collapse_detail", co.detail},
            {"target_insensitive", enhance::check_target_insensitivity(o, f, c.lim.presheaf)},
            {"presheaves", r.p.size()}};
  }

  if (op == "check_strict_unital_ff") {
    const auto& o = lookup(c.posets, t.at("poset"), "sm poset");
    const auto& f = lookup(c.laxes, t.at("functor"), "lax functor");
    enhance::EnhResult r = enhance::build_Enh(o, f, c.lim.presheaf);
    enhance::FFReport ff = enhance::check_strict_unital_ff(r);
    if (ff.strictly_unital && !ff.fully_faithful)
      return pass_result(false, "strictly unital but the inclusion is not fully faithful");
    cjson res = pass_result(true, "");
    res["strictly_unital"] = ff.strictly_unital;
    res["fully_faithful"] = ff.fully_faithful;
    return res;
  }

  throw InputError("unknown operation '" + op + "'");
}

// ---------------------------------------------------------------------------
// Scenario driver
// ---------------------------------------------------------------------------

struct TaskOutcome {
  cjson record;       // op + result + status (+ diff)
  int exit_code = 0;  // worst per-task code
  double ms = 0;
};

TaskOutcome run_task(const Ctx& c, const cjson& t) {
  TaskOutcome out;
  auto t0 = std::chrono::steady_clock::now();
  std::string op = t.value("op", std::string("?"));
  out.record["op"] = op;
  cjson result;
  try {
    result = exec_op(c, t);
  } catch (const InputError& e) {
    out.record["status"] = "error";
    out.record["error"] = e.what();
    out.exit_code = 1;
    return out;
  } catch (const std::exception& e) {
    out.record["status"] = "error";
    out.record["error"] = e.what();
    out.exit_code = 1;
    return out;
  }
  out.record["result"] = result;
  out.record["status"] = "ok";
  if (result.is_object() && result.contains("pass") && !result.at("pass").get<bool>()) {
    out.record["status"] = "fail";
    out.exit_code = 2;
  }
  if (t.contains("expect")) {
    for (const auto& [key, want] : t.at("expect").items()) {
      if (!result.contains(key) || result.at(key) != want) {
        out.record["status"] = "mismatch";
        out.record["diff"] = cjson{{"key", key},
                                   {"expected", want},
                                   {"actual", result.contains(key) ? result.at(key)
                                                                   : cjson(nullptr)}};
        out.exit_code = 2;
        break;
      }
    }
  }
  out.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

RunResult assemble(const std::vector<TaskOutcome>& outs, int exit_code) {
  cjson report;
  report["status"] = exit_code == 0 ? "ok" : (exit_code == 1 ? "error" : "fail");
  report["tasks"] = cjson::array();
  std::ostringstream human;
  for (size_t i = 0; i < outs.size(); ++i) {
    report["tasks"].push_back(outs[i].record);
    const cjson& r = outs[i].record;
    human << "task " << i << "  " << r.value("op", "?") << "  " << r.value("status", "?");
    {
      std::ostringstream ms;
      ms.setf(std::ios::fixed);
      ms.precision(2);
      ms << outs[i].ms;
      human << "  (" << ms.str() << " ms)\n";
    }
    if (r.contains("result"))
      for (const auto& [k, v] : r.at("result").items()) human << "  " << k << ": " << v.dump() << "\n";
    if (r.contains("error")) human << "  error: " << r.value("error", "") << "\n";
    if (r.contains("diff")) human << "  diff: " << r.at("diff").dump() << "\n";
  }
  human << "status: " << report["status"].get<std::string>() << "\n";
  RunResult res;
  res.exit_code = exit_code;
  res.human = human.str();
  res.machine = report.dump(2) + "\n";
  return res;
}

RunResult input_error(const std::string& msg) {
  RunResult r;
  r.exit_code = 1;
  r.human = "error: " + msg + "\n";
  cjson j{{"status", "error"}, {"error", msg}};
  r.machine = j.dump(2) + "\n";
  return r;
}

RunResult run_parsed(const cjson& doc, const Limits& limits, bool parallel) {
  Ctx ctx;
  try {
    ctx = load_declarations(doc, limits);
  } catch (const std::exception& e) {
    return input_error(e.what());
  }
  cjson tasks = doc.contains("tasks") ? doc.at("tasks") : cjson::array();
  if (!tasks.is_array()) return input_error("tasks: expected an array");

  std::vector<TaskOutcome> outs(tasks.size());
  if (parallel && tasks.size() > 1) {
    // Lazy caches inside shared immutable structures are materialized before
    // fanning out; tasks otherwise only read the declarations.
    for (auto& [_, g] : ctx.groups) g->generators();
    for (auto& [_, y] : ctx.groupoids) y->group()->generators();
    std::vector<std::future<TaskOutcome>> futs;
    for (const auto& t : tasks)
      futs.push_back(std::async(std::launch::async, [&ctx, t] { return run_task(ctx, t); }));
    for (size_t i = 0; i < futs.size(); ++i) outs[i] = futs[i].get();
  } else {
    for (size_t i = 0; i < tasks.size(); ++i) outs[i] = run_task(ctx, tasks.at(i));
  }
  int code = 0;
  for (const auto& o : outs) code = std::max(code, o.exit_code);
  return assemble(outs, code);
}

}  // namespace

// ---------------------------------------------------------------------------
// Limits
// ---------------------------------------------------------------------------

void Limits::apply(const std::string& spec) {
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("limits: expected key=value: " + item);
    std::string key = item.substr(0, eq);
    long val = 0;
    try {
      val = std::stol(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("limits: bad value in: " + item);
    }
    if (val <= 0) throw std::invalid_argument("limits: value must be positive: " + item);
    if (key == "carrier")
      carrier = val;
    else if (key == "group")
      group = val;
    else if (key == "stalk")
      stalk = val;
    else if (key == "presheaf")
      presheaf = val;
    else
      throw std::invalid_argument("limits: unknown key '" + key + "'");
  }
}

Limits Limits::from_env() {
  Limits l;
  if (const char* e = std::getenv("FINCAT_LIMITS")) l.apply(e);
  return l;
}

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

RunResult run_scenario_text(const std::string& text, const Limits& limits, bool parallel) {
  cjson doc;
  try {
    doc = cjson::parse(text);
  } catch (const std::exception& e) {
    return input_error(std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) return input_error("scenario: expected a JSON object");
  return run_parsed(doc, limits, parallel);
}

RunResult run_scenario_file(const std::string& path, const Limits& limits, bool parallel) {
  std::ifstream in(path);
  if (!in) return input_error("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return run_scenario_text(buf.str(), limits, parallel);
}

// ---------------------------------------------------------------------------
// Selftest
// ---------------------------------------------------------------------------

namespace {

using Rng = std::mt19937_64;

long rnd(Rng& r, long lo, long hi) {  // inclusive
  return lo + long(r() % (unsigned long long)(hi - lo + 1));
}

/// One randomized property: generates a scenario document whose tasks verify
/// the law (with independently computed expectations where applicable). A
/// document that fails under the engine *is* the counterexample.
struct Property {
  std::string name;
  int weight = 1;  // iterations = corpus_size / weight (at least one)
  std::function<cjson(Rng&)> generate;
  // Optional shrinker: smaller candidate documents derived from a failing one.
  std::function<std::vector<cjson>(const cjson&)> shrink;
};

cjson minimize(cjson doc, const Property& p, const Limits& lim, int want_code) {
  if (!p.shrink) return doc;
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (const cjson& cand : p.shrink(doc)) {
      // Accept a smaller instance only when it fails the same way; shrinking
      // must not trade a law violation for an unrelated input error.
      if (run_parsed(cand, lim, false).exit_code == want_code) {
        doc = cand;
        progressed = true;
        break;
      }
    }
  }
  return doc;
}

// -- generators -------------------------------------------------------------

cjson gen_residuation(Rng& r) {
  using coeff::CoeffSystem;
  long cap = rnd(r, 2, 9);
  CSPtr cs = CoeffSystem::tropical(int(cap));
  int a = int(rnd(r, 0, cs->carrier_size() - 1));
  int b = int(rnd(r, 0, cs->carrier_size() - 1));
  // Oracle: the join of every x with x (x) a <= b, via add/mul/leq only.
  Coeff best = cs->zero();
  for (int x = 0; x < cs->carrier_size(); ++x) {
    Coeff cx = cs->carrier_elem(x);
    if (cs->leq(cs->mul(cx, cs->carrier_elem(a)), cs->carrier_elem(b)))
      best = cs->add(best, cx);
  }
  cjson doc;
  doc["coeff"] = {{"tropical", cap}};
  doc["tasks"] = {{{"op", "residuate"},
                   {"a", cs->str(cs->carrier_elem(a))},
                   {"b", cs->str(cs->carrier_elem(b))},
                   {"expect", {{"value", cs->str(best)}}}}};
  return doc;
}

std::vector<cjson> shrink_residuation(const cjson& doc) {
  std::vector<cjson> out;
  long cap = doc.at("coeff").at("tropical").get<long>();
  if (cap > 2) {
    cjson d = doc;
    d["coeff"]["tropical"] = cap - 1;
    // Re-derive the oracle for the shrunken carrier.
    CSPtr cs = coeff::CoeffSystem::tropical(int(cap - 1));
    for (auto& t : d["tasks"]) {
      Coeff a, b;
      try {
        a = cs->parse(t.at("a").get<std::string>());
        b = cs->parse(t.at("b").get<std::string>());
      } catch (const std::exception&) {
        return out;  // values no longer representable; stop shrinking
      }
      Coeff best = cs->zero();
      for (int x = 0; x < cs->carrier_size(); ++x) {
        Coeff cx = cs->carrier_elem(x);
        if (cs->leq(cs->mul(cx, a), b)) best = cs->add(best, cx);
      }
      t["expect"]["value"] = cs->str(best);
    }
    out.push_back(d);
  }
  return out;
}

cjson gen_linear(Rng& r) {
  int m = int(rnd(r, 1, 4)), n = int(rnd(r, 1, 4));
  cjson mat = cjson::array();
  for (int i = 0; i < m; ++i) {
    cjson row = cjson::array();
    for (int j = 0; j < n; ++j) row.push_back(rnd(r, -3, 3));
    mat.push_back(row);
  }
  cjson doc;
  doc["coeff"] = "rationals";
  doc["tasks"] = {{{"op", "check_linear_solve"}, {"matrix", mat}}};
  return doc;
}

/// A named group together with a valid action table, serialized directly.
void emit_regular_action(cjson& doc, const GroupPtr& g, const cjson& group_decl,
                         const std::string& gname, const std::string& yname) {
  doc["groups"][gname] = group_decl;
  cjson action = cjson::array();
  std::vector<std::string> carrier;
  for (long x = 0; x < g->size(); ++x) carrier.push_back("x" + std::to_string(x));
  for (long gg = 0; gg < g->size(); ++gg) {
    cjson row = cjson::array();
    for (long x = 0; x < g->size(); ++x) row.push_back(g->mul(int(gg), int(x)));
    action.push_back(row);
  }
  doc["groupoids"][yname] = {
      {"action", {{"carrier", carrier}, {"group", gname}, {"action", action}}}};
}

/// Z/n rotating Z/m (m dividing n), serialized directly.
void emit_cyclic_action(cjson& doc, int n, int m, const std::string& gname,
                        const std::string& yname) {
  doc["groups"][gname] = {{"cyclic", n}};
  cjson action = cjson::array();
  std::vector<std::string> carrier;
  for (int x = 0; x < m; ++x) carrier.push_back("p" + std::to_string(x));
  for (int g = 0; g < n; ++g) {
    cjson row = cjson::array();
    for (int x = 0; x < m; ++x) row.push_back((x + g) % m);
    action.push_back(row);
  }
  doc["groupoids"][yname] = {
      {"action", {{"carrier", carrier}, {"group", gname}, {"action", action}}}};
}

void emit_random_groupoid(cjson& doc, Rng& r, const std::string& gname, const std::string& yname) {
  switch (rnd(r, 0, 3)) {
    case 0: {
      int n = int(rnd(r, 2, 6));
      int m = (n % 2 == 0 && rnd(r, 0, 1)) ? n / 2 : n;
      emit_cyclic_action(doc, n, m, gname, yname);
      break;
    }
    case 1:
      emit_regular_action(doc, groupoid::FinGroup::symmetric(3), {{"symmetric", 3}}, gname, yname);
      break;
    case 2:
      emit_regular_action(
          doc,
          groupoid::FinGroup::direct_product(
              {groupoid::FinGroup::cyclic(2), groupoid::FinGroup::cyclic(2)}),
          {{"product", {gname + "_f", gname + "_f"}}}, gname, yname);
      doc["groups"][gname + "_f"] = {{"cyclic", 2}};
      break;
    default: {
      int k = int(rnd(r, 1, 5));
      std::vector<std::string> pts;
      for (int i = 0; i < k; ++i) pts.push_back("d" + std::to_string(i));
      doc["groups"][gname] = {{"trivial", cjson::object()}};
      doc["groupoids"][yname] = {{"discrete", pts}};
      break;
    }
  }
}

cjson gen_pi0(Rng& r) {
  cjson doc;
  doc["coeff"] = "rationals";
  emit_random_groupoid(doc, r, "G", "Y");
  doc["tasks"] = {{{"op", "check_pi0"}, {"groupoid", "Y"}}};
  return doc;
}

/// Adds the one-object trivial groupoid "PT" and the map Y -> PT.
void emit_to_point(cjson& doc, const cjson& ydecl_groupoid_name, long group_size, int carrier) {
  doc["groups"]["T1"] = {{"trivial", cjson::object()}};
  doc["groupoids"]["PT"] = {{"discrete", {"*"}}};
  cjson theta = cjson::array(), obj = cjson::array();
  for (long g = 0; g < group_size; ++g) theta.push_back(0);
  for (int x = 0; x < carrier; ++x) obj.push_back(0);
  doc["maps"]["to_pt"] = {
      {"dom", ydecl_groupoid_name}, {"cod", "PT"}, {"theta", theta}, {"obj", obj}};
}

std::pair<long, int> doc_groupoid_size(const cjson& doc, const std::string& yname) {
  const cjson& y = doc.at("groupoids").at(yname);
  if (y.contains("discrete")) return {1, int(y.at("discrete").size())};
  const cjson& a = y.at("action");
  return {long(a.at("action").size()), int(a.at("carrier").size())};
}

void emit_bundle(cjson& doc, Rng& r, const std::string& yname, const std::string& vname) {
  auto [gsize, csize] = doc_groupoid_size(doc, yname);
  if (gsize == 1 || rnd(r, 0, 1) == 0) {
    doc["bundles"][vname] = {{"trivial", {{"base", yname}, {"dim", rnd(r, 1, 2)}}}};
  } else {
    // Permutation representation induced by the action itself: stalk Q^1 per
    // point would be trivial; instead put the regular permutation matrices of
    // a small cyclic rotation on every stalk of dimension gsize-independent m.
    int m = int(rnd(r, 1, 2));
    doc["bundles"][vname] = {{"trivial", {{"base", yname}, {"dim", m}}}};
  }
}

cjson gen_norm(Rng& r) {
  cjson doc;
  doc["coeff"] = "rationals";
  emit_random_groupoid(doc, r, "G", "Y");
  auto [gsize, csize] = doc_groupoid_size(doc, "Y");
  emit_to_point(doc, "Y", gsize, csize);
  emit_bundle(doc, r, "Y", "V");
  doc["tasks"] = {{{"op", "norm_invertible"},
                   {"map", "to_pt"},
                   {"bundle", "V"},
                   {"expect", {{"invertible", true}}}}};
  return doc;
}

cjson gen_base_change(Rng& r) {
  cjson doc;
  doc["coeff"] = "rationals";
  emit_random_groupoid(doc, r, "G", "Y");
  emit_random_groupoid(doc, r, "H", "Z");
  auto [gy, cy] = doc_groupoid_size(doc, "Y");
  auto [gz, cz] = doc_groupoid_size(doc, "Z");
  doc["groups"]["T1"] = {{"trivial", cjson::object()}};
  doc["groupoids"]["PT"] = {{"discrete", {"*"}}};
  auto const_map = [&](const std::string& name, const std::string& dom, long gs, int cs) {
    cjson theta = cjson::array(), obj = cjson::array();
    for (long g = 0; g < gs; ++g) theta.push_back(0);
    for (int x = 0; x < cs; ++x) obj.push_back(0);
    doc["maps"][name] = {{"dom", dom}, {"cod", "PT"}, {"theta", theta}, {"obj", obj}};
  };
  const_map("f", "Y", gy, cy);
  const_map("g", "Z", gz, cz);
  emit_bundle(doc, r, "Y", "V");
  doc["bundles"]["W"] = {{"trivial", {{"base", "PT"}, {"dim", rnd(r, 1, 2)}}}};
  doc["tasks"] = {
      {{"op", "check_base_change"}, {"f", "f"}, {"g", "g"}, {"bundle", "V"}},
      {{"op", "check_projection_formula"}, {"map", "f"}, {"bundle", "V"}, {"aux", "W"}}};
  return doc;
}

cjson dims_table(Rng& r, int rows, int cols, int hi) {
  cjson t = cjson::array();
  for (int i = 0; i < rows; ++i) {
    cjson row = cjson::array();
    for (int j = 0; j < cols; ++j) row.push_back(rnd(r, 0, hi));
    t.push_back(row);
  }
  return t;
}

void emit_discrete(cjson& doc, const std::string& name, int k) {
  std::vector<std::string> pts;
  for (int i = 0; i < k; ++i) pts.push_back(name + std::to_string(i));
  doc["groupoids"][name] = {{"discrete", pts}};
}

cjson gen_convolution(Rng& r) {
  cjson doc;
  doc["coeff"] = "rationals";
  int na = int(rnd(r, 1, 3)), nb = int(rnd(r, 1, 3)), nc = int(rnd(r, 1, 3));
  if (rnd(r, 0, 1)) na = nb = nc;  // square case: composable in either order
  emit_discrete(doc, "A", na);
  emit_discrete(doc, "B", nb);
  emit_discrete(doc, "C", nc);
  doc["kernels"]["K1"] = {
      {"dims", {{"y1", "A"}, {"y2", "B"}, {"stalks", dims_table(r, na, nb, 2)}}}};
  doc["kernels"]["K2"] = {
      {"dims", {{"y1", "B"}, {"y2", "C"}, {"stalks", dims_table(r, nb, nc, 2)}}}};
  doc["tasks"] = {{{"op", "check_convolution_oracle"}, {"left", "K1"}, {"right", "K2"}}};
  return doc;
}

std::vector<cjson> shrink_convolution(const cjson& doc) {
  std::vector<cjson> out;
  // Reduce any positive stalk dimension by one.
  for (const char* kn : {"K1", "K2"}) {
    const cjson& st = doc.at("kernels").at(kn).at("dims").at("stalks");
    for (size_t i = 0; i < st.size(); ++i)
      for (size_t j = 0; j < st.at(i).size(); ++j)
        if (st.at(i).at(j).get<int>() > 0) {
          cjson d = doc;
          d["kernels"][kn]["dims"]["stalks"][i][j] = st.at(i).at(j).get<int>() - 1;
          out.push_back(d);
        }
  }
  // Drop the last point of the middle foot (shrinks both stalk tables).
  const cjson& bpts = doc.at("groupoids").at("B").at("discrete");
  if (bpts.size() > 1) {
    cjson d = doc;
    d["groupoids"]["B"]["discrete"].erase(bpts.size() - 1);
    auto& s1 = d["kernels"]["K1"]["dims"]["stalks"];
    for (auto& row : s1) row.erase(row.size() - 1);
    auto& s2 = d["kernels"]["K2"]["dims"]["stalks"];
    s2.erase(s2.size() - 1);
    out.push_back(d);
  }
  return out;
}

cjson gen_trace(Rng& r) {
  cjson doc;
  doc["coeff"] = "rationals";
  switch (rnd(r, 0, 2)) {
    case 0: {  // discrete endo-kernel
      int n = int(rnd(r, 1, 4));
      emit_discrete(doc, "Y", n);
      doc["kernels"]["K"] = {
          {"dims", {{"y1", "Y"}, {"y2", "Y"}, {"stalks", dims_table(r, n, n, 2)}}}};
      break;
    }
    case 1: {  // unit kernel on pt//Z_n
      int n = int(rnd(r, 2, 4));
      doc["groups"]["G"] = {{"cyclic", n}};
      doc["groupoids"]["Y"] = {{"one_point", "G"}};
      doc["kernels"]["K"] = {{"identity", "Y"}};
      break;
    }
    default: {  // kernel of the inversion automorphism of pt//Z_n
      int n = int(rnd(r, 2, 4));
      doc["groups"]["G"] = {{"cyclic", n}};
      doc["groupoids"]["Y"] = {{"one_point", "G"}};
      cjson theta = cjson::array();
      for (int g = 0; g < n; ++g) theta.push_back((n - g) % n);
      doc["maps"]["F"] = {{"dom", "Y"}, {"cod", "Y"}, {"theta", theta}, {"obj", {0}}};
      doc["kernels"]["K"] = {{"frobenius", {{"groupoid", "Y"}, {"map", "F"}}}};
      break;
    }
  }
  doc["tasks"] = {{{"op", "check_trace_equiv"}, {"kernel", "K"}}};
  return doc;
}

cjson gen_sheaf_function(Rng& r) {
  cjson doc;
  doc["coeff"] = "rationals";
  if (rnd(r, 0, 1) == 0) {
    // Discrete carrier, Frobenius a permutation, arbitrary alpha.
    int n = int(rnd(r, 1, 4));
    emit_discrete(doc, "Y", n);
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rnd(r, 0, i)]);
    doc["maps"]["F"] = {{"dom", "Y"}, {"cod", "Y"}, {"theta", {0}}, {"obj", perm}};
    std::vector<int> dims(n);
    for (int i = 0; i < n; ++i) dims[i] = int(rnd(r, 1, 2));
    cjson rho_row = cjson::array();
    for (int x = 0; x < n; ++x) {
      QMat id = QMat::identity(dims[x]);
      rho_row.push_back(qmat_json(id));
    }
    doc["bundles"]["V"] = {
        {"table", {{"base", "Y"}, {"dims", dims}, {"rho", cjson::array({rho_row})}}}};
    cjson alphas = cjson::array();
    for (int x = 0; x < n; ++x) {
      QMat a(dims[x], dims[perm[x]]);
      for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) a.at(i, j) = Rat(rnd(r, -2, 2));
      alphas.push_back(qmat_json(a));
    }
    doc["weil_sheaves"]["W"] = {{"bundle", "V"}, {"frobenius", "F"}, {"alpha", alphas}};
  } else {
    // pt//Z_n: rho(g) = P^g for the cyclic shift P; F identity or inversion.
    int n = int(rnd(r, 2, 4));
    doc["groups"]["G"] = {{"cyclic", n}};
    doc["groupoids"]["Y"] = {{"one_point", "G"}};
    QMat p(n, n);
    for (int i = 0; i < n; ++i) p.at((i + 1) % n, i) = 1;
    std::vector<QMat> pow(n, QMat::identity(n));
    for (int g = 1; g < n; ++g) pow[g] = p * pow[g - 1];
    cjson rho = cjson::array();
    for (int g = 0; g < n; ++g) rho.push_back(cjson::array({qmat_json(pow[g])}));
    doc["bundles"]["V"] = {{"table", {{"base", "Y"}, {"dims", {n}}, {"rho", rho}}}};
    bool inversion = rnd(r, 0, 1) == 1;
    cjson theta = cjson::array();
    for (int g = 0; g < n; ++g) theta.push_back(inversion ? (n - g) % n : g);
    doc["maps"]["F"] = {{"dom", "Y"}, {"cod", "Y"}, {"theta", theta}, {"obj", {0}}};
    // Equivariant alpha: a polynomial in P, composed with the inversion
    // permutation S when F is the inversion (S P S = P^{-1}).
    QMat a(n, n);
    for (int g = 0; g < n; ++g) {
      Rat cg(rnd(r, -2, 2));
      a = a + pow[g].scaled(cg);
    }
    if (inversion) {
      QMat s(n, n);
      for (int i = 0; i < n; ++i) s.at((n - i) % n, i) = 1;
      a = s * a;
    }
    doc["weil_sheaves"]["W"] = {
        {"bundle", "V"}, {"frobenius", "F"}, {"alpha", cjson::array({qmat_json(a)})}};
  }
  doc["tasks"] = {{{"op", "check_sheaf_function"}, {"weil", "W"}}};
  return doc;
}

/// A random tropical enriched category: a capped generalized metric with zero
/// diagonal, repaired by Floyd-Warshall so the triangle law always holds.
cjson emit_tropical_cat(cjson& doc, Rng& r, const std::string& name) {
  long cap = rnd(r, 2, 5);
  doc["coeff"] = {{"tropical", cap}};
  int n = int(rnd(r, 1, 3));
  std::vector<std::vector<long>> d(n, std::vector<long>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d[i][j] = i == j ? 0 : rnd(r, 0, cap + 1);
  // Tropical tensor: finite sums saturate at the cap; infinity (cap+1) is
  // absorbing. Repair with exactly that combine so the triangle law holds.
  auto combine = [cap](long x, long y) {
    return (x > cap || y > cap) ? cap + 1 : std::min(x + y, cap);
  };
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], combine(d[i][k], d[k][j]));
  std::vector<std::string> objs;
  for (int i = 0; i < n; ++i) objs.push_back("o" + std::to_string(i));
  cjson hom = cjson::array();
  CSPtr cs = coeff::CoeffSystem::tropical(int(cap));
  for (int i = 0; i < n; ++i) {
    cjson row = cjson::array();
    for (int j = 0; j < n; ++j)
      row.push_back(cs->str(cs->carrier_elem(int(std::min(d[i][j], cap + 1)))));
    hom.push_back(row);
  }
  doc["enriched"][name] = {{"table", {{"objs", objs}, {"hom", hom}}}};
  cjson meta;
  meta["n"] = n;
  meta["cap"] = cap;
  return meta;
}

cjson gen_yoneda(Rng& r) {
  cjson doc;
  emit_tropical_cat(doc, r, "C");
  doc["tasks"] = {{{"op", "check_yoneda"}, {"category", "C"}}};
  return doc;
}

cjson gen_weighted(Rng& r) {
  cjson doc;
  cjson meta = emit_tropical_cat(doc, r, "C");
  int n = meta.at("n").get<int>();
  long cap = meta.at("cap").get<long>();
  CSPtr cs = coeff::CoeffSystem::tropical(int(cap));
  const cjson& hom = doc["enriched"]["C"]["table"]["hom"];
  auto H = [&](int i, int j) { return carrier_idx(cs, hom.at(i).at(j)); };
  auto cmul = [&](int x, int y) {
    return carrier_idx(cs, cjson(cs->str(cs->mul(cs->carrier_elem(x), cs->carrier_elem(y)))));
  };
  auto cjoin = [&](int x, int y) {
    return carrier_idx(cs, cjson(cs->str(cs->add(cs->carrier_elem(x), cs->carrier_elem(y)))));
  };
  auto closure = [&](std::vector<int> v, bool covariant) {
    for (bool moved = true; moved;) {
      moved = false;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          // covariant: Hom(i,j) (x) v(i) <= v(j); presheaf: v(j) (x) Hom(i,j) <= v(i)
          int src = covariant ? i : j, dst = covariant ? j : i;
          int cand = cjoin(v[dst], cmul(H(i, j), v[src]));
          if (cand != v[dst]) {
            v[dst] = cand;
            moved = true;
          }
        }
    }
    return v;
  };
  auto random_vec = [&] {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = int(rnd(r, 0, cs->carrier_size() - 1));
    return v;
  };
  auto vec_json = [&](const std::vector<int>& v) {
    cjson a = cjson::array();
    for (int x : v) a.push_back(cs->str(cs->carrier_elem(x)));
    return a;
  };
  std::vector<int> w_cov = closure(random_vec(), true);
  std::vector<int> phi_cov = closure(random_vec(), true);
  std::vector<int> w_pre = closure(random_vec(), false);
  std::vector<int> psi_pre = closure(random_vec(), false);
  doc["tasks"] = {{{"op", "check_weighted_limit"},
                   {"category", "C"},
                   {"weight", vec_json(w_cov)},
                   {"diagram", vec_json(phi_cov)}},
                  {{"op", "check_weighted_colimit"},
                   {"category", "C"},
                   {"weight", vec_json(w_pre)},
                   {"diagram", vec_json(phi_cov)}},
                  {{"op", "check_bk"}, {"category", "C"}, {"presheaf", vec_json(psi_pre)}}};
  return doc;
}

cjson sm_poset_json(const enhance::SMPosetO& o) {
  cjson leq = cjson::array(), tensor = cjson::array(), ihom = cjson::array();
  for (int i = 0; i < o.n(); ++i) {
    cjson lrow = cjson::array(), trow = cjson::array(), hrow = cjson::array();
    for (int j = 0; j < o.n(); ++j) {
      lrow.push_back(o.leq[i][j] ? 1 : 0);
      trow.push_back(o.tensor[i][j]);
      hrow.push_back(o.ihom[i][j]);
    }
    leq.push_back(lrow);
    tensor.push_back(trow);
    ihom.push_back(hrow);
  }
  return {{"table",
           {{"objs", o.objs},
            {"leq", leq},
            {"tensor", tensor},
            {"unit", o.unit},
            {"ihom", ihom},
            {"dual", o.dual}}}};
}

cjson gen_enhance(Rng& r) {
  cjson doc;
  // Source: a small quantale viewed as an SM poset. Target: the document's
  // coefficient quantale.
  enhance::SMPosetO o = rnd(r, 0, 1) ? enhance::SMPosetO::from_quantale(
                                           coeff::CoeffSystem::tropical(int(rnd(r, 1, 2))))
                                     : enhance::SMPosetO::from_quantale(
                                           coeff::CoeffSystem::boolean_quantale());
  long cap = rnd(r, 2, 4);
  CSPtr a = coeff::CoeffSystem::tropical(int(cap));
  doc["coeff"] = {{"tropical", cap}};
  doc["sm_posets"]["O"] = sm_poset_json(o);
  // Random monotone lax map, by rejection; the constant-unit map always works.
  enhance::LaxFunctorF f;
  f.a = a;
  bool found = false;
  for (int attempt = 0; attempt < 60 && !found; ++attempt) {
    f.map.assign(o.n(), 0);
    for (int i = 0; i < o.n(); ++i) f.map[i] = int(rnd(r, 0, a->carrier_size() - 1));
    try {
      f.validate(o);
      found = true;
    } catch (const std::invalid_argument&) {
    }
  }
  if (!found) {
    int unit_idx = carrier_idx(a, cjson(a->str(a->one())));
    f.map.assign(o.n(), unit_idx);
  }
  cjson fmap = cjson::array();
  for (int v : f.map) fmap.push_back(a->str(a->carrier_elem(v)));
  doc["lax_functors"]["F"] = {{"poset", "O"}, {"map", fmap}};
  doc["tasks"] = {{{"op", "check_strict_unital_ff"}, {"poset", "O"}, {"functor", "F"}}};
  return doc;
}

std::vector<Property> property_suite() {
  return {
      {"coeff.residuation_oracle", 1, gen_residuation, shrink_residuation},
      {"coeff.linear_solve_laws", 1, gen_linear, nullptr},
      {"groupoid.orbit_stabilizer", 1, gen_pi0, nullptr},
      {"sheaf.norm_invertible", 2, gen_norm, nullptr},
      {"sheaf.base_change_projection", 5, gen_base_change, nullptr},
      {"kernel.convolution_oracle", 1, gen_convolution, shrink_convolution},
      {"kernel.trace_equivalence", 5, gen_trace, nullptr},
      {"frobenius.sheaf_function", 5, gen_sheaf_function, nullptr},
      {"enriched.yoneda", 2, gen_yoneda, nullptr},
      {"enriched.weighted_bk", 2, gen_weighted, nullptr},
      {"enhance.strict_unital_ff", 5, gen_enhance, nullptr},
  };
}

}  // namespace

RunResult selftest(long corpus_size, unsigned long long seed, const Limits& limits,
                   const std::string& counterexample_path) {
  std::vector<Property> props = property_suite();
  cjson report;
  report["corpus_size"] = corpus_size;
  report["seed"] = seed;
  report["properties"] = cjson::array();
  std::ostringstream human;
  int exit_code = 0;

  for (size_t pi = 0; pi < props.size(); ++pi) {
    const Property& p = props[pi];
    // Each property draws from its own stream so that adding properties or
    // changing iteration counts elsewhere does not perturb it.
    Rng rng(seed * 1000003ull + pi);
    long iters = corpus_size <= 0 ? 0 : std::max(1L, corpus_size / p.weight);
    long passed = 0;
    std::optional<cjson> counterexample;
    for (long i = 0; i < iters; ++i) {
      cjson doc = p.generate(rng);
      RunResult rr = run_parsed(doc, limits, false);
      if (rr.exit_code != 0) {
        counterexample = minimize(doc, p, limits, rr.exit_code);
        break;
      }
      ++passed;
    }
    cjson entry{{"name", p.name}, {"trials", iters}, {"passed", passed}};
    entry["status"] = counterexample ? "fail" : "ok";
    human << p.name << ": " << passed << "/" << iters
          << (counterexample ? "  FAIL" : "  ok") << "\n";
    if (counterexample) {
      exit_code = 2;
      std::ofstream out(counterexample_path);
      out << counterexample->dump(2) << "\n";
      entry["counterexample"] = counterexample_path;
      report["counterexample"] = counterexample_path;
      human << "  minimized counterexample written to " << counterexample_path << "\n";
      report["properties"].push_back(entry);
      break;  // stop at the first failing property
    }
    report["properties"].push_back(entry);
  }
  report["status"] = exit_code == 0 ? "ok" : "fail";
  human << "status: " << report["status"].get<std::string>() << "\n";

  RunResult res;
  res.exit_code = exit_code;
  res.human = human.str();
  res.machine = report.dump(2) + "\n";
  return res;
}

}  // namespace fincat::scenario
