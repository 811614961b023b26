#pragma once

#include <array>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace fincat::groupoid {

class FinGroup;
using GroupPtr = std::shared_ptr<const FinGroup>;

/// A finite group, given by an explicit multiplication table or as a direct
/// product of finite groups. Product groups never materialize their tables;
/// elements are mixed-radix indices over the factors.
class FinGroup {
 public:
  /// Validates the table (associativity, identity, inverses) exhaustively.
  static GroupPtr from_table(std::vector<std::string> labels,
                             std::vector<std::vector<int>> mult, int identity);
  static GroupPtr trivial();
  static GroupPtr cyclic(int n);
  static GroupPtr symmetric(int n);  // S_n as a table group, n <= 5
  static GroupPtr direct_product(std::vector<GroupPtr> factors);

  long size() const { return size_; }
  int id() const { return id_; }
  int mul(int a, int b) const;
  int inv(int a) const;
  std::string label(int a) const;
  /// A small deterministic generating set (greedy closure).
  const std::vector<int>& generators() const;
  bool same_as(const FinGroup& o) const;

  bool is_product() const { return !factors_.empty(); }
  const std::vector<GroupPtr>& factors() const { return factors_; }
  /// Mixed-radix index split / join for product groups.
  std::vector<int> split(int a) const;
  int join(const std::vector<int>& parts) const;

 private:
  FinGroup() = default;
  long size_ = 1;
  int id_ = 0;
  std::vector<std::string> labels_;
  std::vector<std::vector<int>> mult_;
  std::vector<int> inv_;
  std::vector<GroupPtr> factors_;
  std::vector<long> strides_;
  mutable std::vector<int> gens_;
};

/// Returns a small generating set of the subgroup given by `elements`.
std::vector<int> small_generating_set(const FinGroup& g, const std::vector<int>& elements);

class FinGroupoid;
using GPtr = std::shared_ptr<const FinGroupoid>;

/// An action groupoid X // G: a finite carrier with a group action.
class FinGroupoid {
 public:
  FinGroupoid(std::vector<std::string> carrier, GroupPtr group,
              std::vector<std::vector<int>> action);

  static GPtr discrete(std::vector<std::string> labels);
  static GPtr one_point(GroupPtr g);  // pt // G
  static GPtr point();

  int size() const { return int(carrier_.size()); }
  const std::vector<std::string>& carrier() const { return carrier_; }
  const std::string& label(int x) const { return carrier_[x]; }
  const GroupPtr& group() const { return group_; }
  int act(int g, int x) const { return action_[g][x]; }
  bool same_as(const FinGroupoid& o) const;

  /// Action laws, checked exhaustively over the table.
  void validate() const;

 private:
  std::vector<std::string> carrier_;
  GroupPtr group_;
  std::vector<std::vector<int>> action_;  // action[g][x]
};

/// An equivariant map of action groupoids: a group homomorphism theta and a
/// carrier map compatible with the actions.
struct GroupoidMap {
  GPtr dom, cod;
  std::vector<int> theta;  // on group elements
  std::vector<int> obj;    // on carrier points

  static GroupoidMap identity(GPtr y);
  int map_obj(int x) const { return obj[x]; }
  int map_grp(int g) const { return theta[g]; }
  /// Homomorphism + equivariance, exhaustive. Throws on violation.
  void validate() const;
};

GroupoidMap compose(const GroupoidMap& f, const GroupoidMap& g);  // g after f

struct OrbitInfo {
  int representative = 0;          // carrier index
  std::vector<int> members;        // ascending carrier indices
  long automorphism_order = 1;     // |Stab(representative)|
};

/// Orbits of the action with stabilizer orders, ordered by least member.
std::vector<OrbitInfo> pi0_with_aut(const FinGroupoid& y);

/// Flat n-ary product: carrier tuples, group the direct product, the action
/// componentwise. Tuple labels are "(a,b,...)"; the first factor varies
/// slowest so derived labels sort lexicographically on constituents.
GPtr product(const std::vector<GPtr>& factors);
GPtr product(const GPtr& a, const GPtr& b);

/// Projection of a flat product onto one factor.
GroupoidMap projection(const GPtr& prod, const std::vector<GPtr>& factors, int which);
/// Projection onto a sub-tuple of factors (target built with product()).
GroupoidMap projection(const GPtr& prod, const std::vector<GPtr>& factors,
                       const std::vector<int>& which);

struct IsoCommaSquare {
  GPtr apex;
  GroupoidMap to_f_dom;  // first projection
  GroupoidMap to_g_dom;  // second projection
  // Apex objects are triples (a, b, h) with h . f(a) = g(b).
  std::vector<std::array<int, 3>> triples;
};

/// The iso-comma (2-categorical) pullback of f and g over their common
/// codomain. Throws std::invalid_argument if the codomains differ.
IsoCommaSquare iso_comma_square(const GroupoidMap& f, const GroupoidMap& g);

struct TwistedFixedPoints {
  GPtr groupoid;
  std::vector<std::pair<int, int>> points;  // (x, g) with g . F(x) = x
};

/// The groupoid of pairs (x, g) with g . F(x) = x, h acting as
/// (x, g) -> (h.x, h g theta_F(h)^{-1}).
TwistedFixedPoints twisted_fixed_points(const GPtr& y, const GroupoidMap& f);

}  // namespace fincat::groupoid
