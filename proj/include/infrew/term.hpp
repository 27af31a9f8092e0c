#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace infrew {

/// A path of 1-based child indices; the empty path is the root.
struct Position {
  std::vector<int> path;

  Position() = default;
  explicit Position(std::vector<int> p) : path(std::move(p)) {}
  Position(std::initializer_list<int> p) : path(p) {}

  std::size_t depth() const { return path.size(); }
  bool is_root() const { return path.empty(); }

  Position child(int i) const;
  Position concat(const Position& q) const;
  Position prefix(std::size_t n) const;

  /// this ≤ q in the prefix order
  bool is_prefix_of(const Position& q) const;
  /// this < q
  bool strictly_above(const Position& q) const { return depth() < q.depth() && is_prefix_of(q); }
  bool comparable(const Position& q) const { return is_prefix_of(q) || q.is_prefix_of(*this); }
  bool parallel(const Position& q) const { return !comparable(q); }

  std::string str() const;
  static Position parse(std::string_view s);

  auto operator<=>(const Position&) const = default;
  bool operator==(const Position&) const = default;
};

struct TermNode {
  bool is_var = false;
  std::string name;
  std::vector<std::uint32_t> args;
};

/// A term over a first-order signature, stored as a rooted graph.  Acyclic
/// graphs are finite terms; cyclic graphs denote rational infinite terms
/// (the tree unfolding).  Values are immutable and cheap to copy.
class Term {
public:
  using Graph = std::vector<TermNode>;

  Term() = default;
  Term(std::shared_ptr<const Graph> g, std::uint32_t root) : g_(std::move(g)), root_(root) {}

  static Term var(std::string name);
  static Term fun(std::string symbol, std::vector<Term> args = {});
  /// Checks indices and per-symbol arity consistency.
  static Term from_graph(Graph nodes, std::uint32_t root);

  bool valid() const { return g_ != nullptr; }
  bool is_var() const { return node().is_var; }
  const std::string& symbol() const { return node().name; }
  std::size_t arity() const { return node().args.size(); }
  /// 1-based argument access; a view into the same graph.
  Term arg(std::size_t i) const;
  std::vector<Term> args() const;

  const Graph& graph() const { return *g_; }
  const std::shared_ptr<const Graph>& graph_ptr() const { return g_; }
  std::uint32_t root() const { return root_; }
  const TermNode& node() const { return (*g_)[root_]; }

  /// No cycle reachable from the root.
  bool is_finite() const;
  /// Height of a finite term (a constant or variable has height 0).
  std::size_t height() const;
  /// Number of distinct reachable graph nodes.
  std::size_t size() const;
  std::set<std::string> variables() const;

  /// Copy of the reachable part only.
  Term compact() const;
  /// Bisimulation quotient; bisimilar terms have identical minimized printing.
  Term minimized() const;

  /// Finite terms print as `f(x, g(y))`, rational ones as `rec X1 = ...; X2 = ...`.
  std::string str() const;

private:
  std::shared_ptr<const Graph> g_;
  std::uint32_t root_ = 0;
};

bool bisim_equal(const Term& s, const Term& t);
inline bool operator==(const Term& s, const Term& t) { return bisim_equal(s, t); }

/// Variables follow the lexical convention x, y, z optionally followed by
/// digits or primes; every other identifier is a function symbol.
bool is_variable_name(std::string_view id);

/// `f(x, g(y))` or `rec s = f(f(s,b),a); ...` (first equation is the entry).
Term parse_term(std::string_view text);

struct Signature {
  std::map<std::string, std::size_t> arity;

  /// Adds every symbol of t; throws arity-mismatch on conflicts.
  void add(const Term& t);
  bool contains(const std::string& f) const { return arity.count(f) != 0; }
};

using Substitution = std::map<std::string, Term>;

std::set<Position> positions_up_to(const Term& t, std::size_t d);
/// Throws invalid-position.
Term subterm_at(const Term& t, const Position& p);
/// s[t]_p; only the path to p is unfolded.  Throws invalid-position.
Term replace_at(const Term& s, const Term& t, const Position& p);
Term apply_subst(const Substitution& sigma, const Term& t);
/// Symbol (or variable name) at p, following the unfolding.
const TermNode& node_at(const Term& t, const Position& p);
bool has_position(const Term& t, const Position& p);

/// A term with exactly one hole (the constant `[]`).
struct Context {
  Term term;
  Position hole;

  static const std::string hole_symbol;
  static Context around(const Term& t, const Position& p);
  Term plug(const Term& s) const { return replace_at(term, s, hole); }
};

/// d(s,t) = 2^-k for the least depth k of a difference, 0 when equal.
struct Distance {
  std::optional<std::size_t> depth;

  double value() const;
  std::string str() const;
};

Distance metric_distance(const Term& s, const Term& t, std::size_t probe_depth = 64);

/// Whether s and t agree on every position of depth ≤ d.
bool agree_to_depth(const Term& s, const Term& t, std::size_t d);

/// Finite term cut at depth d; cut subterms become the constant `marker`.
Term truncate(const Term& t, std::size_t d, const std::string& marker = "_");

} // namespace infrew
