#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "infrew/term.hpp"

namespace infrew {

struct Rule {
  std::string name;
  Term lhs;
  Term rhs;

  bool collapsing() const { return rhs.is_var(); }
  /// Non-variable positions of the left-hand side, in pre-order.
  const std::vector<Position>& pattern() const { return pattern_; }
  /// Length of the longest pattern position.
  std::size_t pattern_depth() const { return pattern_depth_; }
  std::string str() const;

  /// Checks ℓ(ε) ∉ X, Var(r) ⊆ Var(ℓ) and finiteness of both sides.
  static Rule make(std::string name, Term lhs, Term rhs);

private:
  std::vector<Position> pattern_;
  std::size_t pattern_depth_ = 0;
};

class Trs {
public:
  Trs() = default;
  explicit Trs(std::vector<Rule> rules);

  const Signature& signature() const { return sig_; }
  const std::vector<Rule>& rules() const { return rules_; }
  const Rule& rule(std::size_t i) const { return rules_.at(i); }
  std::size_t size() const { return rules_.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  bool has_collapsing() const;
  std::size_t max_pattern_depth() const;

private:
  Signature sig_;
  std::vector<Rule> rules_;
};

/// One rule per line, `name: lhs -> rhs`; `#` starts a comment.
Trs parse_trs(std::string_view text);
Trs load_trs(const std::string& path);

bool is_left_linear(const Trs& R);

/// Most general unifier of two finite terms (idempotent), if any.
std::optional<Substitution> unify(const Term& a, const Term& b);
/// σ with σ(pattern) = t; variables bind to subterm views of t.
std::optional<Substitution> match(const Term& pattern, const Term& t);

struct CriticalPair {
  std::size_t outer = 0;
  std::size_t inner = 0;
  Position pos;
  Substitution sigma;  // restricted to the outer rule's variables
  Substitution tau;    // restricted to the (renamed) inner rule's variables
  Term left;           // (σℓ₁)[τr₂]_p
  Term right;          // σr₁
  bool trivial = false;
};

/// Throws not-left-linear.
std::vector<CriticalPair> critical_pairs(const Trs& R);

enum class Orthogonality { Orthogonal, WeaklyOrthogonal, Neither };
std::string to_string(Orthogonality o);
Orthogonality classify_orthogonality(const Trs& R);

struct Redex {
  Position root;
  std::size_t rule = 0;

  /// root·q for every non-variable position q of the rule's left-hand side
  std::vector<Position> pattern(const Trs& R) const;
  std::size_t depth() const { return root.depth(); }
  /// `redex@<pos>(<rule>)`
  std::string str(const Trs& R) const;

  auto operator<=>(const Redex&) const = default;
  bool operator==(const Redex&) const = default;
};

/// Redexes at generator·period^k for all k ≥ 0 (a periodic family on a
/// rational term).
struct RedexFamily {
  Position generator;
  Position period;
  std::size_t rule = 0;

  Redex instance(std::size_t k) const;
  std::string str(const Trs& R) const;

  auto operator<=>(const RedexFamily&) const = default;
  bool operator==(const RedexFamily&) const = default;
};

/// A finite redex set together with periodic families.
struct RedexSet {
  std::vector<Redex> finite;
  std::vector<RedexFamily> families;

  RedexSet() = default;
  RedexSet(std::vector<Redex> rs) : finite(std::move(rs)) {}  // NOLINT implicit

  bool is_finite() const { return families.empty(); }
  bool empty() const { return finite.empty() && families.empty(); }
  /// Finite members plus the first `k` instances of every family.
  std::vector<Redex> expand(std::size_t k) const;
};

/// A set of pairwise non-overlapping redexes.
using MultiRedex = RedexSet;

bool overlap(const Redex& u, const Redex& v, const Trs& R);
bool is_redex(const Term& t, const Redex& r, const Trs& R);

/// All redexes rooted at depth ≤ depth_bound, ordered by root then rule.
std::vector<Redex> find_redexes(const Term& t, const Trs& R, std::size_t depth_bound);
/// C[σr] for t = C[σℓ]; throws stale-redex when ℓ does not match.
Term rewrite_at(const Term& t, const Redex& rdx, const Trs& R);
/// Simultaneous contraction of redexes at pairwise parallel roots; throws not-parallel.
Term parallel_step(const Term& t, const std::vector<Redex>& U, const Trs& R);

} // namespace infrew
