#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "infrew/spwords.hpp"
#include "infrew/term.hpp"

namespace infrew {

/// A λ-term with integer-indexed variables x_i, i ∈ ℤ.  A truncation leaf
/// stands for an unknown subterm; when it carries a bound, every variable
/// free in the hidden part has index ≤ bound.
class Lambda {
public:
  enum class Kind { Var, App, Abs, Trunc };

  /// An unbounded truncation leaf.
  Lambda();

  static Lambda var(std::int64_t i);
  static Lambda app(Lambda f, Lambda a);
  /// f a1 a2 ... (left-nested)
  static Lambda apps(Lambda f, const std::vector<Lambda>& args);
  static Lambda abs(std::int64_t i, Lambda body);
  static Lambda trunc(std::optional<std::int64_t> bound = std::nullopt);

  Kind kind() const { return n_->kind; }
  bool is(Kind k) const { return n_->kind == k; }
  /// Variable index, bound index of an abstraction.
  std::int64_t index() const { return n_->index; }
  /// Bound of a truncation leaf.
  std::optional<std::int64_t> bound() const { return n_->bound; }
  const Lambda& fun() const { return *n_->a; }
  const Lambda& arg() const { return *n_->b; }
  const Lambda& body() const { return *n_->a; }

  /// 1-based children: function 1 and argument 2 of an application, body 1
  /// of an abstraction.  Throws invalid-position.
  const Lambda& child(int i) const;
  std::size_t height() const;

  /// `\x1. (x0 x1)`; truncation leaves print as `_`.
  std::string str() const;

private:
  struct Node {
    Kind kind;
    std::int64_t index = 0;
    std::optional<std::int64_t> bound;
    std::shared_ptr<const Lambda> a, b;
  };
  explicit Lambda(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  std::shared_ptr<const Node> n_;
};

/// Identical up to renaming of bound variables, compared on depths < limit.
/// Truncation leaves match each other only.
bool alpha_equal(const Lambda& s, const Lambda& t, std::size_t limit = static_cast<std::size_t>(-1));
/// Identical trees, bound indices and truncation bounds included.
bool same_term(const Lambda& s, const Lambda& t);

/// Throws invalid-position.
const Lambda& lambda_at(const Lambda& t, const Position& p);
Lambda replace_at(const Lambda& t, const Position& p, const Lambda& s);

/// Whether x_i may occur free: false, true, or nullopt when a truncation
/// leaf could hide it.
std::optional<bool> occurs_free(const Lambda& t, std::int64_t i);
/// M[x_i := N], renaming binders to avoid capture.  Throws
/// undecidable-freeness when a fresh name cannot be guaranteed.
Lambda substitute(const Lambda& m, std::int64_t i, const Lambda& n);

bool is_beta_redex(const Lambda& t, const Position& p);
/// λx.(M x) shape only; freeness is checked by eta_step.
bool is_eta_redex(const Lambda& t, const Position& p);
/// Throws not-a-redex.
Lambda beta_step(const Lambda& t, const Position& p);
/// Throws not-a-redex or undecidable-freeness.
Lambda eta_step(const Lambda& t, const Position& p);

/// ⟨w⟩_i unfolded to `depth` spine constructors.  The spine below becomes a
/// truncation leaf bounded by its level.  Throws precondition when a
/// finite word is shorter than depth.
Lambda translate(const SPWord& w, std::int64_t i = 0, std::size_t depth = kDefaultTruncation);

struct CommutingSquare {
  /// "β" for a PS factor, "η" for an SP factor.
  std::string step;
  /// Translate, then contract at depth pos.
  Lambda stepped;
  /// Contract the factor, then translate to depth − 2.
  Lambda translated;
  bool agree = false;
};

/// Both paths of the square for the factor at word depth pos.  Throws
/// no-factor-at-position unless a PS or SP factor sits there with
/// pos + 2 ≤ depth.
CommutingSquare commuting_square(const SPWord& w, std::int64_t i, std::size_t pos, std::size_t depth);
bool check_commuting_square(const SPWord& w, std::int64_t i, std::size_t pos, std::size_t depth);

struct DemoLine {
  /// "β", "η" or "βη"
  std::string rule;
  std::size_t steps = 0;
  /// Step count next to the displayed arrow; 0 for a line not displayed.
  std::size_t displayed_steps = 0;
  /// The displayed form of the target.
  std::string displayed;
  Lambda term;
  bool matches = false;
};

struct WwiDemo {
  /// Lines of the β-branch, then of the η-branch.
  std::vector<DemoLine> lines;
  bool ok() const;
};

/// Replays the finite reduction of W W I, checking every line up to α.
WwiDemo wwi_demo();

} // namespace infrew
