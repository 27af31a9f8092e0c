#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "infrew/term.hpp"
#include "infrew/trs.hpp"

namespace testing_support {

using infrew::Term;
using infrew::TermNode;

struct Sym {
  std::string name;
  std::size_t arity;
};

inline Term random_finite(std::mt19937& rng, const std::vector<Sym>& sig, std::size_t max_depth,
                          const std::vector<std::string>& vars = {}) {
  std::function<Term(std::size_t)> go = [&](std::size_t d) -> Term {
    std::vector<const Sym*> pick;
    for (auto& s : sig)
      if (d < max_depth || s.arity == 0) pick.push_back(&s);
    std::size_t choices = pick.size() + vars.size();
    std::size_t k = std::uniform_int_distribution<std::size_t>(0, choices - 1)(rng);
    if (k >= pick.size()) return Term::var(vars[k - pick.size()]);
    std::vector<Term> args;
    for (std::size_t i = 0; i < pick[k]->arity; ++i) args.push_back(go(d + 1));
    return Term::fun(pick[k]->name, std::move(args));
  };
  return go(0);
}

/// Random graph with `n` nodes; usually cyclic.
inline Term random_rational(std::mt19937& rng, const std::vector<Sym>& sig, std::size_t n) {
  Term::Graph g(n);
  std::uniform_int_distribution<std::size_t> sym(0, sig.size() - 1), node(0, n - 1);
  for (auto& nd : g) {
    const Sym& s = sig[sym(rng)];
    nd.name = s.name;
    for (std::size_t i = 0; i < s.arity; ++i) nd.args.push_back(static_cast<std::uint32_t>(node(rng)));
  }
  return Term::from_graph(std::move(g), 0);
}

/// Naive depth-bounded comparison by recursion on the unfolding.
inline bool naive_agree(const Term& s, const Term& t, std::size_t d) {
  if (s.is_var() != t.is_var() || s.symbol() != t.symbol() || s.arity() != t.arity()) return false;
  if (d == 0) return true;
  for (std::size_t i = 1; i <= s.arity(); ++i)
    if (!naive_agree(s.arg(i), t.arg(i), d - 1)) return false;
  return true;
}

inline infrew::Trs fixture(const std::string& name) { return infrew::load_trs(std::string(INFREW_TEST_DATA) + "/" + name); }

/// A^n(c)
inline Term tower(const std::string& f, std::size_t n, const std::string& base = "c") {
  Term t = Term::fun(base);
  for (std::size_t i = 0; i < n; ++i) t = Term::fun(f, {t});
  return t;
}

/// Every subset of W whose members pairwise do not overlap.
inline std::vector<std::vector<infrew::Redex>> multiredexes(const std::vector<infrew::Redex>& W, const infrew::Trs& R) {
  std::vector<std::vector<infrew::Redex>> out;
  for (unsigned mask = 0; mask < (1u << W.size()); ++mask) {
    std::vector<infrew::Redex> U;
    bool ok = true;
    for (std::size_t i = 0; i < W.size() && ok; ++i) {
      if (!(mask >> i & 1)) continue;
      for (auto& u : U) ok = ok && !infrew::overlap(u, W[i], R);
      U.push_back(W[i]);
    }
    if (ok) out.push_back(U);
  }
  return out;
}

/// Complete development of a multi-redex in a finite term by contracting the
/// deepest redexes first: inner contractions never disturb outer matches.
inline Term develop_deepest_first(Term t, std::vector<infrew::Redex> U, const infrew::Trs& R) {
  std::sort(U.begin(), U.end(), [](auto& a, auto& b) { return a.root.depth() > b.root.depth(); });
  for (auto& r : U) t = infrew::rewrite_at(t, r, R);
  return t;
}

/// Every reduct of a finite term within `steps` rewrite steps, by printed form.
inline std::map<std::string, Term> reducts(const Term& t, const infrew::Trs& R, std::size_t steps) {
  std::map<std::string, Term> seen{{t.str(), t}};
  std::vector<Term> frontier{t};
  for (std::size_t k = 0; k < steps && !frontier.empty(); ++k) {
    std::vector<Term> next;
    for (auto& s : frontier)
      for (auto& r : infrew::find_redexes(s, R, 64)) {
        Term u = infrew::rewrite_at(s, r, R);
        if (seen.emplace(u.str(), u).second) next.push_back(u);
      }
    frontier = std::move(next);
  }
  return seen;
}

/// Residuals of U after contracting v, position by position.  U and v must
/// not overlap except for v itself.
inline std::vector<infrew::Redex> naive_residuals(const std::vector<infrew::Redex>& U, const infrew::Redex& v,
                                                  const infrew::Trs& R) {
  using infrew::Position;
  const auto& rule = R.rule(v.rule);
  std::map<std::string, Position> var_at;
  std::map<std::string, std::vector<Position>> occurs;
  std::function<void(const Term&, Position, std::map<std::string, std::vector<Position>>&)> walk =
      [&](const Term& t, Position at, auto& out) {
        if (t.is_var()) {
          out[t.symbol()].push_back(at);
          return;
        }
        for (std::size_t i = 1; i <= t.arity(); ++i) walk(t.arg(i), at.child(static_cast<int>(i)), out);
      };
  std::map<std::string, std::vector<Position>> lhs;
  walk(rule.lhs, {}, lhs);
  walk(rule.rhs, {}, occurs);
  for (auto& [x, ps] : lhs) var_at[x] = ps.front();

  std::vector<infrew::Redex> out;
  for (auto& u : U) {
    if (u == v) continue;
    if (!v.root.strictly_above(u.root)) {
      out.push_back(u);
      continue;
    }
    for (auto& [x, ox] : var_at) {
      Position at = v.root.concat(ox);
      if (!at.is_prefix_of(u.root)) continue;
      Position rest(std::vector<int>(u.root.path.begin() + static_cast<std::ptrdiff_t>(at.depth()), u.root.path.end()));
      for (auto& o : occurs[x]) out.push_back({v.root.concat(o).concat(rest), u.rule});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

} // namespace testing_support
